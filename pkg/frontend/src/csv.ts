/** Strict CSV reading for the result and overhead tables. */

export interface Table {
  header: string[];
  rows: Record<string, string>[];
}

/**
 * Parse simple comma-separated text (no quoting; the producers never emit
 * commas inside cells). A row whose width differs from the header aborts
 * with its 1-based line number.
 */
export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/);
  while (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) throw new Error("no data: empty CSV");
  const header = lines[0].split(",");
  const rows: Record<string, string>[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new Error(
        `corrupt row at line ${i + 1}: expected ${header.length} cells, got ${cells.length}`,
      );
    }
    const row: Record<string, string> = {};
    header.forEach((name, j) => (row[name] = cells[j]));
    rows.push(row);
  }
  return { header, rows };
}

export function requireColumns(table: Table, needed: string[]): void {
  const missing = needed.filter((c) => !table.header.includes(c));
  if (missing.length > 0) {
    throw new Error(`missing columns: ${missing.join(", ")}`);
  }
}

/** Numeric cell: empty means missing, "inf" means positive infinity. */
export function cellNumber(value: string): number | null {
  if (value === "") return null;
  if (value === "inf") return Infinity;
  const parsed = Number(value);
  if (Number.isNaN(parsed)) throw new Error(`not a number: ${value}`);
  return parsed;
}
