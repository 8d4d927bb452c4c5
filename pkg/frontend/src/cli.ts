/** CLI: render --family fig_bits --csv results.csv --out fig.svg */

import { readFileSync, writeFileSync } from "fs";
import { FAMILIES, Family, renderFigure } from "./families.js";

interface Args {
  family: Family;
  csv: string;
  out: string;
}

export function parseArgs(argv: string[]): Args {
  if (argv[0] !== "render") {
    throw new Error("usage: render --family <id> --csv <results.csv> --out <fig.svg>");
  }
  const opts = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`bad argument: ${key}`);
    }
    opts.set(key.slice(2), value);
  }
  const family = opts.get("family");
  const csv = opts.get("csv");
  const out = opts.get("out");
  if (!family || !csv || !out) {
    throw new Error("render needs --family, --csv and --out");
  }
  if (!(FAMILIES as readonly string[]).includes(family)) {
    throw new Error(`unknown figure family: ${family} (choose from ${FAMILIES.join(", ")})`);
  }
  return { family: family as Family, csv, out };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    const text = readFileSync(args.csv, "utf-8");
    const figure = renderFigure(args.family, text);
    writeFileSync(args.out, figure, "utf-8");
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
