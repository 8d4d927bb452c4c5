/** Figure families: selection and layout rules for each plot the CLI renders. */

import { Table, cellNumber, parseCsv, requireColumns } from "./csv.js";
import { formatCount, linearScale, logScale } from "./scales.js";
import * as svg from "./svg.js";

export const FAMILIES = [
  "fig_users",
  "fig_snrtheta",
  "fig_zeta",
  "fig_bits",
  "fig_nmse_all",
  "fig_overhead",
] as const;

export type Family = (typeof FAMILIES)[number];

const RESULT_COLUMNS = [
  "scenario", "mode", "sweep_axis", "sweep_value", "seed", "round",
  "loss", "val_rmse", "nmse", "snr_theta_db", "bits", "zeta", "k_users",
];

const SWEEP_LABELS: Record<string, string> = {
  fig_users: "active users",
  fig_snrtheta: "transport SNR (dB)",
  fig_zeta: "erased fraction",
  fig_bits: "quantizer bits",
  fig_nmse_all: "pilot SNR (dB)",
};

interface Series {
  label: string;
  points: [number, number][];
}

function sweepOrder(a: string, b: string): number {
  const na = a === "inf" ? Infinity : Number(a);
  const nb = b === "inf" ? Infinity : Number(b);
  if (na === nb) return a < b ? -1 : a > b ? 1 : 0;
  return na - nb;
}

function groupMean(
  rows: Record<string, string>[],
  key: (row: Record<string, string>) => string,
  value: (row: Record<string, string>) => number | null,
): Map<string, number> {
  const sums = new Map<string, { total: number; count: number }>();
  for (const row of rows) {
    const v = value(row);
    if (v === null) continue;
    const k = key(row);
    const slot = sums.get(k) ?? { total: 0, count: 0 };
    slot.total += v;
    slot.count += 1;
    sums.set(k, slot);
  }
  const out = new Map<string, number>();
  for (const [k, { total, count }] of sums) out.set(k, total / count);
  return out;
}

function rmseSeries(table: Table): Series[] {
  // seed-mean validation RMSE per round, one series per (mode, sweep value)
  const means = groupMean(
    table.rows,
    (r) => `${r.mode}|${r.sweep_value}|${r.round}`,
    (r) => cellNumber(r.val_rmse),
  );
  const byLine = new Map<string, [number, number][]>();
  for (const [key, mean] of means) {
    const [mode, value, round] = key.split("|");
    if (!Number.isFinite(mean)) continue;
    const lineKey = `${mode}|${value}`;
    const pts = byLine.get(lineKey) ?? [];
    pts.push([Number(round), mean]);
    byLine.set(lineKey, pts);
  }
  const labels = [...byLine.keys()].sort((a, b) => {
    const [ma, va] = a.split("|");
    const [mb, vb] = b.split("|");
    return ma === mb ? sweepOrder(va, vb) : ma < mb ? -1 : 1;
  });
  return labels.map((key) => {
    const [mode, value] = key.split("|");
    const points = byLine.get(key)!.sort((p, q) => p[0] - q[0]);
    return { label: `${mode} @ ${value}`, points };
  });
}

function nmseByValue(table: Table): { values: string[]; series: Series[] } {
  const means = groupMean(
    table.rows,
    (r) => `${r.mode}|${r.sweep_value}`,
    (r) => cellNumber(r.nmse),
  );
  const values = [...new Set(table.rows.map((r) => r.sweep_value))].sort(sweepOrder);
  const modes = [...new Set(table.rows.map((r) => r.mode))].sort();
  const series: Series[] = [];
  for (const mode of modes) {
    const points: [number, number][] = [];
    values.forEach((value, i) => {
      const mean = means.get(`${mode}|${value}`);
      if (mean !== undefined && Number.isFinite(mean) && mean > 0) {
        points.push([i, mean]);
      }
    });
    if (points.length > 0) series.push({ label: mode, points });
  }
  return { values, series };
}

function drawSeries(
  series: Series[],
  xScale: (v: number) => number,
  yScale: (v: number) => number,
): string {
  const parts: string[] = [];
  series.forEach((s, i) => {
    const color = svg.PALETTE[i % svg.PALETTE.length];
    const pts = s.points.map(([x, y]) => [xScale(x), yScale(y)] as [number, number]);
    if (pts.length > 1) parts.push(svg.polyline(pts, color));
    for (const [px, py] of pts) parts.push(svg.marker(px, py, color));
  });
  return parts.join("\n");
}

function renderSweepPair(family: Family, table: Table): string {
  requireColumns(table, RESULT_COLUMNS);
  if (table.rows.length === 0) throw new Error("no data: CSV has no rows");
  const rmse = rmseSeries(table);
  const { values, series: nmse } = nmseByValue(table);
  if (rmse.length === 0 && nmse.length === 0) {
    throw new Error("no data: nothing finite to plot");
  }

  const panelA: svg.Panel = { x: 60, y: 40, width: 330, height: 260 };
  const panelB: svg.Panel = { x: 500, y: 40, width: 330, height: 260 };
  const parts: string[] = [];

  if (rmse.length > 0) {
    const xs = rmse.flatMap((s) => s.points.map((p) => p[0]));
    const ys = rmse.flatMap((s) => s.points.map((p) => p[1]));
    const xScale = linearScale([Math.min(...xs), Math.max(...xs)],
                               [panelA.x, panelA.x + panelA.width]);
    const yScale = linearScale([Math.min(...ys, 0), Math.max(...ys)],
                               [panelA.y + panelA.height, panelA.y]);
    parts.push(
      svg.axes(panelA, xScale, yScale, "round", "validation RMSE"),
      drawSeries(rmse, xScale, yScale),
      svg.legend(panelA.x + 8, panelA.y + 12,
                 rmse.map((s, i) => [s.label, svg.PALETTE[i % svg.PALETTE.length]])),
      svg.text(panelA.x + panelA.width / 2, 24, "(a) training progress", "middle", 12),
    );
  }

  if (nmse.length > 0) {
    const ys = nmse.flatMap((s) => s.points.map((p) => p[1]));
    const xScale = linearScale([-0.5, values.length - 0.5],
                               [panelB.x, panelB.x + panelB.width]);
    const yScale = logScale([Math.min(...ys), Math.max(...ys)],
                            [panelB.y + panelB.height, panelB.y]);
    const tickLabels = new Map<number, string>(values.map((v, i) => [i, v]));
    const categorical = Object.assign((v: number) => xScale(v), {
      domain: xScale.domain,
      ticks: () => values.map((_, i) => i),
    });
    parts.push(
      svg.axes(panelB, categorical, yScale,
               SWEEP_LABELS[family] ?? "sweep value", "NMSE", tickLabels),
      drawSeries(nmse, xScale, yScale),
      svg.legend(panelB.x + 8, panelB.y + 12,
                 nmse.map((s, i) => [s.label, svg.PALETTE[i % svg.PALETTE.length]])),
      svg.text(panelB.x + panelB.width / 2, 24, "(b) estimation error", "middle", 12),
    );
  }

  return svg.document(890, 350, parts.join("\n"));
}

function renderNmseAll(table: Table): string {
  requireColumns(table, RESULT_COLUMNS);
  if (table.rows.length === 0) throw new Error("no data: CSV has no rows");
  const { values, series } = nmseByValue(table);
  if (series.length === 0) throw new Error("no data: nothing finite to plot");
  const panel: svg.Panel = { x: 70, y: 40, width: 360, height: 280 };
  const ys = series.flatMap((s) => s.points.map((p) => p[1]));
  const xScale = linearScale([-0.5, values.length - 0.5],
                             [panel.x, panel.x + panel.width]);
  const yScale = logScale([Math.min(...ys), Math.max(...ys)],
                          [panel.y + panel.height, panel.y]);
  const tickLabels = new Map<number, string>(values.map((v, i) => [i, v]));
  const categorical = Object.assign((v: number) => xScale(v), {
    domain: xScale.domain,
    ticks: () => values.map((_, i) => i),
  });
  const body = [
    svg.axes(panel, categorical, yScale, SWEEP_LABELS.fig_nmse_all, "NMSE", tickLabels),
    drawSeries(series, xScale, yScale),
    svg.legend(panel.x + panel.width - 90, panel.y + 12,
               series.map((s, i) => [s.label, svg.PALETTE[i % svg.PALETTE.length]])),
    svg.text(panel.x + panel.width / 2, 24, "estimator comparison", "middle", 12),
  ].join("\n");
  return svg.document(500, 370, body);
}

function renderOverhead(table: Table): string {
  requireColumns(table, ["scenario", "mode", "blocks", "symbols", "total_symbols"]);
  if (table.rows.length === 0) throw new Error("no data: CSV has no rows");
  const modes = [...new Set(table.rows.map((r) => r.mode))].sort();
  const series: Series[] = [];
  const terminals: [string, number][] = [];
  for (const mode of modes) {
    const rows = table.rows.filter((r) => r.mode === mode);
    const points = rows
      .map((r) => [Number(r.blocks), Number(r.symbols)] as [number, number])
      .filter(([, s]) => s > 0)
      .sort((p, q) => p[0] - q[0]);
    if (points.length === 0) continue;
    series.push({ label: mode, points });
    terminals.push([mode, Math.max(...rows.map((r) => Number(r.symbols)))]);
  }
  if (series.length === 0) throw new Error("no data: nothing finite to plot");

  const panel: svg.Panel = { x: 80, y: 40, width: 380, height: 280 };
  const xs = series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = series.flatMap((s) => s.points.map((p) => p[1]));
  const xScale = linearScale([0, Math.max(...xs)], [panel.x, panel.x + panel.width]);
  const yScale = logScale([Math.min(...ys), Math.max(...ys) * 1.5],
                          [panel.y + panel.height, panel.y]);
  const parts = [
    svg.axes(panel, xScale, yScale, "transmission blocks", "transmitted symbols"),
    drawSeries(series, xScale, yScale),
    svg.legend(panel.x + 8, panel.y + 12,
               series.map((s, i) => [s.label, svg.PALETTE[i % svg.PALETTE.length]])),
    svg.text(panel.x + panel.width / 2, 24, "model-training transmission overhead",
             "middle", 12),
  ];
  terminals.forEach(([mode, total], i) => {
    const last = series[i].points[series[i].points.length - 1];
    parts.push(svg.text(xScale(last[0]) - 4, yScale(last[1]) - 6,
                        `${mode}: ${formatCount(total)} symbols`, "end", 10));
  });
  return svg.document(520, 370, parts.join("\n"));
}

export function renderFigure(family: Family, csvText: string): string {
  const table = parseCsv(csvText);
  switch (family) {
    case "fig_users":
    case "fig_snrtheta":
    case "fig_zeta":
    case "fig_bits":
      return renderSweepPair(family, table);
    case "fig_nmse_all":
      return renderNmseAll(table);
    case "fig_overhead":
      return renderOverhead(table);
    default:
      throw new Error(`unknown figure family: ${family}`);
  }
}
