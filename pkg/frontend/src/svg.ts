/** Hand-built SVG primitives; pure string assembly keeps output byte-stable. */

import { Scale, formatTick } from "./scales.js";

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

export interface Panel {
  x: number;
  y: number;
  width: number;
  height: number;
}

const fmt = (v: number) => v.toFixed(2);

export function polyline(points: [number, number][], color: string, dashed = false): string {
  const attr = dashed ? ' stroke-dasharray="5,3"' : "";
  const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return `<polyline fill="none" stroke="${color}" stroke-width="1.5"${attr} points="${path}"/>`;
}

export function marker(x: number, y: number, color: string): string {
  return `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="2.5" fill="${color}"/>`;
}

export function text(
  x: number,
  y: number,
  content: string,
  anchor: "start" | "middle" | "end" = "start",
  size = 11,
  rotate = 0,
): string {
  const transform = rotate !== 0 ? ` transform="rotate(${rotate} ${fmt(x)} ${fmt(y)})"` : "";
  return (
    `<text x="${fmt(x)}" y="${fmt(y)}" font-family="Helvetica,sans-serif" ` +
    `font-size="${size}" text-anchor="${anchor}"${transform}>${escapeXml(content)}</text>`
  );
}

export function escapeXml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export function axes(
  panel: Panel,
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string,
  xTickLabels?: Map<number, string>,
): string {
  const parts: string[] = [];
  const x0 = panel.x;
  const y0 = panel.y + panel.height;
  parts.push(
    `<line x1="${fmt(x0)}" y1="${fmt(y0)}" x2="${fmt(panel.x + panel.width)}" y2="${fmt(y0)}" stroke="#000"/>`,
    `<line x1="${fmt(x0)}" y1="${fmt(panel.y)}" x2="${fmt(x0)}" y2="${fmt(y0)}" stroke="#000"/>`,
  );
  for (const tick of xScale.ticks()) {
    const px = xScale(tick);
    if (px < panel.x - 0.5 || px > panel.x + panel.width + 0.5) continue;
    const label = xTickLabels?.get(tick) ?? formatTick(tick);
    parts.push(
      `<line x1="${fmt(px)}" y1="${fmt(y0)}" x2="${fmt(px)}" y2="${fmt(y0 + 4)}" stroke="#000"/>`,
      text(px, y0 + 16, label, "middle", 10),
    );
  }
  for (const tick of yScale.ticks()) {
    const py = yScale(tick);
    if (py < panel.y - 0.5 || py > panel.y + panel.height + 0.5) continue;
    parts.push(
      `<line x1="${fmt(x0 - 4)}" y1="${fmt(py)}" x2="${fmt(x0)}" y2="${fmt(py)}" stroke="#000"/>`,
      text(x0 - 7, py + 3, formatTick(tick), "end", 10),
      `<line x1="${fmt(x0)}" y1="${fmt(py)}" x2="${fmt(panel.x + panel.width)}" y2="${fmt(py)}" stroke="#eee"/>`,
    );
  }
  parts.push(
    text(panel.x + panel.width / 2, y0 + 32, xLabel, "middle"),
    text(panel.x - 42, panel.y + panel.height / 2, yLabel, "middle", 11, -90),
  );
  return parts.join("\n");
}

export function legend(x: number, y: number, entries: [string, string][]): string {
  const parts: string[] = [];
  entries.forEach(([label, color], i) => {
    const yy = y + i * 16;
    parts.push(
      `<line x1="${fmt(x)}" y1="${fmt(yy)}" x2="${fmt(x + 18)}" y2="${fmt(yy)}" stroke="${color}" stroke-width="1.5"/>`,
      text(x + 23, yy + 3.5, label, "start", 10),
    );
  });
  return parts.join("\n");
}

export function document(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}">\n` +
    `<rect width="${width}" height="${height}" fill="#ffffff"/>\n` +
    body +
    "\n</svg>\n"
  );
}
