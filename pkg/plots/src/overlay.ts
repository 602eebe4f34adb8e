/**
 * Density-overlay figures: one polyline per input histogram, rendered to a
 * self-contained SVG string.  Pure function of the input files; no
 * timestamps or random identifiers are embedded.
 */

import { Histogram } from "./csv.js";

export interface FigureSpec {
  inputs: Histogram[];
  labels: string[];
  title?: string;
  xRange?: [number, number];
  width?: number;
  height?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN = { top: 34, right: 16, bottom: 40, left: 56 };

function fmtTick(v: number): string {
  const a = Math.abs(v);
  if (a !== 0 && (a >= 1e4 || a < 1e-3)) return v.toExponential(1);
  return Number(v.toPrecision(4)).toString();
}

function ticks(lo: number, hi: number, n: number): number[] {
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const out: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) {
    out.push(v);
  }
  return out;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function plotDensityOverlay(spec: FigureSpec): string {
  if (spec.inputs.length === 0) {
    throw new Error("plotDensityOverlay: need at least one input histogram");
  }
  if (spec.labels.length !== spec.inputs.length) {
    throw new Error(
      `plotDensityOverlay: ${spec.inputs.length} inputs but ${spec.labels.length} labels`
    );
  }
  const width = spec.width ?? 720;
  const height = spec.height ?? 420;
  const innerW = width - MARGIN.left - MARGIN.right;
  const innerH = height - MARGIN.top - MARGIN.bottom;

  let xLo = Infinity;
  let xHi = -Infinity;
  let yHi = 0;
  for (const h of spec.inputs) {
    for (const b of h.bins) {
      xLo = Math.min(xLo, b.binLeft);
      xHi = Math.max(xHi, b.binRight);
      yHi = Math.max(yHi, b.density);
    }
  }
  if (spec.xRange) {
    [xLo, xHi] = spec.xRange;
  }
  if (!(xHi > xLo) || !(yHi > 0)) {
    throw new Error("plotDensityOverlay: degenerate data range");
  }
  yHi *= 1.06;

  const sx = (v: number) => MARGIN.left + ((v - xLo) / (xHi - xLo)) * innerW;
  const sy = (v: number) => MARGIN.top + innerH - (v / yHi) * innerH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (spec.title) {
    parts.push(
      `<text x="${width / 2}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">${esc(spec.title)}</text>`
    );
  }
  // axes
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + innerH;
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0 + innerW}" y2="${y0}" stroke="black"/>`);
  parts.push(`<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" stroke="black"/>`);
  for (const t of ticks(xLo, xHi, 8)) {
    const px = sx(t);
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 4}" stroke="black"/>`);
    parts.push(
      `<text x="${px}" y="${y0 + 16}" text-anchor="middle" font-family="sans-serif" font-size="10">${fmtTick(t)}</text>`
    );
  }
  for (const t of ticks(0, yHi, 6)) {
    const py = sy(t);
    parts.push(`<line x1="${x0 - 4}" y1="${py}" x2="${x0}" y2="${py}" stroke="black"/>`);
    parts.push(
      `<text x="${x0 - 7}" y="${py + 3}" text-anchor="end" font-family="sans-serif" font-size="10">${fmtTick(t)}</text>`
    );
  }

  // one step-midpoint polyline per histogram
  spec.inputs.forEach((h, i) => {
    const colour = PALETTE[i % PALETTE.length];
    const pts: string[] = [];
    for (const b of h.bins) {
      const mid = 0.5 * (b.binLeft + b.binRight);
      if (mid < xLo || mid > xHi) continue;
      pts.push(`${sx(mid).toFixed(2)},${sy(Math.min(b.density, yHi)).toFixed(2)}`);
    }
    parts.push(`<polyline points="${pts.join(" ")}" fill="none" stroke="${colour}" stroke-width="1.6"/>`);
    const ly = MARGIN.top + 14 + 16 * i;
    const lx = MARGIN.left + innerW - 170;
    parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${colour}" stroke-width="2"/>`);
    parts.push(
      `<text x="${lx + 28}" y="${ly}" font-family="sans-serif" font-size="11">${esc(spec.labels[i])}</text>`
    );
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
