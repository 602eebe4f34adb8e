/** Markdown summary table of acceptance ratios and timings, row per report. */

import { RunReport } from "./csv.js";

function fmt(v: number | undefined, digits = 4): string {
  if (v === undefined || Number.isNaN(v)) return "-";
  return v.toFixed(digits);
}

export function renderReportTable(reports: RunReport[]): string {
  if (reports.length === 0) {
    throw new Error("renderReportTable: no reports");
  }
  const header = "| model | command | n | seed | outer accept | bridge accept | elapsed (s) |";
  const rule = "|---|---|---:|---:|---:|---:|---:|";
  const rows = reports.map((r) => {
    const outer = r.acceptance["outer"];
    const bridge = r.acceptance["bridge_pooled"];
    return `| ${r.model} | ${r.command} | ${Number.isNaN(r.n) ? "-" : r.n} | ${r.seed} | ${fmt(outer)} | ${fmt(bridge)} | ${r.elapsedSeconds.toFixed(1)} |`;
  });
  return [header, rule, ...rows].join("\n") + "\n";
}
