/**
 * Readers for the histogram CSV and report JSON emitted by the simulator CLI.
 * Schemas are validated eagerly; errors name the offending column or key.
 */

import { readFileSync } from "node:fs";

export interface HistogramBin {
  binLeft: number;
  binRight: number;
  density: number;
}

export interface Histogram {
  path: string;
  bins: HistogramBin[];
}

const HISTOGRAM_COLUMNS = ["bin_left", "bin_right", "density"] as const;

export function parseHistogramCsv(path: string): Histogram {
  const text = readFileSync(path, "utf-8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new Error(`${path}: empty histogram`);
  }
  const header = lines[0].split(",");
  for (const col of HISTOGRAM_COLUMNS) {
    if (!header.includes(col)) {
      throw new Error(`${path}: missing column '${col}' (header: ${lines[0]})`);
    }
  }
  const idx = HISTOGRAM_COLUMNS.map((c) => header.indexOf(c));
  const bins: HistogramBin[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    const [l, r, d] = idx.map((j) => Number(parts[j]));
    if (!Number.isFinite(l) || !Number.isFinite(r) || !Number.isFinite(d)) {
      throw new Error(`${path}:${i + 1}: non-numeric histogram row`);
    }
    bins.push({ binLeft: l, binRight: r, density: d });
  }
  return { path, bins };
}

export interface RunReport {
  path: string;
  command: string;
  model: string;
  n: number;
  seed: number;
  elapsedSeconds: number;
  acceptance: Record<string, number>;
  dt?: number;
}

function pick(obj: Record<string, unknown>, key: string, path: string): unknown {
  if (!(key in obj)) {
    throw new Error(`${path}: missing key '${key}'`);
  }
  return obj[key];
}

export function parseReportJson(path: string): RunReport {
  const raw = JSON.parse(readFileSync(path, "utf-8")) as Record<string, unknown>;
  const config = pick(raw, "config", path) as Record<string, unknown>;
  const command = String(pick(raw, "command", path));
  const report: RunReport = {
    path,
    command,
    model: String(config["model"] ?? "-"),
    n: Number(config["n"] ?? NaN),
    seed: Number(pick(raw, "seed", path)),
    elapsedSeconds: Number(pick(raw, "elapsed_seconds", path)),
    acceptance: {},
  };
  if (command === "exact") {
    const acc = pick(raw, "acceptance", path) as Record<string, unknown>;
    for (const key of ["outer", "bridge_pooled"]) {
      const v = Number(pick(acc, key, `${path} (acceptance)`));
      report.acceptance[key] = v;
    }
    if ("bridge_per_point" in acc) {
      report.acceptance["bridge_per_point"] = Number(acc["bridge_per_point"]);
    }
  }
  if ("dt" in raw) {
    report.dt = Number(raw["dt"]);
  }
  return report;
}
