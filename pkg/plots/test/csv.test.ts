import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { parseHistogramCsv, parseReportJson } from "../src/csv.js";

const FIX = fileURLToPath(new URL("./fixtures", import.meta.url));

describe("parseHistogramCsv", () => {
  it("reads the simulator histogram schema", () => {
    const h = parseHistogramCsv(join(FIX, "exact_run", "histogram.csv"));
    expect(h.bins.length).toBe(40);
    for (const b of h.bins) {
      expect(b.binRight).toBeGreaterThan(b.binLeft);
      expect(b.density).toBeGreaterThanOrEqual(0);
    }
    // densities integrate to ~1 over the covered range
    const mass = h.bins.reduce((s, b) => s + b.density * (b.binRight - b.binLeft), 0);
    expect(mass).toBeGreaterThan(0.95);
    expect(mass).toBeLessThanOrEqual(1.0 + 1e-9);
  });

  it("names the missing column", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "bin_left,bin_right,count\n0,1,3\n");
    expect(() => parseHistogramCsv(bad)).toThrow(/missing column 'density'/);
  });

  it("rejects non-numeric rows", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "bin_left,bin_right,density\n0,1,x\n");
    expect(() => parseHistogramCsv(bad)).toThrow(/non-numeric/);
  });
});

describe("parseReportJson", () => {
  it("extracts acceptance ratios from an exact run", () => {
    const r = parseReportJson(join(FIX, "exact_run", "report.json"));
    expect(r.command).toBe("exact");
    expect(r.model).toBe("example1");
    expect(r.acceptance["outer"]).toBeGreaterThan(0);
    expect(r.acceptance["bridge_pooled"]).toBeGreaterThan(0);
    expect(r.elapsedSeconds).toBeGreaterThan(0);
  });

  it("handles euler reports without acceptance blocks", () => {
    const r = parseReportJson(join(FIX, "euler_run", "report.json"));
    expect(r.command).toBe("euler");
    expect(r.dt).toBe(0.01);
  });

  it("names a missing key", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const bad = join(dir, "report.json");
    writeFileSync(bad, JSON.stringify({ command: "exact", config: {}, seed: 1 }));
    expect(() => parseReportJson(bad)).toThrow(/missing key 'elapsed_seconds'/);
  });
});
