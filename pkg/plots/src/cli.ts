/**
 * Standalone renderer for simulator outputs.
 *
 *   overlay --out fig.svg [--title T] [--x-lo a --x-hi b] file.csv:Label ...
 *   table report.json [report.json ...]
 *
 * Overlay inputs are histogram CSVs written by the simulator; the table
 * command prints markdown to stdout.
 */

import { writeFileSync } from "node:fs";
import { parseHistogramCsv, parseReportJson } from "./csv.js";
import { FigureSpec, plotDensityOverlay } from "./overlay.js";
import { renderReportTable } from "./table.js";

function usage(): never {
  console.error(
    "usage: cli overlay --out FILE [--title T] [--x-lo A --x-hi B] INPUT.csv:LABEL...\n" +
      "       cli table REPORT.json..."
  );
  process.exit(2);
}

export function runOverlay(args: string[]): number {
  let out: string | undefined;
  let title: string | undefined;
  let xLo: number | undefined;
  let xHi: number | undefined;
  const inputs: string[] = [];
  for (let i = 0; i < args.length; i++) {
    const a = args[i];
    if (a === "--out") out = args[++i];
    else if (a === "--title") title = args[++i];
    else if (a === "--x-lo") xLo = Number(args[++i]);
    else if (a === "--x-hi") xHi = Number(args[++i]);
    else if (a.startsWith("--")) usage();
    else inputs.push(a);
  }
  if (!out || inputs.length === 0) usage();
  const spec: FigureSpec = {
    inputs: [],
    labels: [],
    title,
    xRange: xLo !== undefined && xHi !== undefined ? [xLo, xHi] : undefined,
  };
  for (const item of inputs) {
    const sep = item.lastIndexOf(":");
    const path = sep > 1 ? item.slice(0, sep) : item;
    const label = sep > 1 ? item.slice(sep + 1) : path;
    spec.inputs.push(parseHistogramCsv(path));
    spec.labels.push(label);
  }
  writeFileSync(out, plotDensityOverlay(spec), "utf-8");
  console.error(`wrote ${out}`);
  return 0;
}

export function runTable(args: string[]): number {
  if (args.length === 0) usage();
  const reports = args.map(parseReportJson);
  process.stdout.write(renderReportTable(reports));
  return 0;
}

export function main(argv: string[]): number {
  const [cmd, ...rest] = argv;
  try {
    if (cmd === "overlay") return runOverlay(rest);
    if (cmd === "table") return runTable(rest);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  usage();
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
