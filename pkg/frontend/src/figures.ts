/** SE-vs-K and EE-vs-K figure rendering from aggregate CSV files. */

import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { join } from "node:path";

import { AggregateRow, groupByScheme, parseAggregateCsv } from "./csv.js";
import { renderLineChart, Series } from "./svg.js";

export interface FigureSpec {
  inputPath: string;
  outDir: string;
  errorBars?: boolean;
  /** Restrict / order the plotted schemes; default: all, sorted by name. */
  schemes?: string[];
}

function loadRows(spec: FigureSpec): Map<string, AggregateRow[]> {
  const text = readFileSync(spec.inputPath, "utf8");
  const grouped = groupByScheme(parseAggregateCsv(text, spec.inputPath));
  if (spec.schemes === undefined) {
    return new Map([...grouped.entries()].sort(([a], [b]) => a.localeCompare(b)));
  }
  const out = new Map<string, AggregateRow[]>();
  for (const name of spec.schemes) {
    const rows = grouped.get(name);
    if (rows === undefined) {
      throw new Error(`${spec.inputPath}: scheme '${name}' not present in CSV`);
    }
    out.set(name, rows);
  }
  return out;
}

function toSeries(
  grouped: Map<string, AggregateRow[]>,
  value: (r: AggregateRow) => number,
  err: (r: AggregateRow) => number,
): Series[] {
  return [...grouped.entries()].map(([name, rows]) => ({
    name,
    points: rows.map((r) => ({ x: r.k, y: value(r), err: err(r) })),
  }));
}

export function renderSeFigure(spec: FigureSpec): string {
  const series = toSeries(loadRows(spec), (r) => r.seMean, (r) => r.seStderr);
  const svg = renderLineChart(series, {
    title: "Spectral efficiency vs. active elements",
    xLabel: "Active elements / relay antennas K",
    yLabel: "Mean SE (bits/s/Hz)",
    errorBars: spec.errorBars,
  });
  mkdirSync(spec.outDir, { recursive: true });
  const path = join(spec.outDir, "se_vs_k.svg");
  writeFileSync(path, svg);
  return path;
}

export function renderEeFigure(spec: FigureSpec): string {
  const series = toSeries(loadRows(spec), (r) => r.eeMean, (r) => r.eeStderr);
  const svg = renderLineChart(series, {
    title: "Energy efficiency vs. active elements",
    xLabel: "Active elements / relay antennas K",
    yLabel: "Mean EE (bits/joule)",
    errorBars: spec.errorBars,
  });
  mkdirSync(spec.outDir, { recursive: true });
  const path = join(spec.outDir, "ee_vs_k.svg");
  writeFileSync(path, svg);
  return path;
}
