/**
 * Strict reader for the simulator's aggregate CSV
 * (scheme,n,k,trials,se_mean,se_stderr,ee_mean,ee_stderr,p_total_mean,failed).
 */

export interface AggregateRow {
  scheme: string;
  n: number;
  k: number;
  trials: number;
  seMean: number;
  seStderr: number;
  eeMean: number;
  eeStderr: number;
  pTotalMean: number;
  failed: number;
}

const REQUIRED = [
  "scheme",
  "n",
  "k",
  "trials",
  "se_mean",
  "se_stderr",
  "ee_mean",
  "ee_stderr",
  "p_total_mean",
  "failed",
] as const;

export class CsvSchemaError extends Error {}
export class EmptyInputError extends Error {}

function parseNumber(raw: string, column: string, line: number): number {
  const v = Number(raw);
  if (raw === "" || Number.isNaN(v)) {
    throw new CsvSchemaError(
      `line ${line}: column '${column}' is not numeric (got '${raw}')`,
    );
  }
  return v;
}

/** Parse aggregate CSV text. `source` names the file in error messages. */
export function parseAggregateCsv(text: string, source: string): AggregateRow[] {
  const lines = text
    .split(/\r?\n/)
    .filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new EmptyInputError(`${source}: file is empty`);
  }
  const header = lines[0].split(",").map((h) => h.trim());
  for (const col of REQUIRED) {
    if (!header.includes(col)) {
      throw new CsvSchemaError(`${source}: missing required column '${col}'`);
    }
  }
  if (lines.length === 1) {
    throw new EmptyInputError(`${source}: no data rows (header only)`);
  }
  const idx = new Map(header.map((h, i) => [h, i]));
  const rows: AggregateRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new CsvSchemaError(
        `${source}: line ${i + 1} has ${cells.length} cells, expected ${header.length}`,
      );
    }
    const get = (col: string) => cells[idx.get(col)!];
    rows.push({
      scheme: get("scheme"),
      n: parseNumber(get("n"), "n", i + 1),
      k: parseNumber(get("k"), "k", i + 1),
      trials: parseNumber(get("trials"), "trials", i + 1),
      seMean: parseNumber(get("se_mean"), "se_mean", i + 1),
      seStderr: parseNumber(get("se_stderr"), "se_stderr", i + 1),
      eeMean: parseNumber(get("ee_mean"), "ee_mean", i + 1),
      eeStderr: parseNumber(get("ee_stderr"), "ee_stderr", i + 1),
      pTotalMean: parseNumber(get("p_total_mean"), "p_total_mean", i + 1),
      failed: parseNumber(get("failed"), "failed", i + 1),
    });
  }
  return rows;
}

/** Group rows per scheme, sorted by k within each scheme. */
export function groupByScheme(rows: AggregateRow[]): Map<string, AggregateRow[]> {
  const out = new Map<string, AggregateRow[]>();
  for (const row of rows) {
    const list = out.get(row.scheme) ?? [];
    list.push(row);
    out.set(row.scheme, list);
  }
  for (const list of out.values()) {
    list.sort((a, b) => a.k - b.k);
  }
  return out;
}
