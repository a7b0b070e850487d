// Strict readers for the benchmark result CSVs. Both schemas are plain
// comma-separated files without quoting, so a split-based parser is exact.

export interface MseRow {
  experiment: string;
  estimator: string;
  grid: number;
  mse: number;
  stderr: number;
  trials: number;
}

export interface RankRow {
  experiment: string;
  estimator: string;
  grid: number;
  rHat: number;
  count: number;
}

const MSE_COLUMNS = ["experiment", "estimator", "grid", "mse", "stderr", "trials"];
const RANK_COLUMNS = ["experiment", "estimator", "grid", "r_hat", "count"];

function splitCsv(text: string, path: string): string[][] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: empty CSV`);
  }
  return lines.map((line) => line.split(","));
}

function columnIndex(header: string[], required: string[], path: string): Map<string, number> {
  const index = new Map<string, number>();
  for (const name of required) {
    const at = header.indexOf(name);
    if (at < 0) {
      throw new Error(`${path}: missing required column '${name}'`);
    }
    index.set(name, at);
  }
  return index;
}

function toNumber(raw: string, column: string, path: string): number {
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new Error(`${path}: non-numeric value '${raw}' in column '${column}'`);
  }
  return value;
}

export function parseMseCsv(text: string, path: string): MseRow[] {
  const [header, ...body] = splitCsv(text, path);
  const at = columnIndex(header, MSE_COLUMNS, path);
  const rows = body.map((cells) => ({
    experiment: cells[at.get("experiment")!],
    estimator: cells[at.get("estimator")!],
    grid: toNumber(cells[at.get("grid")!], "grid", path),
    mse: toNumber(cells[at.get("mse")!], "mse", path),
    stderr: toNumber(cells[at.get("stderr")!], "stderr", path),
    trials: toNumber(cells[at.get("trials")!], "trials", path),
  }));
  if (rows.length === 0) {
    throw new Error(`${path}: no data rows`);
  }
  return rows;
}

export function parseRankCsv(text: string, path: string): RankRow[] {
  const [header, ...body] = splitCsv(text, path);
  const at = columnIndex(header, RANK_COLUMNS, path);
  return body.map((cells) => ({
    experiment: cells[at.get("experiment")!],
    estimator: cells[at.get("estimator")!],
    grid: toNumber(cells[at.get("grid")!], "grid", path),
    rHat: toNumber(cells[at.get("r_hat")!], "r_hat", path),
    count: toNumber(cells[at.get("count")!], "count", path),
  }));
}
