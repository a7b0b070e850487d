// The four benchmark figures plus the rank-histogram diagnostic, rendered
// straight from the result CSVs. Inputs are never modified; rendering is a
// pure function of the parsed rows, so reruns are byte-identical.

import { readFileSync, writeFileSync } from "node:fs";

import { MseRow, RankRow, parseMseCsv, parseRankCsv } from "./csv.js";
import { Scale, Svg, fmt, linearScale, logScale } from "./svg.js";

export type FigureKind = "mse-n" | "thresholds" | "mse-k" | "tracking";

export interface FigureSpec {
  input: string;
  kind: FigureKind;
  output: string;
  xScale?: "auto" | "linear" | "log";
  yScale?: "auto" | "linear" | "log";
  title?: string;
  xLabel?: string;
  yLabel?: string;
}

const KIND_TO_EXPERIMENT: Record<FigureKind, string> = {
  "mse-n": "mse_vs_n",
  thresholds: "thresholds",
  "mse-k": "mse_vs_k",
  tracking: "tracking",
};

const DEFAULT_LABELS: Record<FigureKind, { x: string; y: string; title: string }> = {
  "mse-n": { x: "samples per group n", y: "MSE", title: "MSE vs n" },
  thresholds: { x: "samples per group n", y: "MSE", title: "Thresholding rules" },
  "mse-k": { x: "number of groups K", y: "MSE / K", title: "Marginal MSE vs K" },
  tracking: { x: "block index", y: "MSE", title: "Tracking MSE" },
};

// overlay curves drawn dashed, without error bars
const DASHED = new Set(["crb", "prediction"]);

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { left: 64, right: 168, top: 36, bottom: 48 };

interface Series {
  name: string;
  dashed: boolean;
  color: string;
  points: Array<{ x: number; y: number; se: number }>;
}

function collectSeries(rows: MseRow[]): Series[] {
  const names = [...new Set(rows.map((r) => r.estimator))].sort();
  return names.map((name, i) => {
    const points = rows
      .filter((r) => r.estimator === name)
      .sort((a, b) => a.grid - b.grid)
      .map((r) => ({ x: r.grid, y: r.mse, se: r.stderr }));
    return { name, dashed: DASHED.has(name), color: PALETTE[i % PALETTE.length], points };
  });
}

function pickScale(
  requested: "auto" | "linear" | "log",
  lo: number,
  hi: number,
  rLo: number,
  rHi: number,
): Scale {
  const wide = lo > 0 && hi / lo > 10;
  const useLog = requested === "log" || (requested === "auto" && wide);
  return useLog ? logScale(lo, hi, rLo, rHi) : linearScale(lo, hi, rLo, rHi);
}

function tickLabel(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 1e4 || Math.abs(v) < 1e-3)) {
    return v.toExponential(0).replace("+", "");
  }
  return fmt(v);
}

function drawAxes(svg: Svg, xs: Scale, ys: Scale, labels: { x: string; y: string; title: string }): void {
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  svg.line(x0, y0, x1, y0, "#000");
  svg.line(x0, y0, x0, y1, "#000");
  for (const t of xs.ticks()) {
    const px = xs.map(t);
    svg.line(px, y0, px, y0 + 4, "#000");
    svg.line(px, y0, px, y1, "#eee");
    svg.text(px, y0 + 16, tickLabel(t), { anchor: "middle" });
  }
  for (const t of ys.ticks()) {
    const py = ys.map(t);
    svg.line(x0 - 4, py, x0, py, "#000");
    svg.line(x0, py, x1, py, "#eee");
    svg.text(x0 - 6, py + 3, tickLabel(t), { anchor: "end" });
  }
  svg.text((x0 + x1) / 2, HEIGHT - 12, labels.x, { anchor: "middle", size: 12 });
  svg.text(16, (y0 + y1) / 2, labels.y, { anchor: "middle", size: 12, rotate: true });
  svg.text((x0 + x1) / 2, 20, labels.title, { anchor: "middle", size: 14 });
}

function drawLegend(svg: Svg, series: Series[]): void {
  const x = WIDTH - MARGIN.right + 12;
  let y = MARGIN.top + 8;
  for (const s of series) {
    svg.line(x, y - 4, x + 22, y - 4, s.color, 1.5, s.dashed ? "5,3" : "");
    svg.text(x + 28, y, s.name, { size: 11 });
    y += 16;
  }
}

export function render(spec: FigureSpec): string {
  const rows = parseMseCsv(readFileSync(spec.input, "utf8"), spec.input);
  const expected = KIND_TO_EXPERIMENT[spec.kind];
  if (expected === undefined) {
    throw new Error(`unknown figure kind '${spec.kind}'`);
  }
  const experiments = [...new Set(rows.map((r) => r.experiment))];
  if (experiments.length !== 1 || experiments[0] !== expected) {
    throw new Error(
      `${spec.input}: experiment column [${experiments.join(", ")}] does not match kind '${spec.kind}' (${expected})`,
    );
  }

  const series = collectSeries(rows);
  const xs = rows.map((r) => r.grid);
  const ysLo = rows.map((r) => Math.max(r.mse - r.stderr, Number.MIN_VALUE));
  const ysHi = rows.map((r) => r.mse + r.stderr);
  const xScale = pickScale(
    spec.xScale ?? (spec.kind === "tracking" ? "linear" : "auto"),
    Math.min(...xs),
    Math.max(...xs),
    MARGIN.left,
    WIDTH - MARGIN.right,
  );
  const yScale = pickScale(
    spec.yScale ?? "auto",
    Math.min(...ysLo),
    Math.max(...ysHi),
    HEIGHT - MARGIN.bottom,
    MARGIN.top,
  );

  const labels = { ...DEFAULT_LABELS[spec.kind] };
  if (spec.title !== undefined) labels.title = spec.title;
  if (spec.xLabel !== undefined) labels.x = spec.xLabel;
  if (spec.yLabel !== undefined) labels.y = spec.yLabel;

  const svg = new Svg(WIDTH, HEIGHT);
  drawAxes(svg, xScale, yScale, labels);
  for (const s of series) {
    svg.polyline(
      s.points.map((p) => [xScale.map(p.x), yScale.map(p.y)]),
      s.color,
      s.dashed ? "5,3" : "",
    );
    for (const p of s.points) {
      const px = xScale.map(p.x);
      if (!s.dashed) {
        svg.circle(px, yScale.map(p.y), 2, s.color);
      }
      if (p.se > 0 && !s.dashed) {
        const yLo = yScale.map(Math.max(p.y - p.se, Number.MIN_VALUE));
        const yHi = yScale.map(p.y + p.se);
        svg.line(px, yLo, px, yHi, s.color);
        svg.line(px - 3, yLo, px + 3, yLo, s.color);
        svg.line(px - 3, yHi, px + 3, yHi, s.color);
      }
    }
  }
  drawLegend(svg, series);

  const out = svg.toString();
  writeFileSync(spec.output, out);
  return out;
}

export interface RankHistogramSpec {
  inputs: string[];
  output: string;
  trueR?: number;
  title?: string;
}

export function renderRankHistogram(spec: RankHistogramSpec): string {
  const rows: RankRow[] = spec.inputs.flatMap((path) =>
    parseRankCsv(readFileSync(path, "utf8"), path),
  );
  if (rows.length === 0) {
    throw new Error("rank histogram: no counts in the input files");
  }

  const grids = [...new Set(rows.map((r) => r.grid))].sort((a, b) => a - b);
  const rules = [...new Set(rows.map((r) => r.estimator))].sort();
  const rMax = Math.max(...rows.map((r) => r.rHat), spec.trueR ?? 0);
  const rValues = Array.from({ length: rMax + 1 }, (_, i) => i);

  const panelH = 160;
  const height = MARGIN.top + grids.length * panelH + MARGIN.bottom;
  const svg = new Svg(WIDTH, height);
  svg.text(
    (MARGIN.left + WIDTH - MARGIN.right) / 2,
    20,
    spec.title ?? "rank estimates per rule",
    { anchor: "middle", size: 14 },
  );

  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const slot = (x1 - x0) / rValues.length;
  const bar = (slot * 0.8) / rules.length;

  grids.forEach((grid, gi) => {
    const top = MARGIN.top + gi * panelH;
    const bottom = top + panelH - 36;
    const counts = new Map<string, number>();
    let maxCount = 1;
    for (const r of rows) {
      if (r.grid !== grid) continue;
      counts.set(`${r.estimator}:${r.rHat}`, r.count);
      maxCount = Math.max(maxCount, r.count);
    }
    svg.line(x0, bottom, x1, bottom, "#000");
    svg.text(x1, top + 10, `grid = ${fmt(grid)}`, { anchor: "end", size: 11 });
    rValues.forEach((r, ri) => {
      const cx = x0 + slot * (ri + 0.5);
      svg.text(cx, bottom + 14, String(r), { anchor: "middle" });
      rules.forEach((rule, qi) => {
        const c = counts.get(`${rule}:${r}`) ?? 0;
        if (c === 0) return;
        const h = ((bottom - top - 16) * c) / maxCount;
        const bx = cx - (bar * rules.length) / 2 + qi * bar;
        svg.rect(bx, bottom - h, bar, h, PALETTE[qi % PALETTE.length]);
      });
    });
    if (spec.trueR !== undefined) {
      const cx = x0 + slot * (spec.trueR + 0.5);
      svg.line(cx, top + 4, cx, bottom, "#000", 1, "3,3");
      svg.text(cx, top + 14, "true r", { anchor: "middle", size: 10 });
    }
  });

  const legendX = WIDTH - MARGIN.right + 12;
  rules.forEach((rule, qi) => {
    const y = MARGIN.top + 8 + qi * 16;
    svg.rect(legendX, y - 9, 12, 10, PALETTE[qi % PALETTE.length]);
    svg.text(legendX + 18, y, rule, { size: 11 });
  });
  svg.text((x0 + x1) / 2, height - 12, "estimated rank", { anchor: "middle", size: 12 });

  const out = svg.toString();
  writeFileSync(spec.output, out);
  return out;
}
