// Deterministic SVG assembly: figures are built from fixed-format strings,
// so identical inputs produce byte-identical files on every run.

export function fmt(x: number): string {
  if (!Number.isFinite(x)) {
    throw new Error(`cannot format non-finite coordinate ${x}`);
  }
  const rounded = Number(x.toPrecision(6));
  return Object.is(rounded, -0) ? "0" : String(rounded);
}

export type Scale = {
  map: (v: number) => number;
  ticks: () => number[];
  kind: "linear" | "log";
};

export function linearScale(lo: number, hi: number, rLo: number, rHi: number): Scale {
  const span = hi - lo || 1;
  return {
    kind: "linear",
    map: (v) => rLo + ((v - lo) / span) * (rHi - rLo),
    ticks: () => linearTicks(lo, hi),
  };
}

export function logScale(lo: number, hi: number, rLo: number, rHi: number): Scale {
  if (lo <= 0 || hi <= 0) {
    throw new Error("log scale needs strictly positive data");
  }
  const a = Math.log10(lo);
  const span = Math.log10(hi) - a || 1;
  return {
    kind: "log",
    map: (v) => rLo + ((Math.log10(v) - a) / span) * (rHi - rLo),
    ticks: () => logTicks(lo, hi),
  };
}

function linearTicks(lo: number, hi: number): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / 4)));
  const mult = span / step > 20 ? 5 : span / step > 8 ? 2 : 1;
  const s = step * mult;
  const first = Math.ceil(lo / s) * s;
  const out: number[] = [];
  for (let v = first; v <= hi + 1e-9 * s; v += s) {
    out.push(Number(v.toPrecision(10)));
  }
  return out;
}

function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e++) {
    for (const m of [1, 2, 5]) {
      const v = m * Math.pow(10, e);
      if (v >= lo * 0.999 && v <= hi * 1.001) {
        out.push(v);
      }
    }
  }
  return out;
}

export class Svg {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${width}" height="${height}" fill="white"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${width}"${d}/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, dash = ""): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="1.5"${d}/>`,
    );
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`,
    );
  }

  text(x: number, y: number, content: string, opts: { size?: number; anchor?: string; rotate?: boolean } = {}): void {
    const size = opts.size ?? 11;
    const anchor = opts.anchor ?? "start";
    const transform = opts.rotate ? ` transform="rotate(-90 ${fmt(x)} ${fmt(y)})"` : "";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" text-anchor="${anchor}"${transform}>` +
        `${escapeXml(content)}</text>`,
    );
  }

  toString(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
