#!/usr/bin/env node
// CLI: `render --kind {mse-n|thresholds|mse-k|tracking} --in results.csv --out fig.svg`
// and `rank-hist --in ranks.csv [--in more.csv] --out hist.svg [--true-r R]`.
// Exit code 2 flags usage or input errors.

import { FigureKind, render, renderRankHistogram } from "./figures.js";

const USAGE = `usage:
  structcov-plots render --kind {mse-n|thresholds|mse-k|tracking} --in <csv> --out <svg>
                         [--x-scale auto|linear|log] [--y-scale auto|linear|log]
                         [--title T] [--x-label X] [--y-label Y]
  structcov-plots rank-hist --in <csv> [--in <csv> ...] --out <svg> [--true-r R] [--title T]`;

interface Args {
  command: string;
  flags: Map<string, string[]>;
}

function parseArgs(argv: string[]): Args {
  if (argv.length === 0) {
    throw new Error(USAGE);
  }
  const [command, ...rest] = argv;
  const flags = new Map<string, string[]>();
  for (let i = 0; i < rest.length; i += 2) {
    const key = rest[i];
    const value = rest[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`bad argument '${key}'\n${USAGE}`);
    }
    const name = key.slice(2);
    flags.set(name, [...(flags.get(name) ?? []), value]);
  }
  return { command, flags };
}

function single(args: Args, name: string, required = true): string | undefined {
  const values = args.flags.get(name);
  if (!values) {
    if (required) {
      throw new Error(`missing --${name}\n${USAGE}`);
    }
    return undefined;
  }
  if (values.length !== 1) {
    throw new Error(`--${name} given ${values.length} times`);
  }
  return values[0];
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    if (args.command === "render") {
      const kind = single(args, "kind")!;
      const valid: FigureKind[] = ["mse-n", "thresholds", "mse-k", "tracking"];
      if (!valid.includes(kind as FigureKind)) {
        throw new Error(`--kind must be one of ${valid.join("|")}`);
      }
      const scale = (v: string | undefined) => {
        if (v === undefined) return undefined;
        if (v !== "auto" && v !== "linear" && v !== "log") {
          throw new Error(`scale must be auto|linear|log, got '${v}'`);
        }
        return v;
      };
      render({
        kind: kind as FigureKind,
        input: single(args, "in")!,
        output: single(args, "out")!,
        xScale: scale(single(args, "x-scale", false)),
        yScale: scale(single(args, "y-scale", false)),
        title: single(args, "title", false),
        xLabel: single(args, "x-label", false),
        yLabel: single(args, "y-label", false),
      });
      return 0;
    }
    if (args.command === "rank-hist") {
      const inputs = args.flags.get("in");
      if (!inputs || inputs.length === 0) {
        throw new Error(`missing --in\n${USAGE}`);
      }
      const trueR = single(args, "true-r", false);
      renderRankHistogram({
        inputs,
        output: single(args, "out")!,
        trueR: trueR === undefined ? undefined : Number(trueR),
        title: single(args, "title", false),
      });
      return 0;
    }
    throw new Error(`unknown command '${args.command}'\n${USAGE}`);
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
}

// invoke only when run as a script, not when imported by tests
if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
