#!/usr/bin/env node
import { render } from "./figure.js";
import { FIGURE_KINDS, FigureKind, ValidationError } from "./types.js";

const USAGE = `usage: sgpip-plots render --csv <path> --kind <figure_kind> --out <path>

figure kinds: ${FIGURE_KINDS.join(", ")}
exit codes: 0 success, 2 validation/usage error`;

function parseArgs(argv: string[]): { csv: string; kind: string; out: string } {
  if (argv[0] !== "render") {
    throw new ValidationError(`unknown command "${argv[0] ?? ""}"\n${USAGE}`);
  }
  const options = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new ValidationError(`malformed arguments near "${flag}"\n${USAGE}`);
    }
    options.set(flag.slice(2), value);
  }
  const csv = options.get("csv");
  const kind = options.get("kind");
  const out = options.get("out");
  if (!csv || !kind || !out) {
    throw new ValidationError(`--csv, --kind and --out are all required\n${USAGE}`);
  }
  return { csv, kind, out };
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    render({ csvPath: args.csv, figureKind: args.kind as FigureKind, outputPath: args.out });
    return 0;
  } catch (err) {
    if (err instanceof ValidationError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
