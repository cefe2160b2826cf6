/** plotview <kind> --in <path> --out <path.svg> [--snapshot K] [--title T]
 *
 * Renders one figure from persisted simulator outputs and writes a sidecar
 * JSON (<out>.json) carrying the fitted numbers.  Exit 0 on success, 1 on
 * any input/schema error; nothing is written on failure.
 */

import { writeFileSync } from "fs";

import { render } from "./render.js";
import type { FigureKind, FigureSpec } from "./types.js";

const KINDS: FigureKind[] = [
  "rate-loglog",
  "window-vs-time",
  "field-heatmap",
  "persistence-curve",
];

export function parseArgs(argv: string[]): FigureSpec {
  if (argv.length === 0) {
    throw new Error(`usage: plotview <${KINDS.join("|")}> --in <path> --out <path.svg>`);
  }
  const kind = argv[0] as FigureKind;
  if (!KINDS.includes(kind)) {
    throw new Error(`unknown figure kind "${argv[0]}"; expected one of ${KINDS.join(", ")}`);
  }
  let input: string | undefined;
  let output: string | undefined;
  let snapshot: number | undefined;
  let title: string | undefined;
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new Error(`flag ${flag} is missing its value`);
    }
    switch (flag) {
      case "--in":
        input = value;
        break;
      case "--out":
        output = value;
        break;
      case "--snapshot":
        snapshot = Number(value);
        if (!Number.isInteger(snapshot)) {
          throw new Error(`--snapshot expects an integer, got "${value}"`);
        }
        break;
      case "--title":
        title = value;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!input || !output) {
    throw new Error("--in and --out are both required");
  }
  return { kind, input, output, snapshot, title };
}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n`);
    return 1;
  }
  try {
    const { svg, sidecar } = render(spec);
    writeFileSync(spec.output, svg);
    writeFileSync(`${spec.output}.json`, JSON.stringify(sidecar, null, 2) + "\n");
    process.stdout.write(`${spec.output}\n`);
    return 0;
  } catch (err) {
    process.stderr.write(`plotview: ${(err as Error).message}\n`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");

if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
