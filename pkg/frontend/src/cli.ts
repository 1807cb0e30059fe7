#!/usr/bin/env node
/**
 * Render figures from ifnsim CLI outputs.
 *
 * Usage:
 *   node dist/cli.js --kind waveform|pair|stdp|pavlov --in DIR --out DIR [--vtp VOLTS]
 *
 * Writes <out>/<kind>.svg and <out>/<kind>.png. For the pair figure the
 * measured over-threshold window is printed to stdout (the same number that
 * appears in the figure legend).
 */
import path from "node:path";
import process from "node:process";
import { parseArgs } from "node:util";

import { FigureKind, renderFigure } from "./figures.js";

const KINDS: FigureKind[] = ["waveform", "pair", "stdp", "pavlov"];

function main(): number {
  const { values } = parseArgs({
    options: {
      kind: { type: "string" },
      in: { type: "string" },
      out: { type: "string" },
      vtp: { type: "string" },
    },
  });
  const kind = values.kind as FigureKind | undefined;
  if (!kind || !KINDS.includes(kind) || !values.in || !values.out) {
    console.error(`usage: cli --kind ${KINDS.join("|")} --in DIR --out DIR [--vtp VOLTS]`);
    return 2;
  }
  const result = renderFigure({
    kind,
    inputDir: values.in,
    outBase: path.join(values.out, kind),
    vTp: values.vtp === undefined ? undefined : Number(values.vtp),
  });
  if (result.windowSeconds !== undefined) {
    console.log(`over-threshold window: ${result.windowSeconds} s`);
  }
  console.log(`wrote ${result.svgPath} and ${result.pngPath}`);
  return 0;
}

try {
  process.exitCode = main();
} catch (err) {
  console.error(`error: ${(err as Error).message}`);
  process.exitCode = 1;
}
