#!/usr/bin/env node
/** figure-gen: render a three-panel mixing figure from exported CSVs.
 *
 *   figure-gen --snapshot a.csv --spectrum b.csv --shells c.csv \
 *              --kappa 0.01 --out fig.png
 */

import { readFileSync, writeFileSync } from "node:fs";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { parseShellCsv, parseSnapshotCsv, parseSpectrumCsv } from "./csv.js";
import { renderFigure } from "./render.js";

export function runCli(argv: string[], warn: (msg: string) => void = console.warn): number {
  const args = yargs(argv)
    .option("snapshot", { type: "string", demandOption: true, describe: "grid snapshot matrix CSV" })
    .option("spectrum", { type: "string", demandOption: true, describe: "spectrum heatmap CSV (k1,k2,log10_power)" })
    .option("shells", { type: "string", demandOption: true, describe: "shell spectrum CSV (radius,power)" })
    .option("kappa", { type: "number", demandOption: true, describe: "diffusivity for the scale annotations" })
    .option("out", { type: "string", demandOption: true, describe: "output PNG path" })
    .strict()
    .exitProcess(false)
    .parseSync();

  const snapshot = parseSnapshotCsv(readFileSync(args.snapshot, "utf-8"));
  const spectrum = parseSpectrumCsv(readFileSync(args.spectrum, "utf-8"));
  const shells = parseShellCsv(readFileSync(args.shells, "utf-8"));
  const result = renderFigure(snapshot, spectrum, shells, args.kappa);
  if (result.annotations.warning) {
    warn(result.annotations.warning);
  }
  writeFileSync(args.out, result.png);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  try {
    process.exit(runCli(hideBin(process.argv)));
  } catch (err) {
    console.error(err instanceof Error ? err.message : err);
    process.exit(1);
  }
}
