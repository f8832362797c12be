/** Parsers for the three figure-data CSV formats exported by the simulation CLI. */

import Papa from "papaparse";

export class MissingColumnError extends Error {
  constructor(public readonly column: string, file: string) {
    super(`missing column "${column}" in ${file}`);
    this.name = "MissingColumnError";
  }
}

/** Grid snapshot matrix: header "y\x,<x coords>", one row per y line. */
export interface SnapshotGrid {
  x: number[];
  y: number[];
  /** values[iy][ix], physical-space scalar samples. */
  values: number[][];
}

/** Spectrum heatmap rows (k1, k2, log10_power) reassembled on the mode lattice. */
export interface SpectrumLattice {
  kmax: number;
  /** logPower[i1][i2] with index k + kmax. */
  logPower: number[][];
}

export interface ShellSpectrum {
  radius: number[];
  power: number[];
}

function parseRows(text: string): string[][] {
  const out = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (out.errors.length > 0) {
    throw new Error(`CSV parse error: ${out.errors[0].message}`);
  }
  return out.data;
}

export function parseSnapshotCsv(text: string): SnapshotGrid {
  const rows = parseRows(text);
  if (rows.length < 2 || rows[0][0] !== "y\\x") {
    throw new MissingColumnError("y\\x", "snapshot CSV");
  }
  const x = rows[0].slice(1).map(Number);
  const y: number[] = [];
  const values: number[][] = [];
  for (const row of rows.slice(1)) {
    if (row.length !== x.length + 1) {
      throw new Error(
        `snapshot row for y=${row[0]} has ${row.length - 1} values, expected ${x.length}`,
      );
    }
    y.push(Number(row[0]));
    values.push(row.slice(1).map(Number));
  }
  if (x.some(Number.isNaN) || y.some(Number.isNaN)) {
    throw new Error("snapshot CSV has non-numeric coordinates");
  }
  return { x, y, values };
}

function columnIndex(header: string[], name: string, file: string): number {
  const i = header.indexOf(name);
  if (i < 0) {
    throw new MissingColumnError(name, file);
  }
  return i;
}

export function parseSpectrumCsv(text: string): SpectrumLattice {
  const rows = parseRows(text);
  const header = rows[0];
  const c1 = columnIndex(header, "k1", "spectrum CSV");
  const c2 = columnIndex(header, "k2", "spectrum CSV");
  const cp = columnIndex(header, "log10_power", "spectrum CSV");
  const body = rows.slice(1).map((r) => [Number(r[c1]), Number(r[c2]), Number(r[cp])]);
  const kmax = Math.max(...body.map(([k1, k2]) => Math.max(Math.abs(k1), Math.abs(k2))));
  const n = 2 * kmax + 1;
  const logPower = Array.from({ length: n }, () => new Array<number>(n).fill(-Infinity));
  for (const [k1, k2, p] of body) {
    logPower[k1 + kmax][k2 + kmax] = p;
  }
  return { kmax, logPower };
}

export function parseShellCsv(text: string): ShellSpectrum {
  const rows = parseRows(text);
  const header = rows[0];
  const cr = columnIndex(header, "radius", "shell CSV");
  const cp = columnIndex(header, "power", "shell CSV");
  const radius: number[] = [];
  const power: number[] = [];
  for (const row of rows.slice(1)) {
    radius.push(Number(row[cr]));
    power.push(Number(row[cp]));
  }
  return { radius, power };
}
