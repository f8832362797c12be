/** Software rasterizer for the three-panel figure (no canvas dependency).
 *
 * Rendering is a pure function of the CSV contents: no timestamps, no
 * randomness, fixed colour maps, so re-rendering is byte-identical.
 */

import { PNG } from "pngjs";

import type { ShellSpectrum, SnapshotGrid, SpectrumLattice } from "./csv.js";
import {
  Annotations,
  FigureLayout,
  PanelRect,
  figureAnnotations,
  shellXScale,
  threePanelLayout,
} from "./layout.js";

const RED: Rgb = [214, 39, 40];
const AXIS: Rgb = [60, 60, 60];

type Rgb = [number, number, number];

export class Raster {
  readonly data: Uint8Array;
  /** When set, drawing is restricted to this panel. */
  clip: PanelRect | null = null;

  constructor(
    readonly width: number,
    readonly height: number,
  ) {
    this.data = new Uint8Array(width * height * 4).fill(255);
  }

  set(x: number, y: number, [r, g, b]: Rgb): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.width || yi >= this.height) {
      return;
    }
    if (
      this.clip &&
      (xi < this.clip.x0 || xi >= this.clip.x0 + this.clip.width ||
        yi < this.clip.y0 || yi >= this.clip.y0 + this.clip.height)
    ) {
      return;
    }
    const o = 4 * (yi * this.width + xi);
    this.data[o] = r;
    this.data[o + 1] = g;
    this.data[o + 2] = b;
    this.data[o + 3] = 255;
  }

  fillRect(x0: number, y0: number, w: number, h: number, c: Rgb): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) {
        this.set(x, y, c);
      }
    }
  }

  hLine(x0: number, x1: number, y: number, c: Rgb, thickness = 2): void {
    for (let t = 0; t < thickness; t++) {
      for (let x = Math.min(x0, x1); x <= Math.max(x0, x1); x++) {
        this.set(x, y + t, c);
      }
    }
  }

  vLine(x: number, y0: number, y1: number, c: Rgb, thickness = 2): void {
    for (let t = 0; t < thickness; t++) {
      for (let y = Math.min(y0, y1); y <= Math.max(y0, y1); y++) {
        this.set(x + t, y, c);
      }
    }
  }

  line(x0: number, y0: number, x1: number, y1: number, c: Rgb): void {
    const steps = Math.max(Math.abs(x1 - x0), Math.abs(y1 - y0), 1);
    for (let i = 0; i <= steps; i++) {
      this.set(x0 + ((x1 - x0) * i) / steps, y0 + ((y1 - y0) * i) / steps, c);
    }
  }

  circle(cx: number, cy: number, r: number, c: Rgb, thickness = 2): void {
    const steps = Math.max(64, Math.ceil(4 * Math.PI * r));
    for (let i = 0; i < steps; i++) {
      const a = (2 * Math.PI * i) / steps;
      for (let t = 0; t < thickness; t++) {
        this.set(cx + (r + t * 0.5) * Math.cos(a), cy + (r + t * 0.5) * Math.sin(a), c);
      }
    }
  }

  frame(p: PanelRect): void {
    this.hLine(p.x0, p.x0 + p.width - 1, p.y0, AXIS, 1);
    this.hLine(p.x0, p.x0 + p.width - 1, p.y0 + p.height - 1, AXIS, 1);
    this.vLine(p.x0, p.y0, p.y0 + p.height - 1, AXIS, 1);
    this.vLine(p.x0 + p.width - 1, p.y0, p.y0 + p.height - 1, AXIS, 1);
  }
}

/** Symmetric blue-white-red map on [-1, 1]. */
export function divergingColor(v: number): Rgb {
  const t = Math.max(-1, Math.min(1, v));
  if (t < 0) {
    const u = 1 + t;
    return [Math.round(255 * (0.23 + 0.77 * u)), Math.round(255 * (0.3 + 0.7 * u)), 255];
  }
  const u = 1 - t;
  return [255, Math.round(255 * (0.19 + 0.81 * u)), Math.round(255 * (0.19 + 0.81 * u))];
}

/** Sequential dark-to-yellow map on [0, 1] for log power. */
export function sequentialColor(t0: number): Rgb {
  const t = Math.max(0, Math.min(1, t0));
  return [
    Math.round(255 * Math.min(1, 0.2 + 1.3 * t)),
    Math.round(255 * (0.05 + 0.85 * t)),
    Math.round(255 * (0.35 + 0.25 * t - 0.55 * t * t)),
  ];
}

function drawSnapshot(img: Raster, grid: SnapshotGrid, p: PanelRect): void {
  let vmax = 0;
  for (const row of grid.values) {
    for (const v of row) {
      vmax = Math.max(vmax, Math.abs(v));
    }
  }
  const ny = grid.values.length;
  const nx = grid.x.length;
  for (let py = 0; py < p.height; py++) {
    // y increases upward in torus coordinates; raster rows go down
    const iy = Math.min(ny - 1, Math.floor(((p.height - 1 - py) / p.height) * ny));
    for (let px = 0; px < p.width; px++) {
      const ix = Math.min(nx - 1, Math.floor((px / p.width) * nx));
      const v = vmax > 0 ? grid.values[iy][ix] / vmax : 0;
      img.set(p.x0 + px, p.y0 + py, divergingColor(v));
    }
  }
}

function drawSpectrum(img: Raster, lattice: SpectrumLattice, p: PanelRect): void {
  const n = 2 * lattice.kmax + 1;
  let hi = -Infinity;
  for (const row of lattice.logPower) {
    for (const v of row) {
      if (Number.isFinite(v)) {
        hi = Math.max(hi, v);
      }
    }
  }
  const lo = hi - 12; // 12 decades of dynamic range
  for (let py = 0; py < p.height; py++) {
    const i2 = Math.min(n - 1, Math.floor(((p.height - 1 - py) / p.height) * n));
    for (let px = 0; px < p.width; px++) {
      const i1 = Math.min(n - 1, Math.floor((px / p.width) * n));
      const v = lattice.logPower[i1][i2];
      const t = Number.isFinite(v) ? (v - lo) / (hi - lo) : 0;
      img.set(p.x0 + px, p.y0 + py, sequentialColor(t));
    }
  }
}

function drawShells(img: Raster, shells: ShellSpectrum, p: PanelRect): void {
  const pts: Array<[number, number]> = [];
  for (let i = 0; i < shells.radius.length; i++) {
    if (shells.radius[i] >= 1 && shells.power[i] > 0) {
      pts.push([shells.radius[i], Math.log10(shells.power[i])]);
    }
  }
  if (pts.length === 0) {
    return;
  }
  const xScale = shellXScale(shells, p);
  const ys = pts.map(([, v]) => v);
  const yLo = Math.min(...ys);
  const yHi = Math.max(...ys);
  const ySpan = yHi > yLo ? yHi - yLo : 1;
  const yPix = (v: number) =>
    p.y0 + (1 - (v - yLo) / ySpan) * (p.height - 20) + 10;
  for (let i = 1; i < pts.length; i++) {
    img.line(xScale(pts[i - 1][0]), yPix(pts[i - 1][1]), xScale(pts[i][0]), yPix(pts[i][1]), AXIS);
  }
  for (const [r, v] of pts) {
    img.fillRect(Math.round(xScale(r)) - 1, Math.round(yPix(v)) - 1, 3, 3, AXIS);
  }
}

export interface RenderResult {
  png: Buffer;
  layout: FigureLayout;
  annotations: Annotations;
}

export function renderFigure(
  snapshot: SnapshotGrid,
  spectrum: SpectrumLattice,
  shells: ShellSpectrum,
  kappa: number,
  layout: FigureLayout = threePanelLayout(),
): RenderResult {
  const img = new Raster(layout.width, layout.height);
  const [p1, p2, p3] = layout.panels;
  drawSnapshot(img, snapshot, p1);
  drawSpectrum(img, spectrum, p2);
  drawShells(img, shells, p3);
  const ann = figureAnnotations(snapshot, spectrum, shells, kappa, layout);
  if (ann.scaleBar) {
    img.clip = p1;
    img.hLine(ann.scaleBar.xStart, ann.scaleBar.xEnd, ann.scaleBar.y, RED, 3);
  }
  if (ann.circle) {
    img.clip = p2;
    img.circle(ann.circle.cx, ann.circle.cy, ann.circle.r, RED);
  }
  if (ann.marker && ann.marker.visible) {
    img.clip = p3;
    img.vLine(ann.marker.x, p3.y0, p3.y0 + p3.height - 1, RED);
  }
  img.clip = null;
  for (const p of layout.panels) {
    img.frame(p);
  }
  const png = new PNG({ width: layout.width, height: layout.height });
  img.data.forEach((v, i) => {
    png.data[i] = v;
  });
  return { png: PNG.sync.write(png), layout, annotations: ann };
}
