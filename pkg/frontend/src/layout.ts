/** Panel geometry and annotation placement in data coordinates.
 *
 * Everything here is pure arithmetic on the parsed CSVs, so the annotation
 * positions (scale bar, Batchelor circle, shell marker) can be verified
 * against the CSV grid headers without decoding pixels.
 */

import type { ShellSpectrum, SnapshotGrid, SpectrumLattice } from "./csv.js";

export interface PanelRect {
  x0: number;
  y0: number;
  width: number;
  height: number;
}

export interface FigureLayout {
  width: number;
  height: number;
  panels: [PanelRect, PanelRect, PanelRect];
}

/** Three equal square panels in a row: snapshot, spectrum, shell spectrum. */
export function threePanelLayout(panelSize = 360, margin = 20): FigureLayout {
  const panels = [0, 1, 2].map((i) => ({
    x0: margin + i * (panelSize + margin),
    y0: margin,
    width: panelSize,
    height: panelSize,
  })) as [PanelRect, PanelRect, PanelRect];
  return {
    width: 4 * margin + 3 * panelSize,
    height: 2 * margin + panelSize,
    panels,
  };
}

/** Scale bar length in torus units: the filamentation scale sqrt(kappa). */
export function scaleBarTorusLength(kappa: number): number {
  return Math.sqrt(kappa);
}

/** Batchelor annotation radius in mode units: 10 kappa^{-1/2}. */
export function batchelorRadius(kappa: number): number {
  return 10 / Math.sqrt(kappa);
}

export interface ScaleBar {
  /** Bar endpoints and vertical position, in pixels. */
  xStart: number;
  xEnd: number;
  y: number;
  /** Length in torus units (before clamping to the panel). */
  torusLength: number;
}

/** Red scale bar of length sqrt(kappa) torus units, near the panel's bottom-left.
 *
 * The snapshot grid samples [0, 1) at spacing x[1] - x[0]; the full panel
 * width therefore represents one torus period, independent of the sample
 * count, and a length of L torus units maps to L * panel.width pixels.
 */
export function snapshotScaleBar(
  grid: SnapshotGrid,
  kappa: number,
  panel: PanelRect,
): ScaleBar {
  if (grid.x.length < 2) {
    throw new Error("snapshot grid needs at least two columns");
  }
  const torusLength = scaleBarTorusLength(kappa);
  const pxPerUnit = panel.width;
  const inset = Math.round(0.05 * panel.width);
  const xStart = panel.x0 + inset;
  const xEnd = Math.min(xStart + torusLength * pxPerUnit, panel.x0 + panel.width - 1);
  return { xStart, xEnd, y: panel.y0 + panel.height - inset, torusLength };
}

export interface Circle {
  cx: number;
  cy: number;
  /** Radius in pixels. */
  r: number;
  /** Radius in mode units. */
  modeRadius: number;
}

/** Red circle of radius 10 kappa^{-1/2} modes, centred on the zero mode. */
export function spectrumCircle(
  lattice: SpectrumLattice,
  kappa: number,
  panel: PanelRect,
): Circle {
  const modeRadius = batchelorRadius(kappa);
  const n = 2 * lattice.kmax + 1;
  const pxPerMode = panel.width / n;
  return {
    cx: panel.x0 + (lattice.kmax + 0.5) * pxPerMode,
    cy: panel.y0 + (lattice.kmax + 0.5) * pxPerMode,
    r: modeRadius * pxPerMode,
    modeRadius,
  };
}

export interface VerticalLine {
  x: number;
  /** Marker position in shell-radius units. */
  radius: number;
  /** Whether the marker lies inside the plotted radius range. */
  visible: boolean;
}

/** log-log shell plot x-scale: maps radius >= 1 to panel pixels. */
export function shellXScale(shells: ShellSpectrum, panel: PanelRect) {
  const radii = shells.radius.filter((r) => r >= 1);
  if (radii.length === 0) {
    throw new Error("shell spectrum has no radii >= 1");
  }
  const lo = Math.log10(Math.min(...radii));
  const hi = Math.log10(Math.max(...radii));
  const span = hi > lo ? hi - lo : 1;
  return (r: number) => panel.x0 + ((Math.log10(r) - lo) / span) * panel.width;
}

/** Red vertical line at radius 10 kappa^{-1/2} on the log-log shell plot. */
export function shellMarker(
  shells: ShellSpectrum,
  kappa: number,
  panel: PanelRect,
): VerticalLine {
  const radius = batchelorRadius(kappa);
  const x = shellXScale(shells, panel)(radius);
  return {
    x,
    radius,
    visible: x >= panel.x0 && x <= panel.x0 + panel.width,
  };
}

export interface Annotations {
  scaleBar: ScaleBar | null;
  circle: Circle | null;
  marker: VerticalLine | null;
  warning: string | null;
}

/** All three annotations; kappa <= 0 yields none plus a warning message. */
export function figureAnnotations(
  snapshot: SnapshotGrid,
  spectrum: SpectrumLattice,
  shells: ShellSpectrum,
  kappa: number,
  layout: FigureLayout,
): Annotations {
  if (kappa <= 0) {
    return {
      scaleBar: null,
      circle: null,
      marker: null,
      warning: `kappa = ${kappa} <= 0: rendering without scale annotations`,
    };
  }
  return {
    scaleBar: snapshotScaleBar(snapshot, kappa, layout.panels[0]),
    circle: spectrumCircle(spectrum, kappa, layout.panels[1]),
    marker: shellMarker(shells, kappa, layout.panels[2]),
    warning: null,
  };
}
