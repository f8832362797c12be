import { describe, expect, it } from "vitest";

import type { ShellSpectrum, SnapshotGrid, SpectrumLattice } from "../src/csv.js";
import {
  batchelorRadius,
  figureAnnotations,
  scaleBarTorusLength,
  shellMarker,
  snapshotScaleBar,
  spectrumCircle,
  threePanelLayout,
} from "../src/layout.js";

function grid(n: number): SnapshotGrid {
  const coords = Array.from({ length: n }, (_, i) => i / n);
  return { x: coords, y: coords, values: coords.map(() => coords.map(() => 0)) };
}

function lattice(kmax: number): SpectrumLattice {
  const n = 2 * kmax + 1;
  return { kmax, logPower: Array.from({ length: n }, () => new Array(n).fill(-1)) };
}

function shells(maxRadius: number): ShellSpectrum {
  const radius = Array.from({ length: maxRadius + 1 }, (_, i) => i);
  return { radius, power: radius.map((r) => Math.exp(-r)) };
}

describe("layout", () => {
  it("places three equal panels left to right", () => {
    const fig = threePanelLayout(100, 10);
    expect(fig.width).toBe(340);
    expect(fig.height).toBe(120);
    expect(fig.panels.map((p) => p.x0)).toEqual([10, 120, 230]);
    expect(new Set(fig.panels.map((p) => p.width))).toEqual(new Set([100]));
  });
});

describe("annotation formulas", () => {
  it("kappa=0.04: scale bar 0.2 torus units, circle radius 50 modes", () => {
    expect(scaleBarTorusLength(0.04)).toBeCloseTo(0.2, 12);
    expect(batchelorRadius(0.04)).toBeCloseTo(50, 12);
  });

  it("kappa=1: scale bar the full width, circle radius 10 modes", () => {
    expect(scaleBarTorusLength(1)).toBeCloseTo(1.0, 12);
    expect(batchelorRadius(1)).toBeCloseTo(10, 12);
  });
});

describe("data-coordinate placement", () => {
  const fig = threePanelLayout(360, 20);

  it("scale bar pixel length matches torus units times panel width", () => {
    // the grid header spans one torus period regardless of sample count
    for (const n of [32, 273]) {
      const bar = snapshotScaleBar(grid(n), 0.04, fig.panels[0]);
      expect(bar.torusLength).toBeCloseTo(0.2, 12);
      expect(bar.xEnd - bar.xStart).toBeCloseTo(0.2 * 360, 6);
    }
  });

  it("circle is centred on the zero mode with radius in lattice units", () => {
    const lat = lattice(64); // header range -64..64 -> 129 cells
    const c = spectrumCircle(lat, 0.04, fig.panels[1]);
    const pxPerMode = 360 / 129;
    expect(c.modeRadius).toBeCloseTo(50, 12);
    expect(c.r).toBeCloseTo(50 * pxPerMode, 9);
    expect(c.cx).toBeCloseTo(fig.panels[1].x0 + 64.5 * pxPerMode, 9);
  });

  it("shell marker interpolates the log radius axis", () => {
    const s = shells(100); // log axis spans radius 1..100
    const m = shellMarker(s, 0.04, fig.panels[2]);
    expect(m.radius).toBeCloseTo(50, 12);
    const frac = Math.log10(50) / Math.log10(100);
    expect(m.x).toBeCloseTo(fig.panels[2].x0 + frac * 360, 9);
    expect(m.visible).toBe(true);
  });

  it("marker outside the plotted range is flagged invisible", () => {
    const m = shellMarker(shells(8), 0.0025, threePanelLayout().panels[2]);
    expect(m.radius).toBeCloseTo(200, 9);
    expect(m.visible).toBe(false);
  });
});

describe("kappa <= 0", () => {
  it("yields no annotations and a warning", () => {
    const fig = threePanelLayout();
    for (const kappa of [0, -0.5]) {
      const ann = figureAnnotations(grid(8), lattice(4), shells(8), kappa, fig);
      expect(ann.scaleBar).toBeNull();
      expect(ann.circle).toBeNull();
      expect(ann.marker).toBeNull();
      expect(ann.warning).toMatch(/without scale annotations/);
    }
  });
});
