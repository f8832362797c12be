"""On-disk output formats: NDJSON series, PGM snapshots, figure-data CSVs.

The figure-data CSVs are the contract consumed by the figure renderer:

* grid snapshot matrix CSV -- first cell ``y\\x``, first row the x coordinates,
  first column the y coordinates, body the field values (2D only);
* spectrum heatmap CSV -- columns ``k1,k2,log10_power`` over the mode lattice;
* shell spectrum CSV -- columns ``radius,power``.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .diagnostics import power_spectrum
from .spectral import GridField, SpectralField, to_physical

LOG10_FLOOR = -300.0


def write_ndjson(records, path):
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


def read_ndjson(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_pgm(g: GridField, path):
    """16-bit big-endian P5 image of a 2D grid field.

    Values are mapped affinely from [-max|f|, max|f|] to [0, 65535], so zero
    lands mid-gray and the map is sign-symmetric.
    """
    if g.dimension != 2:
        raise ValueError("PGM export is defined for 2D fields")
    v = np.asarray(g.values, dtype=float)
    vmax = np.abs(v).max()
    scale = 0.0 if vmax == 0 else 65535.0 / (2.0 * vmax)
    pix = np.rint((v + vmax) * scale).astype(">u2") if vmax else \
        np.full(v.shape, 32768, dtype=">u2")
    # rows of the image are y lines; v is indexed [x, y]
    pix = pix.T[::-1]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{pix.shape[1]} {pix.shape[0]}\n65535\n".encode())
        fh.write(pix.tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a P5 PGM file")
    w, h = (int(x) for x in parts[1].split())
    maxval = int(parts[2])
    pix = np.frombuffer(parts[3], dtype=">u2").reshape(h, w)
    return pix, maxval


def write_grid_matrix_csv(g: GridField, path):
    """Field samples as a matrix with coordinate headers (2D)."""
    if g.dimension != 2:
        raise ValueError("grid matrix CSV is defined for 2D fields")
    M = g.size
    coords = np.arange(M) / M
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([r"y\x"] + [repr(float(x)) for x in coords])
        for iy in range(M):
            w.writerow([repr(float(coords[iy]))]
                       + [repr(float(g.values[ix, iy])) for ix in range(M)])


def write_spectrum_heatmap_csv(f: SpectralField, path):
    """log10 power on the 2D mode lattice as k1,k2,log10_power rows."""
    if f.dimension != 2:
        raise ValueError("spectrum heatmap CSV is defined for 2D fields")
    N = f.cutoff
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k1", "k2", "log10_power"])
        for k1 in range(-N, N + 1):
            for k2 in range(-N, N + 1):
                p = abs(f.coeffs[k1 + N, k2 + N]) ** 2
                lg = np.log10(p) if p > 0 else LOG10_FLOOR
                w.writerow([k1, k2, repr(float(lg))])


def write_shell_spectrum_csv(f: SpectralField, path):
    prof = power_spectrum(f)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["radius", "power"])
        for r, p in zip(prof.radii, prof.power):
            w.writerow([int(r), repr(float(p))])


def export_figure_data(f: SpectralField, out_prefix, grid_size=None):
    """Write the three figure CSVs for one snapshot; returns their paths."""
    from .stepping import simulation_grid_size

    M = grid_size or simulation_grid_size(f.cutoff)
    paths = {
        "snapshot": f"{out_prefix}_snapshot.csv",
        "spectrum": f"{out_prefix}_spectrum.csv",
        "shells": f"{out_prefix}_shells.csv",
    }
    write_grid_matrix_csv(to_physical(f, M), paths["snapshot"])
    write_spectrum_heatmap_csv(f, paths["spectrum"])
    write_shell_spectrum_csv(f, paths["shells"])
    return paths
