"""Truncated Fourier representation of mean-free real scalar fields on T^d.

Fields are stored on the full integer cube [-N, N]^d minus the origin, with
Hermitian symmetry coeff(-k) = conj(coeff(k)) kept explicitly.  The Fourier
convention is f_hat_k = int f(x) exp(-2 pi i k.x) dx, so on an M-point grid
the forward transform carries the 1/M^d factor and coefficients equal the
analytic ones of a band-limited field.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

SYMMETRY_ATOL = 1e-12


class FieldError(ValueError):
    pass


def _lattice_size(cutoff):
    return 2 * cutoff + 1


def mode_components(dimension, cutoff):
    """Integer wavenumber arrays, one per axis, each of shape (2N+1,)*d."""
    ks = np.arange(-cutoff, cutoff + 1)
    return np.meshgrid(*([ks] * dimension), indexing="ij")


def mode_norm_sq(dimension, cutoff):
    comps = mode_components(dimension, cutoff)
    out = np.zeros((_lattice_size(cutoff),) * dimension)
    for c in comps:
        out += c.astype(float) ** 2
    return out


@dataclass
class SpectralField:
    """Fourier coefficients of a mean-free real scalar field, truncated at |k_i| <= N."""

    dimension: int
    cutoff: int
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise FieldError(f"dimension must be 2 or 3, got {self.dimension}")
        if self.cutoff < 1:
            raise FieldError(f"cutoff must be >= 1, got {self.cutoff}")
        shape = (_lattice_size(self.cutoff),) * self.dimension
        if self.coeffs.shape != shape:
            raise FieldError(f"coeff array has shape {self.coeffs.shape}, expected {shape}")

    # -- indexing ---------------------------------------------------------
    def _idx(self, k):
        if len(k) != self.dimension:
            raise FieldError(f"mode index {k} does not match dimension {self.dimension}")
        if any(abs(c) > self.cutoff for c in k):
            raise FieldError(f"mode {k} outside cube of cutoff {self.cutoff}")
        return tuple(c + self.cutoff for c in k)

    def get(self, k):
        return complex(self.coeffs[self._idx(k)])

    def set(self, k, value):
        """Assign a coefficient and its Hermitian mirror.  The zero mode stays zero."""
        if all(c == 0 for c in k):
            return
        self.coeffs[self._idx(k)] = value
        self.coeffs[self._idx(tuple(-c for c in k))] = np.conj(value)

    def copy(self):
        return SpectralField(self.dimension, self.cutoff, self.coeffs.copy(), self.time)

    # -- validity ---------------------------------------------------------
    def validate(self):
        if not np.all(np.isfinite(self.coeffs)):
            raise FieldError("non-finite coefficients")
        zero = (self.cutoff,) * self.dimension
        if self.coeffs[zero] != 0:
            raise FieldError("zero mode is not zero")
        mirrored = np.conj(np.flip(self.coeffs))
        err = np.max(np.abs(self.coeffs - mirrored))
        if err > SYMMETRY_ATOL:
            raise FieldError(f"Hermitian symmetry violated by {err:.3e}")
        return True

    def is_valid(self):
        try:
            return self.validate()
        except FieldError:
            return False


@dataclass
class GridField:
    """Real samples of a field on the uniform M^d grid of the torus."""

    dimension: int
    values: np.ndarray
    time: float = 0.0

    @property
    def size(self):
        return self.values.shape[0]

    def l2_norm(self):
        """Grid L2 norm, normalized so it matches the continuum L2 norm."""
        return float(np.sqrt(np.mean(self.values.astype(float) ** 2)))


def zeros(dimension, cutoff):
    shape = (_lattice_size(cutoff),) * dimension
    return SpectralField(dimension, cutoff, np.zeros(shape, dtype=complex))


def new_field(dimension, cutoff, assignment):
    """Build a field from coefficients given on half-lattice representatives.

    ``assignment`` maps mode tuples to complex values.  Each value is mirrored
    to the opposite mode with conjugation; the zero mode is forced to 0.
    Conflicting assignments of a +-k pair are rejected.
    """
    if cutoff < 1:
        raise FieldError(f"cutoff must be >= 1, got {cutoff}")
    f = zeros(dimension, cutoff)
    seen = {}
    for k, v in assignment.items():
        v = complex(v)
        if not np.isfinite(v):
            raise FieldError(f"non-finite coefficient at {k}")
        if all(c == 0 for c in k):
            continue
        pair = max(tuple(k), tuple(-c for c in k))
        want = v if pair == tuple(k) else np.conj(v)
        if pair in seen and abs(seen[pair] - want) > SYMMETRY_ATOL:
            raise FieldError(f"conflicting assignment for mode pair {pair}")
        seen[pair] = want
        f.set(k, v)
    return f


def random_shell_field(dimension, cutoff, radius, rng, norm=1.0):
    """Random Hermitian field supported on the shell round(|k|) == radius, L2 norm ``norm``."""
    f = zeros(dimension, cutoff)
    r = np.sqrt(mode_norm_sq(dimension, cutoff))
    mask = np.round(r).astype(int) == int(radius)
    mask[(cutoff,) * dimension] = False
    vals = rng.standard_normal(f.coeffs.shape) + 1j * rng.standard_normal(f.coeffs.shape)
    f.coeffs[mask] = vals[mask]
    _hermitize(f.coeffs)
    f.coeffs[(cutoff,) * dimension] = 0.0
    n = sobolev_norm(f, 0.0)
    if n == 0:
        raise FieldError(f"no modes on shell {radius} for cutoff {cutoff}")
    f.coeffs *= norm / n
    return f


def cos_x_field(dimension, cutoff):
    """The preset initial condition 2 cos(2 pi x), i.e. f_hat_{+-e_1} = 1."""
    k = (1,) + (0,) * (dimension - 1)
    return new_field(dimension, cutoff, {k: 1.0})


def _hermitize(coeffs):
    coeffs += np.conj(np.flip(coeffs))
    coeffs *= 0.5


def sobolev_norm(f, s):
    """H^s norm: ( sum_{k != 0} |f_hat_k|^2 |k|^{2s} )^{1/2}."""
    ksq = mode_norm_sq(f.dimension, f.cutoff)
    power = np.abs(f.coeffs) ** 2
    mask = ksq > 0
    if s == 0:
        return float(np.sqrt(power[mask].sum()))
    return float(np.sqrt((power[mask] * ksq[mask] ** s).sum()))


def project_low_modes(f):
    """Keep exactly the modes with |k|^2 == 1 (4 modes in 2D, 6 in 3D)."""
    g = f.copy()
    g.coeffs[mode_norm_sq(f.dimension, f.cutoff) != 1.0] = 0.0
    return g


def project_ball(f, radius):
    """Keep the modes with |k| <= radius (the approximant construction)."""
    g = f.copy()
    g.coeffs[mode_norm_sq(f.dimension, f.cutoff) > radius**2] = 0.0
    return g


def to_physical(f, grid_size, allow_aliasing=False):
    """Inverse DFT onto an M^d grid.  Lossless for M >= 2N+1."""
    M = int(grid_size)
    if M < 2 * f.cutoff + 1 and not allow_aliasing:
        raise FieldError(
            f"grid size {M} < 2N+1 = {2 * f.cutoff + 1}; pass allow_aliasing=True to fold modes"
        )
    big = np.zeros((M,) * f.dimension, dtype=complex)
    comps = mode_components(f.dimension, f.cutoff)
    idx = tuple(np.mod(c, M) for c in comps)
    np.add.at(big, idx, f.coeffs)
    vals = sfft.ifftn(big) * (M**f.dimension)
    return GridField(f.dimension, np.ascontiguousarray(vals.real), f.time)


def to_spectral(g, cutoff, allow_aliasing=False):
    """Forward DFT, truncating to the cube |k_i| <= N.  Requires M >= 2N+1."""
    M = g.size
    if M < 2 * cutoff + 1 and not allow_aliasing:
        raise FieldError(f"grid size {M} < 2N+1 = {2 * cutoff + 1} aliases the cube")
    big = sfft.fftn(g.values) / (M**g.dimension)
    comps = mode_components(g.dimension, cutoff)
    idx = tuple(np.mod(c, M) for c in comps)
    coeffs = np.ascontiguousarray(big[idx])
    _hermitize(coeffs)
    coeffs[(cutoff,) * g.dimension] = 0.0
    return SpectralField(g.dimension, cutoff, coeffs, g.time)


# -- canonical half-lattice CSV serialization -----------------------------

def canonical_modes(dimension, cutoff):
    """Half-lattice representatives: first nonzero component positive."""
    ks = np.arange(-cutoff, cutoff + 1)
    out = []
    for k in np.stack([c.ravel() for c in mode_components(dimension, cutoff)], axis=1):
        k = tuple(int(c) for c in k)
        nz = next((c for c in k if c != 0), 0)
        if nz > 0:
            out.append(k)
    return out


def write_csv(f, path):
    cols = [f"k{i + 1}" for i in range(f.dimension)] + ["re", "im"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for k in canonical_modes(f.dimension, f.cutoff):
            c = f.get(k)
            w.writerow(list(k) + [repr(c.real), repr(c.imag)])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    dimension = len(header) - 2
    modes = {}
    for row in rows[1:]:
        k = tuple(int(x) for x in row[:dimension])
        modes[k] = float(row[dimension]) + 1j * float(row[dimension + 1])
    cutoff = max(abs(c) for k in modes for c in k)
    return new_field(dimension, cutoff, modes)
