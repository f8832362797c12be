"""The 4-mode (2D) and 12-mode (3D) white-in-time shear velocity models.

Encodes the Fourier-space drift and noise-coupling coefficients of the
advection-diffusion SPDE for these models, and the structural objects of the
low-mode analysis: the inner-mode vector X, the neighbor vector Y and the
noise matrix A(Y) with dX = -gamma X dt + pi A(Y) dW.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralField, project_low_modes, sobolev_norm

TWO_PI_SQ = (2.0 * np.pi) ** 2

# Modes with |k|^2 = 1, ordered to match the X coordinates.
INNER_MODES = {
    2: [(1, 0), (0, 1)],
    3: [(1, 0, 0), (0, 1, 0), (0, 0, 1)],
}

# Pairs (k_minus, k_plus) whose sum/difference define Y_{4j+1..4j+4}.
NEIGHBOR_PAIRS = {
    2: [((1, -1), (1, 1))],
    3: [((1, -1, 0), (1, 1, 0)), ((1, 0, -1), (1, 0, 1)), ((0, 1, -1), (0, 1, 1))],
}


@dataclass(frozen=True)
class ModelSpec:
    """Model parameters: dimension fixes the velocity field (4 or 12 shears)."""

    dimension: int
    kappa: float
    cutoff: int

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.dimension}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.cutoff < 1:
            raise ValueError(f"cutoff must be >= 1, got {self.cutoff}")

    @property
    def noise_count(self):
        return 4 if self.dimension == 2 else 12

    @property
    def stratonovich_constant(self):
        """The 1/2 (2D) resp. 1 (3D) in the Ito drift prefactor."""
        return 0.5 if self.dimension == 2 else 1.0

    @property
    def drift_prefactor(self):
        """gamma / |k|^2 = (2 pi)^2 (c + kappa) with c = 1/2 (2D) or 1 (3D)."""
        return TWO_PI_SQ * (self.stratonovich_constant + self.kappa)


def drift_coefficient(spec, k):
    """Ito drift multiplier of f_hat_k: -(2 pi)^2 (c + kappa) |k|^2."""
    if all(c == 0 for c in k):
        raise ValueError("drift coefficient undefined for the zero mode")
    return -spec.drift_prefactor * float(sum(c * c for c in k))


# (shift axis, weight axis) per noise index, 0-based axes.  The noise term
# for dW^i at mode k reads pi * w_k * (f_hat_{k - e_a} - f_hat_{k + e_a}) for
# odd i and -i pi * w_k * (f_hat_{k - e_a} + f_hat_{k + e_a}) for even i,
# where a = shift axis and w_k = k[weight axis].
_STENCIL_AXES = {
    2: [(1, 0), (0, 1)],
    3: [(1, 0), (0, 1), (2, 0), (0, 2), (2, 1), (1, 2)],
}


def stencil_axes(dimension, i):
    """Map 1-based noise index i to (shift_axis, weight_axis, is_cosine)."""
    pair = _STENCIL_AXES[dimension][(i - 1) // 2]
    return pair[0], pair[1], (i % 2 == 0)


def coupling_stencil(spec, k, i):
    """Neighbor modes and complex weights multiplying dW^i in d f_hat_k.

    Returns a list of ((neighbor mode), weight); zero-weight entries are
    dropped.  Neighbors outside the truncation cube are still listed; the
    integrator reads absent modes as zero.
    """
    if not 1 <= i <= spec.noise_count:
        raise ValueError(f"noise index {i} out of range for dimension {spec.dimension}")
    axis, waxis, cosine = stencil_axes(spec.dimension, i)
    w = np.pi * k[waxis]
    if w == 0:
        return []
    lo = tuple(c - (1 if j == axis else 0) for j, c in enumerate(k))
    hi = tuple(c + (1 if j == axis else 0) for j, c in enumerate(k))
    if cosine:
        return [(lo, -1j * w), (hi, -1j * w)]
    return [(lo, w), (hi, -w)]


def extract_XY(f: SpectralField):
    """Real inner-mode vector X and neighbor vector Y of the low-mode SDE."""
    X = []
    for k in INNER_MODES[f.dimension]:
        c = f.get(k)
        X.extend([c.real, c.imag])
    Y = []
    for km, kp in NEIGHBOR_PAIRS[f.dimension]:
        a, b = f.get(km), f.get(kp)
        Y.extend([(a + b).real, (a + b).imag, (a - b).real, (a - b).imag])
    return np.array(X), np.array(Y)


def build_noise_matrix(Y):
    """The matrix A(Y) of the inner-mode SDE dX = -gamma X dt + pi A dW."""
    Y = np.asarray(Y, dtype=float)
    if Y.shape == (4,):
        y1, y2, y3, y4 = Y
        return np.array(
            [
                [y3, y2, 0, 0],
                [y4, -y1, 0, 0],
                [0, 0, y3, -y4],
                [0, 0, -y2, -y1],
            ]
        )
    if Y.shape == (12,):
        (y1, y2, y3, y4, y5, y6, y7, y8, y9, y10, y11, y12) = Y
        return np.array(
            [
                [y3, y2, 0, 0, y7, y6, 0, 0, 0, 0, 0, 0],
                [y4, -y1, 0, 0, y8, -y5, 0, 0, 0, 0, 0, 0],
                [0, 0, y3, -y4, 0, 0, 0, 0, y11, y10, 0, 0],
                [0, 0, -y2, -y1, 0, 0, 0, 0, y12, -y9, 0, 0],
                [0, 0, 0, 0, 0, 0, y7, -y8, 0, 0, y11, -y12],
                [0, 0, 0, 0, 0, 0, -y6, -y5, 0, 0, -y10, -y9],
            ]
        )
    raise ValueError(f"Y must have length 4 or 12, got {Y.shape}")


def _noise_matrix_tensor(ny):
    """T with A(Y) = T . Y (A is linear in Y), built from the basis columns."""
    cols = [build_noise_matrix(np.eye(ny)[i]) for i in range(ny)]
    return np.stack(cols, axis=-1)


_NOISE_TENSORS = {4: _noise_matrix_tensor(4), 12: _noise_matrix_tensor(12)}


def noise_matrix_batch(Y):
    """A(Y) for a batch (n, 4) or (n, 12) of neighbor vectors."""
    Y = np.asarray(Y, dtype=float)
    T = _NOISE_TENSORS[Y.shape[-1]]
    return np.einsum("rci,ni->nrc", T, Y)


def low_mode_l2(f):
    """|Pi_{<=1} f|_{L2}; equals sqrt(2) |X|."""
    return sobolev_norm(project_low_modes(f), 0.0)
