"""Particle trajectories of the random-shear velocity field.

Each time step applies the same sequence of exact shear maps as the field
integrator, so particles see precisely the flow that transports the scalar.
Alongside positions the module tracks unwrapped displacements (each
coordinate of a single particle is a standard Brownian motion), the flow
Jacobian (unit determinant, since every shear is volume preserving) and the
inverse-flow Jacobian, whose growth rate estimates the top Lyapunov exponent
Lambda -- the quantity capping the mixing rate via gamma_s < Lambda s.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .stepping import _SHEAR_PASSES, noise_increments

TWO_PI = 2.0 * np.pi

# Reset threshold for the determinant window.  det(window) is an exact-1
# quantity recovered by cancellation between O(norm^d) products, so the
# window must be folded while its norm is still small.
_DET_WINDOW_NORM = 1e2


@dataclass
class ParticleEnsemble:
    """Particles advected by one realization of the shear noise."""

    dimension: int
    positions: np.ndarray  # (n, d), wrapped to [0, 1)
    displacements: np.ndarray  # (n, d), unwrapped
    inv_jacobian: np.ndarray  # (n, d, d), scalar-renormalized
    log_inv_scale: np.ndarray  # (n,), log of the factored-out norm
    det_window: np.ndarray  # (n, d, d), forward Jacobian since last reset
    det_acc: np.ndarray  # (n,), product of window determinants
    time: float = 0.0

    @property
    def count(self):
        return self.positions.shape[0]

    def log_inv_jacobian_norm(self):
        """log of the Frobenius norm of the accumulated inverse-flow Jacobian."""
        return self.log_inv_scale + np.log(
            np.linalg.norm(self.inv_jacobian, axis=(1, 2)))

    def jacobian_determinant(self):
        """det of the accumulated forward Jacobian (exactly 1 for the true flow)."""
        return self.det_acc * np.linalg.det(self.det_window)


def particle_ensemble(dimension, count, rng=None, positions=None):
    if dimension not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {dimension}")
    if positions is None:
        if rng is None:
            raise ValueError("pass either positions or an rng to draw them")
        positions = rng.random((count, dimension))
    positions = np.asarray(positions, dtype=float) % 1.0
    if positions.shape != (count, dimension):
        raise ValueError(f"positions must have shape ({count}, {dimension})")
    eye = np.broadcast_to(np.eye(dimension), (count, dimension, dimension)).copy()
    return ParticleEnsemble(
        dimension=dimension,
        positions=positions,
        displacements=np.zeros((count, dimension)),
        inv_jacobian=eye.copy(),
        log_inv_scale=np.zeros(count),
        det_window=eye.copy(),
        det_acc=np.ones(count),
        time=0.0,
    )


def particle_step(ens: ParticleEnsemble, dW, dt):
    """Advance the ensemble through one step of shear increments (in place).

    ``dW``: the (noise_count,) Brownian increments of this step, shared by all
    particles (they ride the same environment).
    """
    d = ens.dimension
    dW = np.asarray(dW, dtype=float)
    for j, (axis, drive) in enumerate(_SHEAR_PASSES[d]):
        phase = TWO_PI * ens.positions[:, drive]
        sin_p, cos_p = np.sin(phase), np.cos(phase)
        c = dW[2 * j] * sin_p + dW[2 * j + 1] * cos_p
        dc = TWO_PI * (dW[2 * j] * cos_p - dW[2 * j + 1] * sin_p)
        ens.displacements[:, axis] += c
        ens.positions[:, axis] = (ens.positions[:, axis] + c) % 1.0
        # forward sub-Jacobian S = I + dc E_{axis,drive}; det S = 1 exactly
        ens.det_window[:, axis, :] += dc[:, None] * ens.det_window[:, drive, :]
        # inverse-flow Jacobian picks up S^{-1} = I - dc E on the right
        ens.inv_jacobian[:, :, drive] -= dc[:, None] * ens.inv_jacobian[:, :, axis]
    # renormalize the inverse Jacobian (growth goes into the log scale)
    norms = np.linalg.norm(ens.inv_jacobian, axis=(1, 2))
    ens.log_inv_scale += np.log(norms)
    ens.inv_jacobian /= norms[:, None, None]
    # fold the determinant window before its entries get large
    big = np.linalg.norm(ens.det_window, axis=(1, 2)) > _DET_WINDOW_NORM
    if big.any():
        ens.det_acc[big] *= np.linalg.det(ens.det_window[big])
        ens.det_window[big] = np.eye(d)
    ens.time += dt
    return ens


def simulate_particles(ens: ParticleEnsemble, dt, horizon, seed,
                       cadence=0.1, tracked=0):
    """Drive an ensemble with the counter-based noise stream of ``seed``.

    Returns a list of records {t, mean_sq_displacement (d,), max_log_inv_jac,
    tracked: (tracked, d) positions} sampled every ``cadence``.
    """
    if horizon < 0 or dt <= 0:
        raise ValueError("need horizon >= 0 and dt > 0")
    count = 4 if ens.dimension == 2 else 12
    n_steps = int(round(horizon / dt))
    record_every = max(1, int(round(cadence / dt)))
    records = []

    def emit():
        rec = {
            "t": ens.time,
            "mean_sq_displacement": (ens.displacements**2).mean(axis=0),
            "max_log_inv_jac": float(ens.log_inv_jacobian_norm().max()),
        }
        if tracked:
            rec["tracked"] = ens.positions[:tracked].copy()
            rec["tracked_log_inv_jac"] = ens.log_inv_jacobian_norm()[:tracked]
        records.append(rec)

    emit()
    for step in range(n_steps):
        dW = noise_increments(seed, step, count, dt)
        particle_step(ens, dW, dt)
        if (step + 1) % record_every == 0 or step + 1 == n_steps:
            emit()
    return records


def lyapunov_estimate(ens: ParticleEnsemble):
    """Per-particle exponents (1/t) log |inverse Jacobian| and their max.

    The max is the Lambda estimate entering the mixing-rate cap
    gamma_s < Lambda s.
    """
    if ens.time <= 0:
        raise ValueError("ensemble has not been advanced")
    rates = ens.log_inv_jacobian_norm() / ens.time
    return rates, float(rates.max())


def one_point_variance(records):
    """(t, per-axis mean squared displacement) arrays from a record stream.

    For the shear models the one-point motion is an exact Brownian motion, so
    the mean squared displacement of each coordinate should track t.
    """
    t = np.array([r["t"] for r in records])
    msd = np.stack([r["mean_sq_displacement"] for r in records])
    return t, msd


def write_trajectory_csv(records, path):
    """Tracked-particle trajectories as t,x,y[,z],log_inv_jac_norm rows."""
    if not records or "tracked" not in records[0]:
        raise ValueError("records carry no tracked particles")
    dim = records[0]["tracked"].shape[1]
    cols = ["t"] + ["x", "y", "z"][:dim] + ["log_inv_jac_norm"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["particle"] + cols)
        for r in records:
            for p in range(r["tracked"].shape[0]):
                w.writerow([p, repr(float(r["t"]))]
                           + [repr(float(x)) for x in r["tracked"][p]]
                           + [repr(float(r["tracked_log_inv_jac"][p]))])
