"""Time integration of the shear-model SPDE.

Two schemes:

* ``splitting`` -- sequential exact shear maps (per-line Fourier phase
  multiplication on a physical grid) with the Brownian increments as shear
  amplitudes, plus the exact heat multiplier.  Each sub-step is unitary on
  the grid, so the kappa = 0 scheme conserves the grid L2 norm to round-off.
* ``euler-maruyama`` -- direct Ito discretization of the truncated Fourier
  SDE system.

Noise is counter-based: the increments for (seed, step) come from a Philox
stream keyed by the seed with the step index as counter, so trajectories are
reproducible and refinements can share paths by summing increments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import spectral
from .models import ModelSpec, stencil_axes
from .spectral import FieldError, GridField, SpectralField

TWO_PI = 2.0 * np.pi
# norm threshold below which a decaying trajectory is rescaled to avoid
# underflow of squared coefficients; the divided-out factor accumulates in
# the record's "log_scale"
RENORM_FLOOR = 1e-100


class StepInstability(RuntimeError):
    """A coefficient grew by more than 10x in a single explicit step."""


class NumericalAbort(RuntimeError):
    """NaN/Inf encountered while stepping."""


@dataclass(frozen=True)
class StepPlan:
    dt: float
    scheme: str = "splitting"
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.scheme not in ("splitting", "euler-maruyama"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


def noise_increments(seed, step, count, dt):
    """Gaussian increments ~ N(0, dt) for one step, from a counter-based stream."""
    bg = np.random.Philox(key=np.uint64(seed) & np.uint64(2**64 - 1),
                          counter=[0, 0, 0, int(step)])
    return np.random.Generator(bg).standard_normal(count) * np.sqrt(dt)


def stable_dt(spec: ModelSpec):
    """Explicit Euler-Maruyama stiffness limit 0.1 / ((2 pi)^2 (c + kappa) N^2)."""
    return 0.1 / (spec.drift_prefactor * spec.cutoff**2)


def simulation_grid_size(cutoff):
    """Smallest odd FFT-friendly M >= 4N.

    Odd sizes have no Nyquist frequency, which makes the per-line shear phase
    multiplication exactly unitary on real grids.
    """
    M = 4 * cutoff + (1 if 4 * cutoff % 2 == 0 else 0)
    while True:
        n = M
        for p in (2, 3, 5, 7, 11, 13):
            while n % p == 0:
                n //= p
        if n == 1 and M % 2 == 1:
            return M
        M += 2 if M % 2 == 1 else 1


# Per dimension: one entry per Brownian pair (2j+1, 2j+2), giving
# (sheared axis, driving axis).  The sin increment is 2j, cos is 2j+1.
_SHEAR_PASSES = {
    2: [(0, 1), (1, 0)],
    3: [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)],
}
# Passes in which the exact 1D heat multiplier for the sheared axis is folded
# (one per axis; the heat semigroup factorizes exactly over axes).
_HEAT_PASSES = {2: (0, 1), 3: (0, 1, 3)}


def _phase_table(k_count, c):
    """exp(-2 pi i k c[...]) for k = 0..k_count-1; shape c.shape + (k_count,)."""
    z = np.exp(-2j * np.pi * c)
    out = np.empty(c.shape + (k_count,), dtype=complex)
    out[..., 0] = 1.0
    np.cumprod(np.broadcast_to(z[..., None], c.shape + (k_count - 1,)),
               axis=-1, out=out[..., 1:])
    return out


def grid_shear(values, axis, c, heat=None):
    """Exact shear x_a -> x_a + c(x_b) applied to grid samples (in place semantics: returns new array).

    ``values``: real array, spatial axes are the trailing ``d`` axes.
    ``axis``: sheared spatial axis a; ``c``: displacement, indexed by all
    axes except a (i.e. shape = values.shape without axis a's entry).
    The grid size along ``axis`` must be odd (no Nyquist mode).
    Optionally multiplies the rfft coefficients by ``heat`` (shape (K,)).
    """
    M = values.shape[axis]
    if M % 2 == 0:
        raise FieldError("grid_shear requires an odd grid size along the sheared axis")
    K = M // 2 + 1
    F = sfft.rfft(values, axis=axis)
    ph = _phase_table(K, np.asarray(c))  # (..., K) over non-axis dims
    ph = np.moveaxis(ph, -1, axis)
    if heat is not None:
        shape = [1] * F.ndim
        shape[axis] = K
        ph = ph * heat.reshape(shape)
    return sfft.irfft(F * ph, n=M, axis=axis)


def shear_step(g: GridField, axis, drive_axis, amp_sin, amp_cos):
    """Exact flow of the shear pair (amp_sin sin + amp_cos cos)(2 pi x_b) e_a.

    Transports the field: f(x) <- f(x - c(x_b) e_a).  Unitary on the grid.
    """
    if axis == drive_axis:
        raise FieldError("shear axis must differ from driving axis")
    M = g.size
    x = np.arange(M) / M
    c_line = amp_sin * np.sin(TWO_PI * x) + amp_cos * np.cos(TWO_PI * x)
    # displacement indexed by all axes except the sheared one
    other_axes = [a for a in range(g.dimension) if a != axis]
    shape = [1] * (g.dimension - 1)
    shape[other_axes.index(drive_axis)] = M
    c = np.broadcast_to(c_line.reshape(shape), tuple(M for _ in other_axes))
    return GridField(g.dimension, grid_shear(g.values, axis, c), g.time)


def heat_step(f: SpectralField, kappa, dt):
    """Exact heat semigroup on the truncation: f_hat_k *= exp(-kappa (2pi)^2 |k|^2 dt)."""
    if kappa < 0 or dt < 0:
        raise ValueError("kappa and dt must be nonnegative")
    g = f.copy()
    ksq = spectral.mode_norm_sq(f.dimension, f.cutoff)
    g.coeffs *= np.exp(-kappa * TWO_PI**2 * ksq * dt)
    return g


def _em_increment(coeffs, spec: ModelSpec, dW, k_comp, ksq, dt):
    """One Euler-Maruyama update for a batch of coefficient arrays.

    ``coeffs``: (B,) + lattice complex; ``dW``: (B, noise_count).
    All neighbor reads use the frozen pre-step state.
    """
    d = spec.dimension
    bshape = (-1,) + (1,) * d

    def shift(arr, axis, delta):
        # value of the (k - delta e_axis) neighbor at position k
        out = np.roll(arr, delta, axis=1 + axis)
        sl = [slice(None)] * arr.ndim
        sl[1 + axis] = slice(0, delta) if delta > 0 else slice(delta, None)
        out[tuple(sl)] = 0
        return out

    new = coeffs * (1.0 - spec.drift_prefactor * ksq * dt)
    for j in range(spec.noise_count // 2):
        axis, waxis, _ = stencil_axes(d, 2 * j + 1)
        lo = shift(coeffs, axis, +1)
        hi = shift(coeffs, axis, -1)
        w = np.pi * k_comp[waxis]
        dw_sin = dW[:, 2 * j].reshape(bshape)
        dw_cos = dW[:, 2 * j + 1].reshape(bshape)
        new += w * ((lo - hi) * dw_sin - 1j * (lo + hi) * dw_cos)
    return new


def euler_maruyama_step(f: SpectralField, spec: ModelSpec, plan: StepPlan, draw):
    """One Ito Euler step of the truncated Fourier system."""
    draw = np.asarray(draw, dtype=float)
    if draw.shape != (spec.noise_count,):
        raise ValueError(f"draw must have shape ({spec.noise_count},)")
    k_comp = spectral.mode_components(f.dimension, f.cutoff)
    ksq = spectral.mode_norm_sq(f.dimension, f.cutoff)
    new = _em_increment(f.coeffs[None], spec, draw[None], k_comp, ksq, plan.dt)[0]
    if np.linalg.norm(new) > 10.0 * max(np.linalg.norm(f.coeffs), 1e-300):
        raise StepInstability(
            f"field norm grew by more than 10x in one step (dt={plan.dt}); "
            f"stability limit is about {stable_dt(spec):.3e}"
        )
    return SpectralField(f.dimension, f.cutoff, new, f.time + plan.dt)


def splitting_step(f: SpectralField, spec: ModelSpec, plan: StepPlan, draw,
                   grid_size=None):
    """One random-shear splitting step, read back at the field's cutoff.

    The underlying grid map is exactly unitary; the spectral read-back
    truncates grid-scale content above the cutoff.
    """
    M = grid_size or simulation_grid_size(f.cutoff)
    g = spectral.to_physical(f, M)
    out = _splitting_grid_step(g.values[None], f.dimension, M, spec,
                               np.asarray(draw, float)[None], plan.dt)[0]
    res = spectral.to_spectral(GridField(f.dimension, out, f.time + plan.dt), f.cutoff)
    res.time = f.time + plan.dt
    return res


def _splitting_grid_step(values, dimension, M, spec, dW, dt):
    """Advance batched grid states (B,) + (M,)*d by one splitting step."""
    x = np.arange(M) / M
    sin_t, cos_t = np.sin(TWO_PI * x), np.cos(TWO_PI * x)
    K = M // 2 + 1
    kline = np.arange(K)
    heat = None
    if spec.kappa > 0:
        heat = np.exp(-spec.kappa * TWO_PI**2 * kline.astype(float) ** 2 * dt)
    for j, (axis, drive) in enumerate(_SHEAR_PASSES[dimension]):
        c_line = (dW[:, 2 * j, None] * sin_t[None] +
                  dW[:, 2 * j + 1, None] * cos_t[None])  # (B, M)
        other = [a for a in range(dimension) if a != axis]
        shape = [values.shape[0]] + [1] * (dimension - 1)
        shape[1 + other.index(drive)] = M
        c = np.broadcast_to(c_line.reshape(shape),
                            (values.shape[0],) + tuple(M for _ in other))
        h = heat if (heat is not None and j in _HEAT_PASSES[dimension]) else None
        values = grid_shear(values, 1 + axis, c, heat=h)
    return values


# ----------------------------------------------------------------------
# trajectory driver
# ----------------------------------------------------------------------

@dataclass
class SimResult:
    """Diagnostics stream and final state of one simulated trajectory."""

    records: list
    final: SpectralField
    seed: int
    snapshots: list = field(default_factory=list)
    # log of the factor divided out of ``final`` by decay renormalization;
    # the true field is final * exp(log_scale)
    log_scale: float = 0.0


def simulate(f0, spec, plan, horizon, cadence=0.01, s_grid=(), grid_size=None,
             draws=None, snapshot_times=()):
    """Run a single trajectory; deterministic given (seed, plan, spec, f0)."""
    return simulate_ensemble([f0], spec, plan.dt, plan.scheme, [plan.seed],
                             horizon, cadence=cadence, s_grid=s_grid,
                             grid_size=grid_size, draws=draws,
                             snapshot_times=snapshot_times)[0]


def simulate_ensemble(f0s, spec, dt, scheme, seeds, horizon, cadence=0.01,
                      s_grid=(), grid_size=None, draws=None, snapshot_times=()):
    """Advance several trajectories in lock-step (batched arrays, disjoint seeds).

    ``draws``: optional (steps, B, noise_count) array of Brownian increments
    overriding the counter-based stream (used for path-sharing refinements).
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if len(f0s) != len(seeds):
        raise ValueError("one seed per initial condition required")
    for f0 in f0s:
        f0.validate()
    n_steps = int(round(horizon / dt))
    record_every = max(1, int(round(cadence / dt)))
    snap_steps = sorted({int(round(t / dt)) for t in snapshot_times})

    if scheme == "splitting":
        engine = _SplittingEngine(f0s, spec, dt, grid_size)
    else:
        engine = _EMEngine(f0s, spec, dt)

    B = len(f0s)
    records = [[] for _ in range(B)]
    snapshots = [[] for _ in range(B)]

    def emit(step):
        t = step * dt
        diags = engine.diagnostics(s_grid)
        for b in range(B):
            rec = {"t": t, "kappa": spec.kappa, "seed": seeds[b],
                   "log_scale": float(engine.log_scale[b])}
            rec.update({k: v[b] for k, v in diags.items()})
            if not np.isfinite(rec["l2"]):
                raise NumericalAbort(f"non-finite L2 norm at t={t}")
            records[b].append(rec)
        if step in snap_steps:
            for b, snap in enumerate(engine.fields(t)):
                snapshots[b].append(snap)
        # keep decaying trajectories representable: fold tiny norms into a
        # log offset before their squares underflow (the dynamics are linear)
        engine.renormalize()

    emit(0)
    for step in range(n_steps):
        if draws is not None:
            dW = np.asarray(draws[step], dtype=float)
        else:
            dW = np.stack([noise_increments(s, step, spec.noise_count, dt)
                           for s in seeds])
        engine.step(dW)
        if (step + 1) % record_every == 0 or step + 1 == n_steps:
            emit(step + 1)

    finals = engine.fields(n_steps * dt)
    return [SimResult(records[b], finals[b], seeds[b], snapshots[b],
                      float(engine.log_scale[b])) for b in range(B)]


class _SplittingEngine:
    def __init__(self, f0s, spec, dt, grid_size=None):
        self.spec = spec
        self.dt = dt
        self.dim = spec.dimension
        self.M = grid_size or simulation_grid_size(spec.cutoff)
        if self.M % 2 == 0:
            raise FieldError("splitting grid size must be odd")
        self.state = np.stack([spectral.to_physical(f, self.M).values for f in f0s])
        # exact spectral mean, not the grid average (which carries round-off)
        self.mean0 = np.array([float(f.coeffs[(f.cutoff,) * f.dimension].real)
                               for f in f0s])
        self.log_scale = np.zeros(len(f0s))
        self._prep_tables()

    def renormalize(self, floor=RENORM_FLOOR):
        axes = tuple(range(1, self.dim + 1))
        # the mean is an exact invariant of heat + shear; round-off injected
        # into it never decays, so pin it to its initial value
        drift = self.state.mean(axis=axes) - self.mean0
        self.state -= drift.reshape((-1,) + (1,) * self.dim)
        norm = np.sqrt(np.mean(self.state**2, axis=axes))
        small = (norm < floor) & (norm > 0)
        for b in np.flatnonzero(small):
            self.state[b] /= norm[b]
            self.mean0[b] /= norm[b]
            self.log_scale[b] += np.log(norm[b])

    def _prep_tables(self):
        M, d, N = self.M, self.dim, self.spec.cutoff
        freqs = np.rint(sfft.fftfreq(M) * M).astype(int)
        rfreqs = freqs[: M // 2 + 1]
        grids = np.meshgrid(*([freqs] * (d - 1) + [rfreqs]), indexing="ij")
        self.ksq_r = sum(g.astype(float) ** 2 for g in grids)
        # doubling weights for the rfftn half-spectrum (odd M: only k_last=0 unpaired)
        w = np.ones(M // 2 + 1)
        w[1:] = 2.0
        self.weight_r = w
        # truncation window |k_i| <= N inside the rfftn layout
        self.win = tuple(np.ix_(*([np.r_[0: N + 1, M - N: M]] * (d - 1) + [np.arange(N + 1)])))
        win_grids = [g[self.win] for g in grids]
        self.win_ksq = sum(g.astype(float) ** 2 for g in win_grids)
        self.win_weight = w[: N + 1]
        x = np.arange(M) / M
        self.e_minus = np.exp(-2j * np.pi * x)  # inner product with F_{e_j}

    def step(self, dW):
        self.state = _splitting_grid_step(self.state, self.dim, self.M,
                                          self.spec, dW, self.dt)

    def diagnostics(self, s_grid):
        axes = tuple(range(1, self.dim + 1))
        v = self.state
        M, d = self.M, self.dim
        l2 = np.sqrt(np.mean(v**2, axis=axes))
        F = sfft.rfftn(v, axes=axes) / (M**d)
        power = np.abs(F) ** 2 * self.weight_r
        grad_sq = (TWO_PI**2) * np.sum(power * self.ksq_r, axis=axes)
        with np.errstate(divide="ignore", invalid="ignore"):
            ell = np.where(grad_sq > 0, l2 / np.sqrt(grad_sq), np.nan)
        # inner modes via direct projections (exact for band-limited content)
        low_sq = np.zeros(v.shape[0])
        for a in range(d):
            rest = tuple(ax for ax in axes if ax != 1 + a)
            line = v.sum(axis=rest) / (M ** (d - 1))
            coef = line @ self.e_minus / M
            low_sq += 2.0 * np.abs(coef) ** 2
        out = {"l2": l2, "low_mode_l2": np.sqrt(low_sq), "ell": ell}
        if s_grid:
            win_power = (np.abs(F[(slice(None),) + self.win]) ** 2) * self.win_weight
            ksq = self.win_ksq
            mask = ksq > 0
            hs = {}
            for s in s_grid:
                hs[float(s)] = np.sqrt(
                    np.sum(win_power[:, mask] * ksq[mask] ** (-float(s)), axis=1))
            out["h_minus_s"] = [
                {k: float(vv[b]) for k, vv in hs.items()} for b in range(v.shape[0])
            ]
        for k in ("l2", "low_mode_l2", "ell"):
            out[k] = [float(x) for x in out[k]]
        return out

    def fields(self, t):
        out = []
        for b in range(self.state.shape[0]):
            f = spectral.to_spectral(GridField(self.dim, self.state[b], t),
                                     self.spec.cutoff)
            f.time = t
            out.append(f)
        return out


class _EMEngine:
    def __init__(self, f0s, spec, dt):
        self.spec = spec
        self.dt = dt
        self.dim = spec.dimension
        self.coeffs = np.stack([f.coeffs for f in f0s]).astype(complex)
        self.k_comp = spectral.mode_components(spec.dimension, spec.cutoff)
        self.ksq = spectral.mode_norm_sq(spec.dimension, spec.cutoff)
        self.low_mask = self.ksq == 1.0
        self.log_scale = np.zeros(len(f0s))
        self.t = 0.0

    def renormalize(self, floor=RENORM_FLOOR):
        axes = tuple(range(1, self.dim + 1))
        norm = np.sqrt(np.sum(np.abs(self.coeffs) ** 2, axis=axes))
        small = (norm < floor) & (norm > 0)
        for b in np.flatnonzero(small):
            self.coeffs[b] /= norm[b]
            self.log_scale[b] += np.log(norm[b])

    def step(self, dW):
        new = _em_increment(self.coeffs, self.spec, dW, self.k_comp, self.ksq, self.dt)
        axes = tuple(range(1, self.dim + 1))
        old_norm = np.sqrt(np.sum(np.abs(self.coeffs) ** 2, axis=axes))
        new_norm = np.sqrt(np.sum(np.abs(new) ** 2, axis=axes))
        if np.any(new_norm > 10.0 * np.maximum(old_norm, 1e-300)):
            raise StepInstability(
                f"field norm grew by more than 10x in one step (dt={self.dt}); "
                f"stability limit is about {stable_dt(self.spec):.3e}")
        self.coeffs = new
        self.t += self.dt

    def diagnostics(self, s_grid):
        axes = tuple(range(1, self.dim + 1))
        power = np.abs(self.coeffs) ** 2
        mask = self.ksq > 0
        l2 = np.sqrt(np.sum(power[:, mask], axis=1))
        grad_sq = TWO_PI**2 * np.sum(power[:, mask] * self.ksq[mask], axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ell = np.where(grad_sq > 0, l2 / np.sqrt(grad_sq), np.nan)
        low = np.sqrt(np.sum(power[:, self.low_mask], axis=1))
        out = {"l2": [float(x) for x in l2],
               "low_mode_l2": [float(x) for x in low],
               "ell": [float(x) for x in ell]}
        if s_grid:
            out["h_minus_s"] = [
                {float(s): float(np.sqrt(np.sum(power[b][mask] * self.ksq[mask] ** (-float(s)))))
                 for s in s_grid}
                for b in range(power.shape[0])
            ]
        return out

    def fields(self, t):
        return [SpectralField(self.dim, self.spec.cutoff, self.coeffs[b].copy(), t)
                for b in range(self.coeffs.shape[0])]
