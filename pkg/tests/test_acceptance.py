"""Acceptance suite: one test per headline property, printed as a pass/fail
line with the measured numbers.

The heavy simulation fixtures are session-scoped and shared across criteria:
the desk-scale kappa sweep feeds the lower-bound, Batchelor-fit, spectrum-
confinement, conservation and dissipation checks; the high-resolution run
feeds the kappa=0.0025 entries; the diffusionless run feeds the mixing-rate
shape and the Lagrangian cap.
"""

import numpy as np
import pytest

from batchelor_lab import diagnostics, lagrangian, models, spectral, theory
from batchelor_lab.diagnostics import (
    batchelor_fit,
    decay_rate,
    gamma_s_estimate,
    log_norm_series,
    power_spectrum,
    spectrum_radius,
    tail_average,
)
from batchelor_lab.models import ModelSpec
from batchelor_lab.stepping import _em_increment, simulate_ensemble

TWO_PI_SQ = (2 * np.pi) ** 2

DESK_KAPPAS = (0.0, 0.0025, 0.01, 0.04)
FIGURE_KAPPAS = (0.04, 0.01, 0.0025)
DESK_SEEDS = tuple(range(8))


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def shell_ics(dimension, cutoff, radius, seeds):
    return [spectral.random_shell_field(dimension, cutoff, radius,
                                        np.random.default_rng(s))
            for s in seeds]


@pytest.fixture(scope="session")
def desk_sweep():
    """kappa in {0, 0.0025, 0.01, 0.04}, N=64, T=20, dt=2e-4, 8 seeds."""
    out = {}
    for kappa in DESK_KAPPAS:
        spec = ModelSpec(2, kappa, 64)
        f0s = shell_ics(2, 64, 10, DESK_SEEDS)
        out[kappa] = simulate_ensemble(f0s, spec, 2e-4, "splitting",
                                       list(DESK_SEEDS), 20.0, cadence=0.01)
    return out


@pytest.fixture(scope="session")
def full_run():
    """kappa=0.0025 at N=256 (resolves the Batchelor shell radius 200)."""
    seeds = [0, 1]
    spec = ModelSpec(2, 0.0025, 256)
    f0s = shell_ics(2, 256, 10, seeds)
    return simulate_ensemble(f0s, spec, 5e-4, "splitting", seeds, 10.0,
                             cadence=0.01)


@pytest.fixture(scope="session")
def mixing_run():
    """Diffusionless runs with negative-Sobolev diagnostics on the s grid."""
    seeds = [0, 1, 2, 3]
    spec = ModelSpec(2, 0.0, 64)
    f0s = [spectral.cos_x_field(2, 64) for _ in seeds]
    return simulate_ensemble(f0s, spec, 5e-4, "splitting", seeds, 8.0,
                             cadence=0.01, s_grid=(0.25, 0.5, 1.0, 2.0, 4.0))


@pytest.fixture(scope="session")
def gamma_hat(mixing_run):
    """(mean, stderr) of gamma_s across the mixing ensemble, per s."""
    out = {}
    for s in (0.25, 0.5, 1.0, 2.0, 4.0):
        vals = []
        for res in mixing_run:
            series = log_norm_series(res.records, "h_minus_s", sub=s)
            est = gamma_s_estimate(series, s)
            assert est is not None
            vals.append(est.value)
        vals = np.array(vals)
        out[s] = (float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(len(vals))))
    return out


@pytest.fixture(scope="session")
def long_particle_run():
    """1000 particles, T=50: Lyapunov estimate and volume preservation."""
    ens = lagrangian.particle_ensemble(2, 1000, rng=np.random.default_rng(0))
    lagrangian.simulate_particles(ens, 1e-3, 50.0, seed=0, cadence=5.0)
    return ens


def test_lower_bound_low_modes_desk(desk_sweep):
    worst = np.inf
    for kappa, results in desk_sweep.items():
        bound = -TWO_PI_SQ * (0.5 + kappa)
        for res in results:
            est = decay_rate(log_norm_series(res.records, "low_mode_l2"),
                             "limsup-proxy")
            margin = est.value - (bound - 3 * est.stderr)
            worst = min(worst, margin)
            assert margin >= 0, (
                f"kappa={kappa} seed={res.seed}: limsup-proxy {est.value:.3f} "
                f"< bound {bound:.3f} - 3*{est.stderr:.3f}")
    report("lower-bound-low-modes", True,
           f"32/32 seeds above -(2pi)^2(1/2+kappa), worst margin {worst:.3f}")


def test_drift_nonnegativity_million_trials():
    r2 = theory.structural_trials(2, 1_000_000, seed=0)
    r3 = theory.structural_trials(3, 1_000_000, seed=1)
    ok = (r2.passed and r3.passed
          and r2.min_mu >= -1e-10 and r3.min_mu >= -1e-10
          and r2.worst_frobenius_margin >= -1e-10
          and r3.worst_frobenius_margin >= -1e-10)
    report("drift-nonnegativity", ok,
           f"min mu 2D={r2.min_mu:.2e} 3D={r3.min_mu:.2e}; "
           f"worst Fr^2-2op^2 2D={r2.worst_frobenius_margin:.2e} "
           f"3D={r3.worst_frobenius_margin:.2e}")


def test_kappa0_conservation(desk_sweep):
    logs = np.array([np.log(r["l2"]) for r in desk_sweep[0.0][0].records])
    drift = float(np.max(np.abs(logs - logs[0])))
    report("kappa0-conservation", drift < 1e-9,
           f"|delta log||f||| = {drift:.2e} over 1e5 splitting steps at N=64")


def _tail_ell(results):
    vals = []
    for res in results:
        pts = [(r["t"], r["ell"]) for r in res.records if np.isfinite(r["ell"])]
        t, v = map(np.array, zip(*pts))
        vals.append(tail_average(t, v))
    return float(np.mean(vals))


def test_batchelor_scaling_fit(desk_sweep, full_run):
    pairs = [(0.04, _tail_ell(desk_sweep[0.04])),
             (0.01, _tail_ell(desk_sweep[0.01])),
             (0.0025, _tail_ell(full_run))]
    expo, pref = batchelor_fit(pairs)
    ok = 0.35 <= expo <= 0.65
    report("batchelor-scaling", ok,
           f"ell ~ kappa^{expo:.3f} (prefactor {pref:.3f}) from "
           + ", ".join(f"({k}, {e:.4f})" for k, e in pairs))


def test_spectrum_confinement(desk_sweep, full_run):
    finals = {0.04: desk_sweep[0.04], 0.01: desk_sweep[0.01], 0.0025: full_run}
    details = []
    ok = True
    for kappa, results in finals.items():
        limit = 10 / np.sqrt(kappa)
        for res in results:
            r95 = spectrum_radius(power_spectrum(res.final), 0.95)
            ok &= r95 <= limit
            details.append(f"kappa={kappa}: r95={r95} <= {limit:.0f}")
    report("spectrum-confinement", ok, "; ".join(sorted(set(details))))


def test_dissipation_rate_order_one(desk_sweep, full_run):
    rates = {}
    for kappa in FIGURE_KAPPAS:
        results = full_run if kappa == 0.0025 else desk_sweep[kappa]
        vals = [decay_rate(log_norm_series(r.records, "l2")).value
                for r in results]
        rates[kappa] = float(np.mean(vals))
    ok = all(-TWO_PI_SQ * (0.5 + k) <= r <= -0.05 for k, r in rates.items())
    spread = max(abs(r) for r in rates.values()) / min(abs(r) for r in rates.values())
    ok &= spread < 3
    report("dissipation-rate-order-one", ok,
           ", ".join(f"kappa={k}: {r:.3f}" for k, r in rates.items())
           + f"; spread factor {spread:.2f}")


def test_mixing_rate_shape(gamma_hat):
    s_grid = (0.25, 0.5, 1.0, 2.0, 4.0)
    cap = 2 * np.pi**2
    ok = True
    details = [f"s={s}: {gamma_hat[s][0]:.3f}+-{gamma_hat[s][1]:.3f}"
               for s in s_grid]
    for a, b in zip(s_grid, s_grid[1:]):
        ok &= gamma_hat[b][0] >= gamma_hat[a][0] - 2 * (gamma_hat[a][1]
                                                        + gamma_hat[b][1])
    for s in s_grid:
        ok &= gamma_hat[s][0] <= cap + 3 * gamma_hat[s][1]
    g1, se1 = gamma_hat[1.0]
    for s in (0.25, 0.5):
        lo = theory.mixing_rate_transfer(1.0, g1, s)
        ok &= gamma_hat[s][0] >= lo - 3 * (gamma_hat[s][1]
                                           + theory.mixing_rate_transfer(1.0, se1, s))
    report("mixing-rate-shape", ok,
           "; ".join(details) + f"; cap 2pi^2 = {cap:.2f}")


def test_quadratic_variation_oracle():
    # 1000 Euler-Maruyama paths at N=6 over [0,1]; the martingale part of
    # f_hat_{1,1} has realized QV matching the integrated density
    spec = ModelSpec(2, 0.0, 6)
    B, dt, steps = 1000, 1e-4, 10_000
    f0 = spectral.random_shell_field(2, 6, 2, np.random.default_rng(42))
    state = np.repeat(f0.coeffs[None], B, axis=0)
    k_comp = spectral.mode_components(2, 6)
    ksq = spectral.mode_norm_sq(2, 6)
    idx = (7, 7)  # mode (1,1)
    gamma = -models.drift_coefficient(spec, (1, 1))
    nb = [(7, 6), (7, 8), (6, 7), (8, 7)]  # (1,0),(1,2),(0,1),(2,1)
    rng = np.random.default_rng(7)
    qv = np.zeros(B)
    pred = np.zeros(B)
    for _ in range(steps):
        dens = 2 * np.pi**2 * sum(np.abs(state[:, a, b]) ** 2 for a, b in nb)
        pred += dens * dt
        dW = rng.standard_normal((B, 4)) * np.sqrt(dt)
        new = _em_increment(state, spec, dW, k_comp, ksq, dt)
        d = new[:, idx[0], idx[1]] - state[:, idx[0], idx[1]] \
            + gamma * state[:, idx[0], idx[1]] * dt
        qv += d.real**2 + d.imag**2
        state = new
    diff = qv - pred
    stderr = diff.std(ddof=1) / np.sqrt(B)
    ok = abs(diff.mean()) < 3 * stderr + 1e-12
    report("quadratic-variation-oracle", ok,
           f"mean QV {qv.mean():.4f}, mean predicted {pred.mean():.4f}, "
           f"gap {diff.mean():.2e} vs 3*stderr {3 * stderr:.2e}")


def test_one_point_brownian_and_volume(long_particle_run):
    # displacement variance across 100 independent environments x 1000
    # particles at T=1
    n_env, per_env, T = 100, 1000, 1.0
    means = np.empty((n_env, 2))
    for e in range(n_env):
        ens = lagrangian.particle_ensemble(2, per_env,
                                           rng=np.random.default_rng(e))
        lagrangian.simulate_particles(ens, 1e-2, T, seed=1000 + e, cadence=T)
        means[e] = (ens.displacements**2).mean(axis=0)
    stderr = means.std(axis=0, ddof=1) / np.sqrt(n_env)
    var_ok = np.all(np.abs(means.mean(axis=0) - T) <= 3 * stderr)
    det_err = float(np.abs(long_particle_run.jacobian_determinant() - 1).max())
    det_ok = det_err < 1e-8
    report("one-point-brownian-motion", var_ok and det_ok,
           f"msd at T=1: {means.mean(axis=0)} (stderr {stderr}); "
           f"max |det J - 1| after T=50: {det_err:.2e}")


def test_lagrangian_cap_consistency(long_particle_run, gamma_hat):
    _, lam = lagrangian.lyapunov_estimate(long_particle_run)
    ok = True
    details = [f"Lambda_hat={lam:.2f}"]
    for s in (0.5, 1.0, 2.0):
        g, se = gamma_hat[s]
        ok &= theory.mixing_rate_cap(lam, s) >= g - 3 * se
        details.append(f"s={s}: {lam * s:.2f} >= {g:.2f}-3*{se:.2f}")
    report("lagrangian-cap-consistency", ok, "; ".join(details))


def test_structural_suite():
    rng = np.random.default_rng(0)
    interp_ok = approx_ok = True
    for i in range(10_000):
        f = spectral.zeros(2, 8)
        f.coeffs = rng.standard_normal(f.coeffs.shape) \
            + 1j * rng.standard_normal(f.coeffs.shape)
        spectral._hermitize(f.coeffs)
        f.coeffs[(8, 8)] = 0.0
        _, _, ok = theory.interpolation_check(f, -1.0, 0.5, 2.0)
        interp_ok &= ok
        if i < 200:
            approx_ok &= theory.low_mode_approximant(
                f, -1.0, 0.5, 2.0, 10 ** rng.uniform(-2, 1)).passes
    # fields on an exact shell |k|^2 = 25: Holder equality to 1e-12
    eq_ok = True
    exact = spectral.mode_norm_sq(2, 12) == 25.0
    for seed in range(100):
        srng = np.random.default_rng(seed)
        f = spectral.zeros(2, 12)
        vals = srng.standard_normal(f.coeffs.shape) \
            + 1j * srng.standard_normal(f.coeffs.shape)
        f.coeffs[exact] = vals[exact]
        spectral._hermitize(f.coeffs)
        lhs, rhs, _ = theory.interpolation_check(f, -1.0, 0.0, 1.0)
        eq_ok &= abs(lhs - rhs) <= 1e-12 * rhs
    adj_ok = all(theory.adjacency_connectivity(N)[0] for N in range(1, 17))
    ok = interp_ok and approx_ok and eq_ok and adj_ok
    report("structural-suite", ok,
           f"interpolation 10^4 fields: {interp_ok}; shell equality to 1e-12: "
           f"{eq_ok}; approximant displays: {approx_ok}; adjacency N=1..16 "
           f"connected: {adj_ok}")


def test_3d_lower_bound_smoke():
    spec = ModelSpec(3, 0.01, 16)
    f0 = spectral.random_shell_field(3, 16, 4, np.random.default_rng(0))
    res = simulate_ensemble([f0], spec, 1e-3, "splitting", [0], 5.0,
                            cadence=0.01)[0]
    est = decay_rate(log_norm_series(res.records, "low_mode_l2"),
                     "limsup-proxy")
    bound = -TWO_PI_SQ * (1 + 0.01)
    ok = est.value >= bound - 3 * est.stderr
    report("3d-lower-bound-smoke", ok,
           f"limsup-proxy {est.value:.3f} >= {bound:.3f} - 3*{est.stderr:.3f}")
