"""Command-line experiment driver.

Subcommands: run (single trajectory), sweep (kappa ensemble + Batchelor fit),
check (randomized structural suite), lagrangian (particle statistics and the
Lyapunov cap), mixing (negative-Sobolev mixing rates, kappa = 0 only) and
export-figure-data (figure CSVs from a saved spectral snapshot).

Exit codes: 0 success, 1 structural-check failure, 2 configuration error,
3 numerical abort (NaN/instability).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, diagnostics, exports, lagrangian, spectral, theory
from .config import ConfigError, RunConfig, RunManifest, atomic_write_json
from .models import ModelSpec
from .stepping import NumericalAbort, StepInstability, simulate_ensemble

TWO_PI_SQ = (2.0 * np.pi) ** 2

# Ensemble presets: the kappa triple of the snapshot figure at desk scale,
# plus the long-running high-resolution case for the smallest kappa.
PRESETS = {
    "desk": {
        "kappas": [0.04, 0.01, 0.0025],
        "ensemble": 8,
        "base": {"kappa": 0.0, "dimension": 2, "cutoff": 64, "dt": 2e-4,
                 "horizon": 20.0, "cadence": 0.01, "initial_condition": "random-shell",
                 "shell_radius": 10},
    },
    "full": {
        "kappas": [0.0025],
        "ensemble": 2,
        "base": {"kappa": 0.0, "dimension": 2, "cutoff": 256, "dt": 5e-4,
                 "horizon": 10.0, "cadence": 0.01, "initial_condition": "random-shell",
                 "shell_radius": 10},
    },
}


def thread_cap(requested):
    cap = os.environ.get("BATCHELOR_LAB_THREADS")
    if cap:
        try:
            return max(1, min(int(requested), int(cap)))
        except ValueError:
            raise ConfigError(f"BATCHELOR_LAB_THREADS={cap!r} is not an integer")
    return max(1, int(requested))


def initial_condition(cfg: RunConfig):
    if cfg.initial_condition == "cos-x":
        return spectral.cos_x_field(cfg.dimension, cfg.cutoff)
    rng = np.random.default_rng(cfg.effective_ic_seed)
    return spectral.random_shell_field(cfg.dimension, cfg.cutoff,
                                       cfg.shell_radius, rng)


def summarize(cfg: RunConfig, result):
    spec = ModelSpec(cfg.dimension, cfg.kappa, cfg.cutoff)
    recs = result.records
    low = diagnostics.log_norm_series(recs, "low_mode_l2")
    out = {
        "kappa": cfg.kappa,
        "seed": cfg.seed,
        "bound": -spec.drift_prefactor,
        "ell_mean": None,
        "spectrum_radius_95": None,
        "rate_global": None,
        "rate_limsup_proxy": None,
        "gamma_s": {},
    }
    for mode, key in (("global-slope", "rate_global"),
                      ("limsup-proxy", "rate_limsup_proxy")):
        est = diagnostics.decay_rate(low, mode)
        if est is not None:
            out[key] = {"value": est.value, "stderr": est.stderr}
    ell = [(r["t"], r["ell"]) for r in recs if np.isfinite(r["ell"])]
    if ell:
        t, v = zip(*ell)
        out["ell_mean"] = diagnostics.tail_average(np.array(t), np.array(v))
    if spectral.sobolev_norm(result.final, 0.0) > 0:
        prof = diagnostics.power_spectrum(result.final)
        out["spectrum_radius_95"] = diagnostics.spectrum_radius(prof, 0.95)
    for s in cfg.s_grid:
        series = diagnostics.log_norm_series(recs, "h_minus_s", sub=float(s))
        est = diagnostics.gamma_s_estimate(series, s)
        if est is not None:
            out["gamma_s"][str(s)] = {"value": est.value, "stderr": est.stderr}
    return out


def run_single(cfg: RunConfig):
    """Execute one config; returns (summary, output file names) in cfg.out_dir."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    t0 = time.time()
    f0 = initial_condition(cfg)
    snapshot_times = cfg.snapshot_times or (cfg.horizon,)
    result = simulate_ensemble(
        [f0], ModelSpec(cfg.dimension, cfg.kappa, cfg.cutoff), cfg.dt,
        cfg.scheme, [cfg.seed], cfg.horizon, cadence=cfg.cadence,
        s_grid=cfg.s_grid, snapshot_times=snapshot_times)[0]
    outputs = []

    def emit(name, writer, *a):
        writer(*a, os.path.join(cfg.out_dir, name))
        outputs.append(name)

    emit("series.ndjson", exports.write_ndjson, result.records)
    for snap in result.snapshots:
        tag = f"snapshot_t{snap.time:.4f}"
        emit(f"{tag}.csv", spectral.write_csv, snap)
        if cfg.dimension == 2:
            M = 2 * cfg.cutoff + 1
            emit(f"{tag}.pgm", exports.write_pgm, spectral.to_physical(snap, M))
    summary = summarize(cfg, result)
    emit("summary.json", atomic_write_json_flip, summary)
    cfg.save(os.path.join(cfg.out_dir, "config.json"))
    outputs.append("config.json")
    manifest = RunManifest(cfg.config_hash(), __version__, cfg.seed,
                           time.time() - t0, sorted(outputs), summary)
    manifest.write(os.path.join(cfg.out_dir, "manifest.json"))
    return summary, outputs


def atomic_write_json_flip(payload, path):
    atomic_write_json(path, payload)


# ---------------------------------------------------------------------- run

def cmd_run(args):
    cfg = load_run_config(args)
    summary, _ = run_single(cfg)
    print(json.dumps(summary, sort_keys=True, indent=2))
    return 0


def load_run_config(args):
    if args.config:
        cfg = RunConfig.load(args.config)
    else:
        base = dict(PRESETS["desk"]["base"])
        base["kappa"] = 0.01
        cfg = RunConfig.from_dict(base)
    d = cfg.to_dict()
    if args.out:
        d["out_dir"] = args.out
    if args.seed is not None:
        d["seed"] = args.seed
    return RunConfig.from_dict(d)


# -------------------------------------------------------------------- sweep

def sweep_group(base_dict, kappa, ensemble, seed0, out_dir):
    """One kappa group: ensemble of seeds advanced in lock-step."""
    cfgs = []
    for i in range(ensemble):
        d = dict(base_dict)
        d.update(kappa=kappa, seed=seed0 + i,
                 out_dir=os.path.join(out_dir, f"kappa_{kappa:g}", f"seed_{seed0 + i}"))
        cfgs.append(RunConfig.from_dict(d))
    spec = ModelSpec(cfgs[0].dimension, kappa, cfgs[0].cutoff)
    f0s = [initial_condition(c) for c in cfgs]
    results = simulate_ensemble(f0s, spec, cfgs[0].dt, cfgs[0].scheme,
                                [c.seed for c in cfgs], cfgs[0].horizon,
                                cadence=cfgs[0].cadence, s_grid=cfgs[0].s_grid,
                                snapshot_times=(cfgs[0].horizon,))
    summaries = []
    for cfg, res in zip(cfgs, results):
        os.makedirs(cfg.out_dir, exist_ok=True)
        exports.write_ndjson(res.records, os.path.join(cfg.out_dir, "series.ndjson"))
        s = summarize(cfg, res)
        atomic_write_json(os.path.join(cfg.out_dir, "summary.json"), s)
        summaries.append(s)
    # figure data from the first seed's final state
    prefix = os.path.join(out_dir, f"kappa_{kappa:g}", "figure")
    exports.export_figure_data(results[0].final, prefix)
    return summaries


def cmd_sweep(args):
    if args.preset:
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}; have {sorted(PRESETS)}")
        plan = PRESETS[args.preset]
    elif args.config:
        with open(args.config) as fh:
            plan = json.load(fh)
        for key in ("kappas", "ensemble", "base"):
            if key not in plan:
                raise ConfigError(f"sweep config missing key {key!r}")
    else:
        raise ConfigError("sweep needs --preset or --config")
    kappas = list(plan["kappas"])
    if not kappas:
        raise ConfigError("sweep needs at least one kappa")
    out_dir = args.out or "sweep-output"
    os.makedirs(out_dir, exist_ok=True)
    seed0 = args.seed if args.seed is not None else 0
    workers = thread_cap(args.parallel)

    groups, failures = {}, []
    jobs = [(k,) for k in kappas]
    if workers > 1 and len(kappas) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = {ex.submit(sweep_group, plan["base"], k, plan["ensemble"],
                              seed0, out_dir): k for (k,) in jobs}
            for fut, k in futs.items():
                try:
                    groups[k] = fut.result()
                except Exception as e:  # noqa: BLE001 - partial-failure report
                    failures.append({"kappa": k, "error": str(e)})
    else:
        for (k,) in jobs:
            try:
                groups[k] = sweep_group(plan["base"], k, plan["ensemble"],
                                        seed0, out_dir)
            except Exception as e:  # noqa: BLE001
                failures.append({"kappa": k, "error": str(e)})

    fit = {"degenerate": True}
    pairs = [(k, float(np.mean([s["ell_mean"] for s in g if s["ell_mean"]])))
             for k, g in groups.items() if any(s["ell_mean"] for s in g)]
    pairs = [(k, e) for k, e in pairs if k > 0 and np.isfinite(e) and e > 0]
    if len({k for k, _ in pairs}) >= 2:
        expo, pref = diagnostics.batchelor_fit(pairs)
        fit = {"degenerate": False, "exponent": expo, "prefactor": pref}
    report = {
        "kappas": kappas,
        "ensemble": plan["ensemble"],
        "groups": {str(k): g for k, g in groups.items()},
        "batchelor_fit": fit,
        "failures": failures,
    }
    atomic_write_json(os.path.join(out_dir, "sweep.json"), report)
    print(json.dumps({"batchelor_fit": fit, "failures": failures}, indent=2))
    return 0 if not failures else 1


# -------------------------------------------------------------------- check

def cmd_check(args):
    if args.trials < 1:
        raise ConfigError("trials must be >= 1")
    failures = []
    report = {"trials": args.trials}
    for d in (2, 3):
        r = theory.structural_trials(d, args.trials, seed=args.seed or 0)
        report[f"structural_{d}d"] = {
            "min_mu": r.min_mu, "worst_frobenius_margin": r.worst_frobenius_margin}
        failures.extend({"check": f"structural_{d}d", **f} for f in r.failures)
    rng = np.random.default_rng((args.seed or 0) + 1)
    n_interp = min(args.trials, 1000)
    for i in range(n_interp):
        f = spectral.random_shell_field(2, 12, int(rng.integers(1, 12)), rng)
        f.coeffs += 0.1 * (rng.standard_normal(f.coeffs.shape)
                           + 1j * rng.standard_normal(f.coeffs.shape))
        spectral._hermitize(f.coeffs)
        f.coeffs[(12, 12)] = 0.0
        lhs, rhs, ok = theory.interpolation_check(f, -1.0, 0.5, 2.0)
        if not ok:
            failures.append({"check": "interpolation", "lhs": lhs, "rhs": rhs,
                             "trial": i})
    report["interpolation_trials"] = n_interp
    for N in range(1, 17):
        conn, ncomp = theory.adjacency_connectivity(N)
        if not conn:
            failures.append({"check": "adjacency", "N": N, "components": ncomp})
    report["adjacency_N"] = "1..16"
    for s0, g0, s in ((1.0, 2.0, 2.0), (1.0, 2.0, 0.5), (0.5, 1.0, 0.25)):
        lo = theory.mixing_rate_transfer(s0, g0, s)
        if not (0 <= lo <= g0 if s < s0 else lo == g0):
            failures.append({"check": "transfer", "s0": s0, "g0": g0, "s": s,
                             "value": lo})
    report["failures"] = failures
    if args.out:
        atomic_write_json(args.out, report)
    print(json.dumps(report if args.verbose else
                     {"failures": failures, "trials": args.trials}, indent=2))
    return 0 if not failures else 1


# --------------------------------------------------------------- lagrangian

def cmd_lagrangian(args):
    if args.particles < 1 or args.dt <= 0 or args.horizon <= 0:
        raise ConfigError("need particles >= 1, dt > 0, horizon > 0")
    rng = np.random.default_rng(args.seed or 0)
    ens = lagrangian.particle_ensemble(args.dimension, args.particles, rng=rng)
    records = lagrangian.simulate_particles(
        ens, args.dt, args.horizon, args.seed or 0, cadence=args.horizon / 50,
        tracked=min(8, args.particles))
    rates, lam = lagrangian.lyapunov_estimate(ens)
    t, msd = lagrangian.one_point_variance(records)
    det_err = float(np.abs(ens.jacobian_determinant() - 1).max())
    report = {
        "particles": args.particles,
        "horizon": args.horizon,
        "lambda_hat": lam,
        "lambda_positive": lam > 0,
        "rate_quantiles": {q: float(np.quantile(rates, float(q)))
                           for q in ("0.1", "0.5", "0.9")},
        "cap_table": {str(s): lam * s for s in (0.25, 0.5, 1.0, 2.0, 4.0)},
        "det_jacobian_error": det_err,
        "final_mean_sq_displacement": msd[-1].tolist(),
    }
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        atomic_write_json(os.path.join(args.out, "lagrangian.json"), report)
        lagrangian.write_trajectory_csv(
            records, os.path.join(args.out, "trajectories.csv"))
    print(json.dumps(report, indent=2))
    return 0


# ------------------------------------------------------------------ mixing

def cmd_mixing(args):
    cfg = load_run_config(args)
    if cfg.kappa != 0:
        raise ConfigError("mixing rates are defined for the diffusionless "
                          "transport equation; config must have kappa = 0")
    s_grid = tuple(float(s) for s in (args.s_grid or [0.25, 0.5, 1.0, 2.0, 4.0]))
    d = cfg.to_dict()
    d["s_grid"] = s_grid
    cfg = RunConfig.from_dict(d)
    summary, _ = run_single(cfg)
    gam = {s: summary["gamma_s"].get(str(float(s))) for s in s_grid}
    cap = 2 * np.pi**2
    report = {
        "s_grid": list(s_grid),
        "gamma_s": summary["gamma_s"],
        "cap_2pi_sq": cap,
        "cap_respected": all(g is None or g["value"] <= cap + 3 * g["stderr"]
                             for g in gam.values()),
    }
    vals = [(s, g) for s, g in sorted(gam.items()) if g is not None]
    report["nondecreasing_within_2_stderr"] = all(
        b[1]["value"] >= a[1]["value"] - 2 * (a[1]["stderr"] + b[1]["stderr"])
        for a, b in zip(vals, vals[1:]))
    atomic_write_json(os.path.join(cfg.out_dir, "mixing.json"), report)
    print(json.dumps(report, indent=2))
    return 0


# -------------------------------------------------------- export-figure-data

def cmd_export_figure_data(args):
    f = spectral.read_csv(args.snapshot)
    paths = exports.export_figure_data(f, args.out_prefix)
    print(json.dumps(paths, indent=2))
    return 0


# ------------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="batchelor-lab",
                                description="Shear-model scalar mixing experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON run config")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--parallel", type=int, default=1)
        sp.add_argument("--preset", choices=sorted(PRESETS))

    sp = sub.add_parser("run", help="single trajectory")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="kappa ensemble sweep")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("check", help="randomized structural suite")
    sp.add_argument("--trials", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="report JSON path")
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("lagrangian", help="particle statistics and Lyapunov cap")
    sp.add_argument("--particles", type=int, default=10_000)
    sp.add_argument("--dimension", type=int, default=2, choices=(2, 3))
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--horizon", type=float, default=10.0)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="output directory")
    sp.set_defaults(func=cmd_lagrangian)

    sp = sub.add_parser("mixing", help="negative-Sobolev mixing rates (kappa=0)")
    common(sp)
    sp.add_argument("--s-grid", type=float, nargs="+")
    sp.set_defaults(func=cmd_mixing)

    sp = sub.add_parser("export-figure-data", help="figure CSVs from a snapshot")
    sp.add_argument("--snapshot", required=True, help="spectral CSV path")
    sp.add_argument("--out-prefix", required=True)
    sp.set_defaults(func=cmd_export_figure_data)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (NumericalAbort, StepInstability) as e:
        print(f"numerical abort: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
