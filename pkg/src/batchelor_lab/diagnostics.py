"""Observables of simulated trajectories.

Decay/dissipation rates from log-norm time series, the filamentation length
ell = |f| / |grad f|, shell power spectra, the Batchelor-scale fit of ell
against the diffusivity, and mixing-rate estimates from negative Sobolev
norms of diffusionless runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import mode_norm_sq, sobolev_norm

TWO_PI = 2.0 * np.pi


@dataclass
class RateSeries:
    """Time-stamped samples of the log of a chosen norm."""

    t: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        if self.t.ndim != 1 or self.t.shape != self.value.shape:
            raise ValueError("t and value must be matching 1D arrays")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("sample times must be strictly increasing")

    @property
    def span(self):
        return float(self.t[-1] - self.t[0])


def log_norm_series(records, key, sub=None):
    """RateSeries of log(record[key]) (or record[key][sub]) from a diagnostics stream.

    Records carry a "log_scale" offset when the integrator renormalized a
    decaying trajectory; it is added back here so the series tracks the true
    (unrescaled) norm.
    """
    t, v = [], []
    for r in records:
        x = r[key] if sub is None else r[key][sub]
        if x is not None and np.isfinite(x) and x > 0:
            t.append(r["t"])
            v.append(np.log(x) + r.get("log_scale", 0.0))
    return RateSeries(np.array(t), np.array(v))


@dataclass
class RateEstimate:
    value: float
    stderr: float
    mode: str


def _ls_slope(t, y):
    """Least-squares slope with its standard error."""
    n = len(t)
    tm, ym = t.mean(), y.mean()
    stt = np.sum((t - tm) ** 2)
    if stt == 0:
        return np.nan, np.inf
    slope = np.sum((t - tm) * (y - ym)) / stt
    resid = y - ym - slope * (t - tm)
    dof = max(n - 2, 1)
    se = np.sqrt(np.sum(resid**2) / dof / stt)
    return float(slope), float(se)


def decay_rate(series: RateSeries, mode="global-slope", window=None):
    """Slope estimators for a log-norm series.

    ``global-slope``: least-squares slope over the tail half of the samples.
    ``limsup-proxy``: maximum of sliding-window slopes (default window span/10),
    the finite-time surrogate for a limsup growth bound.
    Returns None when there are fewer than 2 samples or the span is below the
    window.
    """
    if len(series.t) < 2:
        return None
    if mode == "global-slope":
        cut = len(series.t) // 2
        t, y = series.t[cut:], series.value[cut:]
        if len(t) < 2:
            t, y = series.t, series.value
        slope, se = _ls_slope(t, y)
        return RateEstimate(slope, se, mode)
    if mode == "limsup-proxy":
        w = window if window is not None else series.span / 10.0
        if w <= 0 or series.span < w:
            return None
        best = None
        j = 0
        for i in range(len(series.t)):
            j = max(j, i)
            while j < len(series.t) - 1 and series.t[j] < series.t[i] + w:
                j += 1
            if series.t[j] < series.t[i] + w:
                break
            slope, se = _ls_slope(series.t[i: j + 1], series.value[i: j + 1])
            if best is None or slope > best[0]:
                best = (slope, se)
        if best is None:
            return None
        return RateEstimate(best[0], best[1], mode)
    raise ValueError(f"unknown mode {mode!r}")


def filamentation_length(f):
    """ell(f) = |f|_{L2} / |grad f|_{L2}; None marker for the zero field."""
    l2 = sobolev_norm(f, 0.0)
    if l2 == 0:
        return None
    return l2 / (TWO_PI * sobolev_norm(f, 1.0))


@dataclass
class SpectrumProfile:
    """Shell-summed power |f_hat|^2, binned by round(|k|)."""

    radii: np.ndarray
    power: np.ndarray

    def total(self):
        return float(self.power.sum())


def power_spectrum(f):
    r = np.rint(np.sqrt(mode_norm_sq(f.dimension, f.cutoff))).astype(int)
    power = np.abs(f.coeffs) ** 2
    power[(f.cutoff,) * f.dimension] = 0.0
    nbins = r.max() + 1
    binned = np.bincount(r.ravel(), weights=power.ravel(), minlength=nbins)
    return SpectrumProfile(np.arange(nbins), binned)


def spectrum_radius(profile: SpectrumProfile, q):
    """Smallest shell radius holding at least fraction q of the total power."""
    total = profile.total()
    if total == 0:
        raise ValueError("spectrum_radius undefined for zero power")
    cum = np.cumsum(profile.power) / total
    return int(profile.radii[np.searchsorted(cum, q)])


def batchelor_fit(pairs):
    """Fit ell = prefactor * kappa^exponent to (kappa, mean ell) pairs.

    Returns (exponent, prefactor).  Raises for degenerate input (all kappa
    equal or fewer than 2 distinct values).
    """
    kappas = np.array([p[0] for p in pairs], dtype=float)
    ells = np.array([p[1] for p in pairs], dtype=float)
    if len(set(kappas.tolist())) < 2:
        raise ValueError("batchelor_fit needs at least 2 distinct kappa values")
    slope, intercept = np.polyfit(np.log(kappas), np.log(ells), 1)
    return float(slope), float(np.exp(intercept))


def tail_average(t, values, burn_in_fraction=0.2):
    """Time average over the tail after a burn-in fraction of the span."""
    t = np.asarray(t, float)
    values = np.asarray(values, float)
    t0 = t[0] + burn_in_fraction * (t[-1] - t[0])
    mask = (t >= t0) & np.isfinite(values)
    if not mask.any():
        return float("nan")
    return float(np.trapezoid(values[mask], t[mask]) / (t[mask][-1] - t[mask][0])) \
        if mask.sum() > 1 else float(values[mask][0])


def gamma_s_estimate(series: RateSeries, s, floor_clearance=1.0):
    """Mixing rate estimate: negated decay slope of log |f_t|_{H^{-s}}.

    Finite truncation gives the H^{-s} series an aliasing floor; samples
    within ``floor_clearance`` (in log units) of the late-time floor are
    discarded before fitting so the fit sees the clean exponential stretch.
    Returns None when too few samples survive.
    """
    if s <= 0:
        raise ValueError("s must be > 0")
    if len(series.t) < 2:
        return None
    n_tail = max(1, len(series.t) // 10)
    floor = np.median(series.value[-n_tail:])
    keep = series.value > floor + floor_clearance
    if keep.sum() < max(4, len(series.t) // 20):
        keep = np.ones_like(keep, dtype=bool)  # no plateau reached
    t, y = series.t[keep], series.value[keep]
    est = decay_rate(RateSeries(t, y), "global-slope")
    if est is None:
        return None
    return RateEstimate(-est.value, est.stderr, "gamma_s")
