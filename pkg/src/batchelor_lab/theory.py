"""Numerical embodiment of the structural lemmas behind the low-mode bound.

Everything here is finite arithmetic: the Ito drift of log |X|, the
Frobenius-vs-operator norm inequality for the noise matrix, connectivity of
the mode-adjacency graph, the quadratic-variation density of a single
Fourier mode, Sobolev interpolation, and the mixing-rate transfer formulas.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .spectral import SpectralField, project_ball, sobolev_norm


def drift_mu(X, A):
    """Ito drift of log |X| under dX = -gamma X dt + pi A dW (noise part only).

    mu = (pi^2 / 2) |X|^{-2} ( |A|_Fr^2 - 2 |A^T X / |X||^2 ).
    """
    X = np.asarray(X, dtype=float)
    A = np.asarray(A, dtype=float)
    nx2 = float(X @ X)
    if nx2 == 0:
        raise ValueError("drift_mu undefined at X = 0")
    fr2 = float(np.sum(A * A))
    proj2 = float(np.sum((A.T @ X) ** 2)) / nx2
    return 0.5 * np.pi**2 / nx2 * (fr2 - 2.0 * proj2)


def drift_mu_trace(X, A):
    """Trace form (pi^2 / 2) tr(A^T HF(X) A) with HF the Hessian of log |X|... used as oracle."""
    X = np.asarray(X, dtype=float)
    A = np.asarray(A, dtype=float)
    nx2 = float(X @ X)
    if nx2 == 0:
        raise ValueError("drift_mu undefined at X = 0")
    H = (np.eye(len(X)) * nx2 - 2.0 * np.outer(X, X)) / nx2**2
    return 0.5 * np.pi**2 * float(np.trace(A.T @ H @ A))


def frobenius_op_check(A, tol=1e-10):
    """(|A|_Fr^2, 2 |A|_op^2, pass) -- pass iff Fr^2 >= 2 op^2 - tol."""
    A = np.asarray(A, dtype=float)
    fr2 = float(np.sum(A * A))
    op2 = float(np.linalg.eigvalsh(A @ A.T)[-1])
    return fr2, 2.0 * op2, fr2 >= 2.0 * op2 - tol


def operator_norm_sq_batch(A):
    """Largest eigenvalue of A A^T for a batch (n, r, c) of matrices."""
    return np.linalg.eigvalsh(A @ np.swapaxes(A, -1, -2))[..., -1]


def drift_mu_batch(X, A):
    """Vectorized drift_mu over batches X (n, r) and A (n, r, c)."""
    nx2 = np.einsum("nr,nr->n", X, X)
    fr2 = np.einsum("nrc,nrc->n", A, A)
    atx = np.einsum("nrc,nr->nc", A, X)
    proj2 = np.einsum("nc,nc->n", atx, atx) / nx2
    return 0.5 * np.pi**2 / nx2 * (fr2 - 2.0 * proj2)


@dataclass
class StructuralReport:
    """Outcome of the randomized structural suite for one dimension."""

    dimension: int
    trials: int
    min_mu: float
    worst_frobenius_margin: float  # min of |A|_Fr^2 - 2 |A|_op^2
    failures: list  # serialized counterexamples, empty on success

    @property
    def passed(self):
        return not self.failures


def structural_trials(dimension, trials, seed=0, mu_tol=1e-10, chunk=100_000):
    """Randomized check of mu >= 0 and |A|_Fr^2 >= 2 |A|_op^2 on (X, Y) samples."""
    from .models import noise_matrix_batch

    rng = np.random.default_rng(seed)
    min_mu = np.inf
    worst_margin = np.inf
    failures = []
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        X, Y = random_XY(rng, dimension, n)
        A = noise_matrix_batch(Y)
        mu = drift_mu_batch(X, A)
        fr2 = np.einsum("nrc,nrc->n", A, A)
        margin = fr2 - 2.0 * operator_norm_sq_batch(A)
        min_mu = min(min_mu, float(mu.min()))
        worst_margin = min(worst_margin, float(margin.min()))
        bad = (mu < -mu_tol) | (margin < -mu_tol)
        for i in np.flatnonzero(bad)[:10]:
            failures.append({"X": X[i].tolist(), "Y": Y[i].tolist(),
                             "mu": float(mu[i]), "frobenius_margin": float(margin[i])})
        done += n
    return StructuralReport(dimension, trials, min_mu, worst_margin, failures)


# -- mode adjacency graph (2D) -------------------------------------------

def adjacent(k1, k2):
    """The 2D adjacency rule: modes coupled through the shear noise."""
    (a1, b1), (a2, b2) = k1, k2
    return (a1 == a2 != 0 and abs(b1 - b2) == 1) or (abs(a1 - a2) == 1 and b1 == b2 != 0)


def adjacency_edges(N):
    verts = [(k, l) for k in range(-N, N + 1) for l in range(-N, N + 1) if (k, l) != (0, 0)]
    steps = [(0, 1), (0, -1), (1, 0), (-1, 0)]
    edges = set()
    for v in verts:
        for dk, dl in steps:
            w = (v[0] + dk, v[1] + dl)
            if max(abs(w[0]), abs(w[1])) <= N and w != (0, 0) and adjacent(v, w):
                edges.add(frozenset((v, w)))
    return verts, edges


def adjacency_connectivity(N, removed_edges=()):
    """BFS connectivity of the truncated mode graph; returns (connected, component count)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    verts, edges = adjacency_edges(N)
    removed = {frozenset(e) for e in removed_edges}
    nbrs = {v: [] for v in verts}
    for e in edges - removed:
        a, b = tuple(e)
        nbrs[a].append(b)
        nbrs[b].append(a)
    seen = set()
    components = 0
    for start in verts:
        if start in seen:
            continue
        components += 1
        queue = deque([start])
        seen.add(start)
        while queue:
            v = queue.popleft()
            for w in nbrs[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return components == 1, components


def quadratic_variation_density(f: SpectralField, k):
    """d/dt of the summed quadratic variation of Re + Im of f_hat_k (2D).

    2 pi^2 [ k^2 (|f_{k,l-1}|^2 + |f_{k,l+1}|^2)
             + l^2 (|f_{k-1,l}|^2 + |f_{k+1,l}|^2) ],
    the Ito isometry applied to the pi-prefactored Fourier noise terms.
    Neighbors outside the cube count as zero.
    """
    if f.dimension != 2:
        raise ValueError("quadratic_variation_density is stated for 2D fields")
    kk, ll = k

    def mag2(m):
        if any(abs(c) > f.cutoff for c in m):
            return 0.0
        return abs(f.get(m)) ** 2

    return 2.0 * np.pi**2 * (
        kk**2 * (mag2((kk, ll - 1)) + mag2((kk, ll + 1)))
        + ll**2 * (mag2((kk - 1, ll)) + mag2((kk + 1, ll)))
    )


# -- interpolation --------------------------------------------------------

def interpolation_check(f, s1, s2, s3):
    """Sobolev interpolation |f|_{s2} <= |f|_{s1}^a |f|_{s3}^(1-a); returns (lhs, rhs, pass)."""
    if not s1 < s2 < s3:
        raise ValueError("need s1 < s2 < s3")
    lhs = sobolev_norm(f, s2)
    a = (s3 - s2) / (s3 - s1)
    rhs = sobolev_norm(f, s1) ** a * sobolev_norm(f, s3) ** (1.0 - a)
    return lhs, rhs, lhs <= rhs * (1 + 1e-12) + 1e-300


@dataclass
class ApproximantResult:
    approximant: SpectralField
    radius: float
    truncated: bool  # False when R > N and the approximant is f itself
    low_error: float  # |f - f_eps|_{H^{s1}}
    low_bound: float  # eps |f|_{H^{s2}}
    mid_norm: float  # |f_eps|_{H^{s2}}
    mid_bound: float  # |f|_{H^{s2}}
    high_norm: float  # |f_eps|_{H^{s3}}
    high_bound: float  # eps^{-(s3-s2)/(s2-s1)} |f|_{H^{s2}}

    @property
    def passes(self):
        slack = 1 + 1e-12
        return (self.low_error <= self.low_bound * slack + 1e-300
                and self.mid_norm <= self.mid_bound * slack
                and self.high_norm <= self.high_bound * slack + 1e-300)


def low_mode_approximant(f, s1, s2, s3, eps):
    """The cutoff approximant f_eps = Pi_{<= R} f with R = eps^{-1/(s2-s1)}."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if not s1 < s2 < s3:
        raise ValueError("need s1 < s2 < s3")
    R = eps ** (-1.0 / (s2 - s1))
    truncated = R <= f.cutoff
    fe = project_ball(f, R)
    diff = f.copy()
    diff.coeffs = f.coeffs - fe.coeffs
    mid = sobolev_norm(f, s2)
    return ApproximantResult(
        approximant=fe,
        radius=float(R),
        truncated=truncated,
        low_error=sobolev_norm(diff, s1),
        low_bound=eps * mid,
        mid_norm=sobolev_norm(fe, s2),
        mid_bound=mid,
        high_norm=sobolev_norm(fe, s3),
        high_bound=eps ** (-(s3 - s2) / (s2 - s1)) * mid,
    )


# -- mixing-rate transfer arithmetic --------------------------------------

def mixing_rate_transfer(s0, gamma0, s, branch=None):
    """Lower bound on gamma_s from a known gamma_{s0}.

    Branch (i): gamma_s >= gamma_{s0} for s >= s0.  Branch (ii):
    gamma_s >= s/(2 s0 - s) gamma_{s0}, stated for 0 < s < s0 and
    meaningless for s >= 2 s0.  ``branch`` forces "i" or "ii"; by default the
    applicable branch is chosen from s vs s0.
    """
    if s0 <= 0 or s <= 0 or gamma0 < 0:
        raise ValueError("s0, s must be > 0 and gamma0 >= 0")
    if branch not in (None, "i", "ii"):
        raise ValueError(f"branch must be 'i' or 'ii', got {branch!r}")
    if branch == "i" or (branch is None and s >= s0):
        return gamma0
    if s >= 2 * s0:
        raise ValueError("interpolation branch requires s < 2 s0")
    return s / (2.0 * s0 - s) * gamma0


def mixing_rate_cap(lam, s):
    """Upper bound gamma_s < Lambda s from Lagrangian gradient growth."""
    if lam < 0 or s <= 0:
        raise ValueError("need Lambda >= 0 and s > 0")
    return lam * s


def random_XY(rng, dimension, n):
    """Random (X, Y) samples: standard normal plus adversarial corner cases."""
    nx = 4 if dimension == 2 else 6
    ny = 4 if dimension == 2 else 12
    X = rng.standard_normal((n, nx))
    Y = rng.standard_normal((n, ny))
    m = min(n // 10, nx)
    for i in range(m):
        X[i] = 0.0
        X[i, i % nx] = 1.0  # single-coordinate X
        Y[n - 1 - i] = np.sign(rng.standard_normal(ny))  # equal-magnitude Y
    return X, Y
