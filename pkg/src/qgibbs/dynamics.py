"""Semigroup evolution, fixed points, gaps and mixing times of dense generators."""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, sqrtm

from . import superop as so

STATE_TOL = 1e-9
NULL_THRESHOLD = 1e-8


@dataclass
class EvolutionResult:
    times: np.ndarray
    states: list = field(repr=False)
    trace_distances: np.ndarray = None
    min_eigenvalues: np.ndarray = None
    trace_errors: np.ndarray = None

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "trace_distance", "min_eigenvalue", "trace_error"])
            td = self.trace_distances if self.trace_distances is not None else [np.nan] * len(self.times)
            for row in zip(self.times, td, self.min_eigenvalues, self.trace_errors):
                w.writerow([repr(float(x)) for x in row])


def _matrix(L):
    return getattr(L, "matrix", L)


def _check_times(times):
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending")
    return times


def _check_state(rho, tol=STATE_TOL):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("state must be a square matrix")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("state is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError("state does not have unit trace")
    if np.linalg.eigvalsh(so.hermitian_part(rho)).min() < -tol:
        raise ValueError("state is not positive semidefinite")
    return rho


def propagator(L, t, method="expm"):
    """Superoperator ``exp(t L)``; ``method="eig"`` uses the superoperator spectrum."""
    m = _matrix(L)
    if method == "expm":
        return expm(t * m)
    if method == "eig":
        w, v = np.linalg.eig(m)
        return (v * np.exp(t * w)) @ np.linalg.inv(v)
    raise ValueError(f"unknown method {method!r}")


def _propagate(m, vecs, times, method):
    """Columns of ``vecs`` evolved to every time; returns ``[time, dim, k]``."""
    if method == "eig":
        w, v = np.linalg.eig(m)
        coeffs = np.linalg.solve(v, vecs)
        return np.stack([v @ (np.exp(t * w)[:, None] * coeffs) for t in times])
    if method != "expm":
        raise ValueError(f"unknown method {method!r}")
    out = []
    for t in times:
        out.append(expm(t * m) @ vecs)
    return np.stack(out)


def evolve_state(L, rho0, times, method="expm", reference=None):
    """States ``exp(t L)(rho0)`` with trace distances to ``reference`` if given."""
    times = _check_times(times)
    rho0 = _check_state(rho0)
    d = rho0.shape[0]
    vecs = _propagate(_matrix(L), so.vec(rho0)[:, None], times, method)[:, :, 0]
    states = [so.unvec(v, d) for v in vecs]
    states[0] = rho0.copy() if times[0] == 0 else states[0]
    mins = np.array([np.linalg.eigvalsh(so.hermitian_part(s)).min() for s in states])
    terr = np.array([abs(np.trace(s) - 1) for s in states])
    td = None
    if reference is not None:
        td = np.array([so.trace_norm(s - reference) for s in states])
    return EvolutionResult(times, states, td, mins, terr)


def evolve_observable(Ldag, X, times, method="expm"):
    """Heisenberg-picture evolution ``exp(t L^dag)(X)``; ``Ldag`` is already the adjoint."""
    times = _check_times(times)
    X = np.asarray(X, dtype=complex)
    d = X.shape[0]
    vecs = _propagate(_matrix(Ldag), so.vec(X)[:, None], times, method)[:, :, 0]
    obs = [so.unvec(v, d) for v in vecs]
    if times[0] == 0:
        obs[0] = X.copy()
    mins = np.array([np.linalg.eigvalsh(so.hermitian_part(o)).min() for o in obs])
    terr = np.array([abs(np.trace(o) - np.trace(X)) for o in obs])
    return EvolutionResult(times, obs, None, mins, terr)


def fixed_point(L, threshold=NULL_THRESHOLD):
    """Unique stationary state from the null space of the superoperator.

    Raises if more than one singular value falls below ``threshold`` (relative
    to the largest) or if none does.
    """
    m = _matrix(L)
    d = int(round(np.sqrt(m.shape[0])))
    _, s, vh = np.linalg.svd(m)
    scale = max(s[0], 1.0)
    null = np.flatnonzero(s <= threshold * scale)
    if null.size != 1:
        raise np.linalg.LinAlgError(f"null space has dimension {null.size} (smallest singular values {s[-3:]})")
    rho = so.unvec(vh[null[0]].conj(), d)
    rho = rho / np.trace(rho)
    return so.hermitian_part(rho)


def spectral_gap(L, return_spectrum=False, zero_tol=1e-9):
    """``-max Re`` over the nonzero part of the spectrum (one zero mode removed)."""
    w = np.linalg.eigvals(_matrix(L))
    order = np.argsort(-w.real)
    w = w[order]
    rest = w[1:] if abs(w[0]) <= zero_tol * max(1.0, np.abs(w).max()) else w
    gap = float(-rest.real.max()) if rest.size else 0.0
    return (gap, w) if return_spectrum else gap


def default_initial_set(n, seed=0, haar=20):
    """All computational basis states followed by ``haar`` seeded Haar-random pure states."""
    d = 2**n
    states = []
    for j in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1
        states.append(e)
    rng = np.random.default_rng(seed)
    states += [so.random_pure_state(d, rng) for _ in range(haar)]
    return states


class _VectorPropagator:
    """``exp(t L) @ vecs`` for many ``t``: spectral when the eigenbasis is well conditioned."""

    def __init__(self, m, vecs, max_cond=1e6):
        self.m, self.vecs = m, vecs
        w, v = np.linalg.eig(m)
        self.spectral = np.linalg.cond(v) < max_cond
        if self.spectral:
            self.w, self.v = w, v
            self.coeffs = np.linalg.solve(v, vecs)

    def __call__(self, t, exact=False):
        if self.spectral and not exact:
            return self.v @ (np.exp(t * self.w)[:, None] * self.coeffs)
        return expm(t * self.m) @ self.vecs


def _max_distance(prop, sigma, t, exact=False):
    d = sigma.shape[0]
    out = prop(t, exact)
    return max(so.trace_norm(so.unvec(out[:, k], d) - sigma) for k in range(out.shape[1]))


def mixing_time(L, eps, initial_set=None, sigma=None, seed=0, t_max=1e3, ratio=1.25, rtol=1e-3):
    """Smallest ``t`` with ``max_rho ||exp(tL) rho - sigma||_1 <= eps``.

    A geometric grid (ratio 1.25, starting at ``1e-3 / ||L||``) brackets the
    crossing, then bisection narrows it to ``rtol`` relative width; the upper
    end of the final bracket is returned. Grid evaluations use the superoperator
    eigenbasis when it is well conditioned, and the returned bracket is
    re-checked with scaling-and-squaring. Raises ``RuntimeError`` if ``t_max``
    is reached first.
    """
    if not 0 < eps <= 2:
        raise ValueError("eps must lie in (0, 2]")
    m = _matrix(L)
    d = int(round(np.sqrt(m.shape[0])))
    if sigma is None:
        sigma = fixed_point(m)
    if initial_set is None:
        initial_set = default_initial_set(int(round(np.log2(d))), seed)
    vecs = np.stack([so.vec(r) for r in initial_set], axis=1)
    prop = _VectorPropagator(m, vecs)
    dist = lambda t, exact=False: _max_distance(prop, sigma, t, exact)
    if dist(0.0) <= eps:
        return 0.0
    lo, hi = 0.0, 1e-3 / max(np.abs(m).sum(axis=0).max(), 1e-300)
    while dist(hi) > eps:
        lo, hi = hi, hi * ratio
        if hi > t_max:
            raise RuntimeError(f"distance still above {eps} at t_max = {t_max}")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if dist(mid) > eps:
            lo = mid
        else:
            hi = mid
    if prop.spectral and not (dist(hi, True) <= eps < (dist(lo, True) if lo > 0 else np.inf)):
        raise RuntimeError("spectral and scaling-and-squaring evaluations disagree at the crossing")
    return hi


def kms_inner(X, Y, sigma_half):
    return np.trace(X.conj().T @ sigma_half @ Y @ sigma_half)


def kms_residual(L, sigma, samples=50, seed=0, norm_samples=200):
    """Largest normalized detailed-balance defect over random Hermitian pairs.

    Defect ``|<X, L^dag Y>_sigma - <L^dag X, Y>_sigma|`` divided by
    ``||X|| ||Y|| ||L^dag||`` with the last factor the sampled infinity norm.
    """
    sigma = np.asarray(sigma, dtype=complex)
    if np.linalg.eigvalsh(so.hermitian_part(sigma)).min() <= 1e-14:
        raise ValueError("sigma must be full rank")
    m = _matrix(L)
    mdag = m.conj().T
    d = sigma.shape[0]
    n = int(round(np.log2(d)))
    sh = sqrtm(sigma)
    sh = so.hermitian_part(sh)
    lnorm = so.sampled_infinity_norm(mdag, n, samples=norm_samples, seed=seed)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        X = so.random_hermitian(d, rng)
        Y = so.random_hermitian(d, rng)
        LX = so.unvec(mdag @ so.vec(X), d)
        LY = so.unvec(mdag @ so.vec(Y), d)
        defect = abs(kms_inner(X, LY, sh) - kms_inner(LX, Y, sh))
        worst = max(worst, defect / (so.operator_norm(X) * so.operator_norm(Y) * max(lnorm, 1e-300)))
    return float(worst)
