"""Direct-quadrature evaluations of the generator kernels.

These deliberately avoid the eigenbasis closed forms: time evolutions come from
``scipy.linalg.expm`` and integrals from refined trapezoid sums or adaptive
``quad``. They exist to validate the analytic path, not to build generators.
"""

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from .filters import FilterFunctions, _B1_PREFACTOR, _sech
from . import superop as so


def refine_trapezoid(fn, a, b, tol=1e-10, n0=64, max_levels=18):
    """Trapezoid rule on ``[a, b]`` with step halving until converged.

    ``fn`` maps a 1-D array of nodes to an array whose leading axis runs over
    the nodes. Stops when successive refinements differ by less than ``tol``
    (max-abs over all output components).
    """
    nodes = np.linspace(a, b, n0 + 1)
    vals = np.asarray(fn(nodes))
    h = (b - a) / n0
    total = vals.sum(axis=0) - 0.5 * (vals[0] + vals[-1])
    est = h * total
    n = n0
    for _ in range(max_levels):
        mids = a + (np.arange(n) + 0.5) * h
        total = total + np.asarray(fn(mids)).sum(axis=0)
        h /= 2
        n *= 2
        new = h * total
        if np.max(np.abs(new - est)) < tol:
            return new
        est = new
    raise RuntimeError("trapezoid refinement did not converge")


_S_GRID = np.linspace(-16.0, 16.0, 4097)
_S_STEP = _S_GRID[1] - _S_GRID[0]
_S_WEIGHTS = np.full(_S_GRID.size, _S_STEP)
_S_WEIGHTS[[0, -1]] *= 0.5


def b1_convolution(t):
    """``b1(t)`` from its convolution definition on a fine trapezoid grid."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t.size)
    s = _S_GRID[None, :]
    for lo in range(0, t.size, 1024):
        tt = t[lo:lo + 1024, None]
        integrand = _sech(2 * np.pi * s) * np.sin(s - tt) * np.exp(-2 * (tt - s) ** 2)
        out[lo:lo + 1024] = integrand @ _S_WEIGHTS
    return _B1_PREFACTOR * out


def f_hat_quadrature(x, beta, tol=1e-12):
    filt = FilterFunctions(beta)
    fn = lambda t: filt.f(t) * np.exp(-1j * x * t) / np.sqrt(2 * np.pi)
    return complex(refine_trapezoid(fn, -10 * beta, 10 * beta, tol=tol))


def b2_hat_quadrature(x, tol=1e-12):
    fn = lambda t: FilterFunctions.b2(t) * np.exp(-1j * x * t)
    return complex(refine_trapezoid(fn, -10.0, 10.0, tol=tol))


def b1_hat_quadrature(x, tol=1e-11):
    fn = lambda t: b1_convolution(t) * np.exp(-1j * x * t)
    return complex(refine_trapezoid(fn, -10.0, 10.0, tol=tol))


def l1_norm_quadrature(fn, half_width=10.0):
    """``int |fn|`` by adaptive quadrature (the modulus has kinks at sign changes)."""
    g = lambda t: float(np.abs(np.asarray(fn(np.array([t])))[0]))
    return quad(g, -half_width, half_width, points=[0.0], limit=400, epsabs=1e-12)[0]


def gamma_overlap_quadrature(nu1, nu2, beta):
    """Adaptive quadrature of ``int gamma f_hat f_hat dw`` in ``u = beta w``, ``|u| <= 40``."""
    filt = FilterFunctions(beta)

    def integrand(u):
        w = u / beta
        return float(filt.gamma(w) * filt.f_hat(nu1 - w) * np.conj(filt.f_hat(nu2 - w)).real) / beta

    peaks = sorted({-1.0, beta * nu1, beta * nu2})
    val, _ = quad(integrand, -40.0, 40.0, points=[p for p in peaks if -40 < p < 40],
                  limit=400, epsabs=1e-14, epsrel=1e-13)
    return val


def _propagators(h, times):
    """``exp(-i h t)`` for each ``t`` in ``times``."""
    return expm(-1j * np.asarray(times)[:, None, None] * h[None, :, :])


def jump_fourier_quadrature(H, a, alpha, omega, beta, tol=1e-11):
    """``(2 pi)^(-1/2) int e^{iHt} A e^{-iHt} e^{-i omega t} f(t) dt`` on ``|t| <= 10 beta``."""
    filt = FilterFunctions(beta)
    A = so.site_pauli(alpha, a, H.n)
    h = H.matrix

    def fn(t):
        U = _propagators(h, t)  # e^{-iHt}
        At = np.conj(np.swapaxes(U, 1, 2)) @ A @ U
        w = filt.f(t) * np.exp(-1j * omega * t) / np.sqrt(2 * np.pi)
        return At * w[:, None, None]

    return refine_trapezoid(fn, -10 * beta, 10 * beta, tol=tol)


def coherent_quadrature(H, a, alpha, beta, form="physical", tol=1e-10):
    """Nested time integrals defining ``B^beta_{a,alpha}``.

    ``form="physical"`` integrates ``beta^-2 b1(t/beta) b2(t'/beta)`` against
    ``e^{+-iHt}``; ``form="rescaled"`` integrates ``b1(t) b2(t')`` against
    ``e^{+-i beta H t}``. Inner integral first, exactly as nested.
    """
    A = so.site_pauli(alpha, a, H.n)
    if form == "physical":
        h, scale, half = H.matrix, beta, 10.0 * beta
    elif form == "rescaled":
        h, scale, half = beta * H.matrix, 1.0, 10.0
    else:
        raise ValueError(form)

    def inner_fn(tp):
        Um = _propagators(h, tp)  # e^{-ihs}
        Up = np.conj(np.swapaxes(Um, 1, 2))  # e^{+ihs}
        prod = Up @ A @ Um @ Um @ A @ Up
        return prod * (FilterFunctions.b2(tp / scale) / scale)[:, None, None]

    M = refine_trapezoid(inner_fn, -half, half, tol=tol)

    def outer_fn(t):
        Um = _propagators(h, t)
        Up = np.conj(np.swapaxes(Um, 1, 2))
        return (Um @ M @ Up) * (b1_convolution(t / scale) / scale)[:, None, None]

    return refine_trapezoid(outer_fn, -half, half, tol=tol)
