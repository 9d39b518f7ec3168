"""Oscillator norms, locality checks and the explicit high-temperature threshold.

Local regime (``x = beta J``)::

    g(x)     = sqrt(x) / (1 + sqrt(x))
    zeta(r) <= 7 g^r + 23 u exp(-r^2 / (4 e^2 u^2)) + 112 exp(-pi r / (e u)),  u = sqrt(x)(1 + sqrt(x))
            <= 14 g^r                                                     (x <= 1/200)
    Delta(l) = 14 g^l / (1 - g)
    eta      = x

Long-range regime (``x = beta g``)::

    Delta(l) = K x^((D+1)/2) l^-(nu - 2D - 2),   eta = x

Both regimes share

    kappa = 4 (2 r0 + 1)^(2D) eta + f(r0)
    f(r0) = 5 (2 r0 + 1)^(2D) Delta(r0)
            + (5 + 2 r0 + 2 (2 r0 + 1)^D) sum_{l >= r0} (2l + 1)^(2D - 1) Delta(l)
            + 2 sum_{l >= r0} (l - r0 + 1) (2l + 1)^(2D - 2) Delta(l)

and mixing is certified when ``kappa < LAMBDA``.
"""

import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.special import comb, factorial, zeta as hurwitz_zeta

from . import superop as so
from .dynamics import evolve_observable
from .filters import LAMBDA
from .spin_model import ball, restrict

VALIDATED_BETA_J = 1.0 / 200.0
SERIES_RTOL = 1e-16


def _n_qubits(X):
    d = np.asarray(X).shape[0]
    n = int(round(np.log2(d)))
    if 2**n != d:
        raise ValueError(f"dimension {d} is not a power of two")
    return n


def delta_site(X, a, n=None):
    """``X - 1/2 I_a (x) tr_a X``."""
    n = _n_qubits(X) if n is None else n
    if not 0 <= a < n:
        raise ValueError(f"site {a} outside {n} qubits")
    return np.asarray(X) - so.replace_site_by_identity(X, a, n)


def site_defects(X, n=None):
    n = _n_qubits(X) if n is None else n
    return np.array([so.operator_norm(delta_site(X, a, n)) for a in range(n)])


def oscillator_norm(X, n=None):
    """``sum_a ||delta_a(X)||_inf``."""
    return float(site_defects(X, n).sum())


@dataclass
class OscillatorReport:
    observable_id: str
    times: np.ndarray
    norms: np.ndarray
    site_norms: np.ndarray = field(repr=False)
    fitted_rate: float = None
    fit_ok: bool = False
    certified_rate: float = None
    max_excess: float = None

    @property
    def bound_holds(self):
        return self.max_excess is None or self.max_excess <= 0


def _decay_report(observable_id, times, states, kappa, floor, slack):
    n = _n_qubits(states[0])
    site = np.array([site_defects(o, n) for o in states])
    norms = site.sum(axis=1)
    rep = OscillatorReport(observable_id, times, norms, site)
    keep = norms > floor
    if keep.sum() >= 2 and np.ptp(times[keep]) > 0:
        slope = np.polyfit(times[keep], np.log(norms[keep]), 1)[0]
        rep.fitted_rate = float(-slope)
        rep.fit_ok = rep.fitted_rate > 0
    if kappa is not None and kappa < LAMBDA:
        rate = LAMBDA - kappa
        rep.certified_rate = rate
        bound = np.exp(-rate * times) * norms[0] + slack
        rep.max_excess = float(np.max(norms - bound))
    return rep


def oscillator_decay(Ldag, X, times, kappa=None, observable_id="X", floor=1e-10, slack=1e-8):
    """Oscillator norms of ``exp(t L^dag)(X)`` with a log-linear decay fit.

    The rate is fitted by least squares on ``log |||X_t|||`` over the samples
    above ``floor``. When ``kappa < LAMBDA`` is supplied the report records the
    largest excess of ``|||X_t|||`` over ``exp(-(LAMBDA - kappa) t) |||X||| + slack``.
    ``X`` may also be a list of observables, sharing one propagator per time;
    a list of reports is then returned.
    """
    if isinstance(X, (list, tuple)):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        m = getattr(Ldag, "matrix", Ldag)
        d = X[0].shape[0]
        props = [expm(t * m) for t in times]
        reports = []
        for k, x in enumerate(X):
            states = [so.unvec(P @ so.vec(x), d) for P in props]
            reports.append(_decay_report(f"{observable_id}[{k}]", times, states, kappa, floor, slack))
        return reports
    res = evolve_observable(Ldag, X, times)
    return _decay_report(observable_id, res.times, res.states, kappa, floor, slack)


def lr_defect(H, a, alpha, r, t, long_range=None):
    """Truncation defect of a Heisenberg-evolved Pauli and its Lieb-Robinson bound.

    Returns ``(defect, bound)`` with ``defect`` the operator norm of
    ``e^{-iHt} A e^{iHt} - e^{-iH_r t} A e^{iH_r t}`` for ``H_r`` the restriction
    to the ball of radius ``r`` around ``a``. The bound is ``(2J|t|)^r / r!``
    unless ``long_range = (C_H, v_LR, nu)`` is given, in which case it is
    ``C_H |t|^(D+1) (r - v_LR |t|)^(D - nu)``.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    A = so.site_pauli(alpha, a, H.n)
    Hr = restrict(H, ball(H.lattice, a, r))

    def heis(K):
        E, V = K.eigenvalues, K.eigenvectors
        U = (V * np.exp(-1j * E * t)) @ V.conj().T
        return U @ A @ U.conj().T

    defect = so.operator_norm(heis(H) - heis(Hr))
    if long_range is None:
        bound = (2 * H.J * abs(t)) ** r / factorial(r)
    else:
        C, v, nu = long_range
        D = H.lattice.dimension
        if r <= v * abs(t):
            raise ValueError(f"long-range bound needs r > v_LR |t| (r={r}, v_LR |t|={v * abs(t)})")
        bound = C * abs(t) ** (D + 1) * (r - v * abs(t)) ** (D - nu)
    return float(defect), float(bound)


def generator_distance_lower_bound(L1dag, L2dag, samples=200, seed=0, ascent_steps=5):
    """Sampled lower bound on ``||L1^dag - L2^dag||_{inf -> inf}``."""
    m1 = getattr(L1dag, "matrix", L1dag)
    m2 = getattr(L2dag, "matrix", L2dag)
    if m1.shape != m2.shape:
        raise ValueError("generators act on different spaces")
    n = int(round(np.log2(np.sqrt(m1.shape[0]))))
    return so.sampled_infinity_norm(m1 - m2, n, samples=samples, ascent_steps=ascent_steps, seed=seed)


def g_base(x):
    s = np.sqrt(x)
    return s / (1 + s)


def zeta_bound(r, beta_J):
    """``(three_term, simplified)`` bounds on the truncation distance at radius ``r``."""
    if r < 1 or beta_J <= 0:
        raise ValueError("need r >= 1 and beta_J > 0")
    g = g_base(beta_J)
    u = np.sqrt(beta_J) * (1 + np.sqrt(beta_J))
    three = (7 * g**r + 23 * u * np.exp(-(r**2) / (4 * np.e**2 * u**2))
             + 112 * np.exp(-np.pi * r / (np.e * u)))
    simple = 14 * g**r
    if beta_J <= VALIDATED_BETA_J and three > simple:
        raise ArithmeticError(f"three-term zeta exceeds 14 g^r at r={r}, beta_J={beta_J}")
    return float(three), float(simple)


def delta_tail(r0, beta_J):
    """``Delta(r0) = 14 g^r0 / (1 - g)``."""
    if r0 < 1 or beta_J <= 0:
        raise ValueError("need r0 >= 1 and beta_J > 0")
    if beta_J > VALIDATED_BETA_J:
        warnings.warn(f"beta_J = {beta_J} is above the validated range 1/200", stacklevel=2)
    g = g_base(beta_J)
    return float(14 * g**r0 / (1 - g))


@dataclass
class ThresholdLedger:
    regime: str
    inputs: dict
    base: float
    eta: float
    delta_r0: float
    zeta_table: dict
    terms: dict
    f_r0: float
    kappa: float
    lam: float = LAMBDA
    series_truncation_error: float = 0.0
    series_method: str = ""
    divergent: bool = False

    @property
    def margin(self):
        return self.lam - self.kappa

    @property
    def certified(self):
        return bool(not self.divergent and self.margin > 0)

    def to_dict(self):
        out = asdict(self)
        out["margin"] = self.margin
        out["certified"] = self.certified
        out["zeta_table"] = {str(k): v for k, v in self.zeta_table.items()}
        return out

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _geometric_series(term, r0, max_terms=1_000_000):
    """Sum ``term(l)`` for ``l >= r0`` where the term ratio is eventually non-increasing and < 1.

    Stops when a term falls below ``SERIES_RTOL`` of the partial sum; the tail
    is then bounded by ``t_next / (1 - q)`` with ``q = t_{next+1} / t_next``.
    """
    total = 0.0
    l = r0
    for _ in range(max_terms):
        t = term(l)
        total += t
        nxt, nxt2 = term(l + 1), term(l + 2)
        q = nxt2 / nxt if nxt > 0 else 0.0
        if q < 1 and nxt <= SERIES_RTOL * total:
            return total, (nxt / (1 - q) if nxt > 0 else 0.0)
        l += 1
    raise ArithmeticError("series did not converge")


def _assemble(D, r0, eta, delta, S1, S2):
    side = (2 * r0 + 1) ** D
    terms = {
        "eta_term": 4 * side**2 * eta,
        "delta_term": 5 * side**2 * delta,
        "single_sum_term": (5 + 2 * r0 + 2 * side) * S1,
        "double_sum_term": 2 * S2,
    }
    return terms, (5 + 2 * r0 + 2 * side), 2.0


def kappa_local(D, J, beta, r0, zeta_radii=None):
    """Threshold ledger for a (k, l)-local Hamiltonian with ``J = h k l``."""
    if D < 1 or r0 < 1:
        raise ValueError("need D >= 1 and r0 >= 1")
    x = beta * J
    if x <= 0:
        raise ValueError("beta J must be positive")
    if x > VALIDATED_BETA_J:
        warnings.warn(f"beta_J = {x} is above the validated range 1/200", stacklevel=2)
    g = g_base(x)
    Delta = lambda l: 14 * g**l / (1 - g)
    S1, e1 = _geometric_series(lambda l: (2 * l + 1) ** (2 * D - 1) * Delta(l), r0)
    S2, e2 = _geometric_series(lambda l: (l - r0 + 1) * (2 * l + 1) ** (2 * D - 2) * Delta(l), r0)
    terms, c1, c2 = _assemble(D, r0, x, Delta(r0), S1, S2)
    f = terms["delta_term"] + terms["single_sum_term"] + terms["double_sum_term"]
    kappa = terms["eta_term"] + f
    radii = zeta_radii if zeta_radii is not None else range(1, max(r0, 10) + 1)
    u = np.sqrt(x) * (1 + np.sqrt(x))
    table = {}
    for r in radii:
        three = (7 * g**r + 23 * u * np.exp(-(r**2) / (4 * np.e**2 * u**2))
                 + 112 * np.exp(-np.pi * r / (np.e * u)))
        table[int(r)] = {"three_term": float(three), "simplified": float(14 * g**r)}
    return ThresholdLedger(
        regime="local",
        inputs={"D": D, "J": J, "beta": beta, "r0": r0, "beta_J": x},
        base=float(g), eta=float(x), delta_r0=float(Delta(r0)), zeta_table=table,
        terms={k: float(v) for k, v in terms.items()}, f_r0=float(f), kappa=float(kappa),
        series_truncation_error=float(c1 * e1 + c2 * e2),
        series_method="direct summation with geometric tail bound",
    )


def _power_sums(D, p, r0):
    """Exact ``sum_{l>=r0} (2l+1)^(2D-1) l^-p`` and ``sum (l-r0+1)(2l+1)^(2D-2) l^-p``.

    Binomial expansion of ``(2l+1)^m`` reduces both to Hurwitz zeta values.
    Also returns a rounding-error estimate from the magnitudes involved.
    """
    m1, m2 = 2 * D - 1, 2 * D - 2
    parts1 = [comb(m1, k, exact=True) * 2.0**k * hurwitz_zeta(p - k, r0) for k in range(m1 + 1)]
    parts2 = []
    for k in range(m2 + 1):
        c = comb(m2, k, exact=True) * 2.0**k
        parts2.append(c * hurwitz_zeta(p - k - 1, r0))
        parts2.append(c * (1 - r0) * hurwitz_zeta(p - k, r0))
    S1, S2 = float(sum(parts1)), float(sum(parts2))
    err1 = 8 * np.finfo(float).eps * sum(abs(v) for v in parts1)
    err2 = 8 * np.finfo(float).eps * sum(abs(v) for v in parts2)
    return S1, S2, err1, err2


def kappa_long_range(D, nu, g, K, beta, r0, g0=None):
    """Threshold ledger for power-law interactions with user-supplied ``K``.

    Returns a ledger flagged ``divergent`` (infinite kappa) when ``nu <= 4D + 2``.
    """
    if D < 1 or r0 < 1:
        raise ValueError("need D >= 1 and r0 >= 1")
    x = beta * g
    if not 0 < x < 0.25:
        raise ValueError("need 0 < beta g < 1/4")
    inputs = {"D": D, "nu": nu, "g": g, "g0": g0, "K": K, "beta": beta, "r0": r0, "beta_g": x}
    base = x ** ((D + 1) / 2)
    p = nu - 2 * D - 2
    if nu <= 4 * D + 2:
        return ThresholdLedger("long-range", inputs, float(base), float(x), float(K * base * r0 ** (-p)),
                               {}, {}, np.inf, np.inf, series_method="divergent: nu <= 4D + 2",
                               series_truncation_error=np.inf, divergent=True)
    S1, S2, e1, e2 = _power_sums(D, p, r0)
    S1, S2 = K * base * S1, K * base * S2
    delta = K * base * r0 ** (-p)
    terms, c1, c2 = _assemble(D, r0, x, delta, S1, S2)
    f = terms["delta_term"] + terms["single_sum_term"] + terms["double_sum_term"]
    return ThresholdLedger(
        regime="long-range", inputs=inputs, base=float(base), eta=float(x), delta_r0=float(delta),
        zeta_table={}, terms={k: float(v) for k, v in terms.items()}, f_r0=float(f),
        kappa=float(terms["eta_term"] + f),
        series_truncation_error=float(K * base * (c1 * e1 + c2 * e2)),
        series_method="Hurwitz zeta (exact sum, rounding estimate only)",
    )


@dataclass
class BetaStarResult:
    beta_star: float
    r0: int
    margin: float
    kappa: float
    per_r0: dict

    def to_dict(self):
        return asdict(self)


def beta_star_search(regime="local", D=1, J=1.0, nu=None, g=None, K=1.0, r0_range=range(1, 21), rtol=1e-10):
    """Largest ``beta`` with ``kappa(beta, r0) < LAMBDA`` for some ``r0`` in ``r0_range``.

    ``kappa`` is increasing in ``beta`` at fixed ``r0``, so each ``r0`` gets its
    own bisection; the search interval is the validated range ``beta J <= 1/200``
    (local) or ``beta g < 1/4`` (long-range). Returns ``beta_star = 0`` with
    ``r0 = None`` when nothing certifies.
    """
    if regime == "local":
        hi0 = VALIDATED_BETA_J / J
        kap = lambda b, r: kappa_local(D, J, b, r, zeta_radii=()).kappa
    elif regime == "long-range":
        hi0 = 0.25 / g * (1 - 1e-12)
        kap = lambda b, r: kappa_long_range(D, nu, g, K, b, r).kappa
    else:
        raise ValueError(f"unknown regime {regime!r}")
    per = {}
    for r0 in r0_range:
        if kap(hi0, r0) < LAMBDA:
            per[int(r0)] = hi0
            continue
        lo, hi = 0.0, hi0
        if not kap(hi0 * 1e-12, r0) < LAMBDA:
            per[int(r0)] = 0.0
            continue
        lo = hi0 * 1e-12
        while hi - lo > rtol * hi:
            mid = 0.5 * (lo + hi)
            if kap(mid, r0) < LAMBDA:
                lo = mid
            else:
                hi = mid
        per[int(r0)] = lo
    best_r0 = max(per, key=per.get) if per else None
    if best_r0 is None or per[best_r0] == 0:
        return BetaStarResult(0.0, None, -np.inf, np.inf, per)
    b = per[best_r0]
    k = kap(b, best_r0)
    return BetaStarResult(float(b), best_r0, float(LAMBDA - k), float(k), per)
