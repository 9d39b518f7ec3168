"""Lattice spin Hamiltonians with exact eigensystems and thermal oracles."""

import json
import itertools
from dataclasses import dataclass, field

import numpy as np

from .superop import PAULIS, embed, kron_all, operator_norm

DEFAULT_MAX_SITES = 6
HERMITIAN_RTOL = 1e-12


@dataclass(frozen=True)
class LatticeSpec:
    """Hypercubic lattice ``[0, L]^D`` with the graph (l1) metric.

    Sites are indexed in row-major order of their coordinates, so in one
    dimension site ``i`` has coordinate ``(i,)``.
    """

    dimension: int
    side_length: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        if self.side_length < 0:
            raise ValueError("side_length must be nonnegative")

    @property
    def shape(self):
        return (self.side_length + 1,) * self.dimension

    @property
    def n_sites(self):
        return (self.side_length + 1) ** self.dimension

    @property
    def diameter(self):
        return self.dimension * self.side_length

    def sites(self):
        return list(range(self.n_sites))

    def coords(self, site):
        self._check(site)
        return tuple(int(c) for c in np.unravel_index(site, self.shape))

    def index(self, coords):
        return int(np.ravel_multi_index(tuple(coords), self.shape))

    def distance(self, i, j):
        ci, cj = self.coords(i), self.coords(j)
        return sum(abs(a - b) for a, b in zip(ci, cj))

    def diam(self, sites):
        sites = list(sites)
        if len(sites) <= 1:
            return 0
        return max(self.distance(i, j) for i, j in itertools.combinations(sites, 2))

    def _check(self, site):
        if not 0 <= int(site) < self.n_sites:
            raise ValueError(f"site {site} outside lattice with {self.n_sites} sites")


def chain(n):
    """One-dimensional lattice with ``n`` sites."""
    return LatticeSpec(1, n - 1)


@dataclass(frozen=True)
class InteractionTerm:
    """Hermitian operator ``operator`` acting on ``support`` (listed order)."""

    support: tuple
    operator: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        object.__setattr__(self, "support", support)
        op = np.asarray(self.operator, dtype=complex)
        object.__setattr__(self, "operator", op)
        if not support:
            raise ValueError("interaction term needs a non-empty support")
        if len(set(support)) != len(support):
            raise ValueError(f"repeated site in support {support}")
        k = len(support)
        if op.shape != (2**k, 2**k):
            raise ValueError(f"operator of shape {op.shape} cannot act on {k} sites")
        scale = max(1.0, operator_norm(op))
        if operator_norm(op - op.conj().T) > HERMITIAN_RTOL * scale:
            raise ValueError(f"term on {support} is not Hermitian")

    @property
    def norm(self):
        return operator_norm(self.operator)


def pauli_term(sites, pauli, coeff=1.0):
    """Interaction term ``coeff * pauli`` where ``pauli`` is e.g. ``"ZZ"``."""
    sites = tuple(sites)
    if len(pauli) != len(sites):
        raise ValueError(f"Pauli string {pauli!r} does not match sites {sites}")
    op = coeff * kron_all([PAULIS[c] for c in pauli.upper()])
    return InteractionTerm(sites, op, label=f"{coeff:g}*{pauli.upper()}{list(sites)}")


@dataclass(frozen=True)
class SpinHamiltonian:
    lattice: LatticeSpec
    terms: tuple
    matrix: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    h: float
    k: int
    l: int

    @property
    def n(self):
        return self.lattice.n_sites

    @property
    def dim(self):
        return 2**self.n

    @property
    def J(self):
        return self.h * self.k * self.l

    @property
    def norm(self):
        return float(np.max(np.abs(self.eigenvalues))) if self.eigenvalues.size else 0.0

    @property
    def locality_stats(self):
        return {"h": self.h, "k": self.k, "l": self.l, "J": self.J}


def build_hamiltonian(spec, terms, max_sites=DEFAULT_MAX_SITES):
    """Assemble the dense Hamiltonian ``sum_X h_X`` and diagonalize it."""
    n = spec.n_sites
    if n > max_sites:
        raise ValueError(f"{n} sites exceeds the dense cap of {max_sites}")
    terms = tuple(terms)
    d = 2**n
    mat = np.zeros((d, d), dtype=complex)
    per_site = np.zeros(n, dtype=int)
    for term in terms:
        if not isinstance(term, InteractionTerm):
            raise TypeError("terms must be InteractionTerm instances")
        for s in term.support:
            spec._check(s)
            per_site[s] += 1
        mat += embed(term.operator, term.support, n)
    mat = 0.5 * (mat + mat.conj().T)
    evals, evecs = np.linalg.eigh(mat)
    h = max((t.norm for t in terms), default=0.0)
    k = max((len(t.support) for t in terms), default=0)
    l = int(per_site.max()) if terms else 0
    return SpinHamiltonian(spec, terms, mat, evals, evecs, h, k, l)


def restrict(H, region):
    """Keep only the terms supported inside ``region`` (same Hilbert space)."""
    region = set(int(s) for s in region)
    for s in region:
        H.lattice._check(s)
    kept = [t for t in H.terms if set(t.support) <= region]
    return build_hamiltonian(H.lattice, kept, max_sites=max(H.n, DEFAULT_MAX_SITES))


def ball(spec, a, r):
    """Sites within graph distance ``r`` of ``a``."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    spec._check(a)
    return {b for b in spec.sites() if spec.distance(a, b) <= r}


@dataclass(frozen=True)
class LongRangeProfile:
    g: float
    g0: float
    nu: float

    def validate(self, dimension):
        if self.g <= 0 or self.g0 <= 0:
            raise ValueError("g and g0 must be positive")
        if self.nu <= 2 * dimension:
            raise ValueError(f"nu = {self.nu} <= 2D: no Lieb-Robinson bound applies")


@dataclass
class LongRangeReport:
    radial_sums: np.ndarray  # [site, r] for r = 0..diameter
    radial_bounds: np.ndarray  # [r]
    pair_sums: np.ndarray  # [i, j]
    pair_bounds: np.ndarray  # [i, j]
    violations: list

    @property
    def passed(self):
        return not self.violations


def long_range_check(H, profile, rtol=1e-12):
    """Measure both long-range decay conditions of ``H`` against ``profile``.

    For every site ``i`` and radius ``r``, the summed norm of terms containing
    ``i`` with diameter at most ``r`` is compared to ``g r^(D - nu)``; for every
    pair ``(i, j)`` the summed norm of terms containing both is compared to
    ``g0 (dist(i, j) + 1)^(-nu)``. Radius 0 has an infinite bound.
    """
    lat = H.lattice
    D, n = lat.dimension, lat.n_sites
    radii = np.arange(lat.diameter + 1)
    diams = [lat.diam(t.support) for t in H.terms]
    norms = [t.norm for t in H.terms]
    radial = np.zeros((n, radii.size))
    pair = np.zeros((n, n))
    for t, dm, nm in zip(H.terms, diams, norms):
        for i in t.support:
            radial[i, dm:] += nm
        for i, j in itertools.permutations(t.support, 2):
            pair[i, j] += nm
    with np.errstate(divide="ignore"):
        rb = np.where(radii > 0, profile.g * radii.astype(float) ** (D - profile.nu), np.inf)
    dist = np.array([[lat.distance(i, j) for j in range(n)] for i in range(n)], dtype=float)
    pb = profile.g0 * (dist + 1.0) ** (-profile.nu)
    violations = []
    for i in range(n):
        for ri, r in enumerate(radii):
            if radial[i, ri] > rb[ri] * (1 + rtol):
                violations.append(("radial", i, int(r), float(radial[i, ri]), float(rb[ri])))
        for j in range(n):
            if i != j and pair[i, j] > pb[i, j] * (1 + rtol):
                violations.append(("pair", i, j, float(pair[i, j]), float(pb[i, j])))
    return LongRangeReport(radial, rb, pair, pb, violations)


def gibbs_state(H, beta):
    """Thermal state ``exp(-beta H) / Z`` built from the eigensystem."""
    if not np.isfinite(beta) or beta < 0:
        raise ValueError("beta must be finite and nonnegative")
    E, V = H.eigenvalues, H.eigenvectors
    w = np.exp(-beta * (E - E.min()))
    w /= w.sum()
    rho = (V * w) @ V.conj().T
    return 0.5 * (rho + rho.conj().T)


def partition_value(H, beta):
    return float(np.exp(-beta * H.eigenvalues).sum())


def log_partition(H, beta):
    E = H.eigenvalues
    e0 = E.min()
    return float(-beta * e0 + np.log(np.exp(-beta * (E - e0)).sum()))


def ising_chain(n, coupling=1.0, field=1.0):
    """Transverse-field Ising chain ``sum coupling Z_i Z_{i+1} + field X_i``."""
    terms = [pauli_term((i, i + 1), "ZZ", coupling) for i in range(n - 1)]
    terms += [pauli_term((i,), "X", field) for i in range(n)]
    return build_hamiltonian(chain(n), terms)


def heisenberg_chain(n, coupling=1.0, field=0.5):
    """Heisenberg chain with one two-site ``XX + YY + ZZ`` term per bond and a Z field."""
    xx = kron_all([PAULIS["X"]] * 2) + kron_all([PAULIS["Y"]] * 2) + kron_all([PAULIS["Z"]] * 2)
    terms = [InteractionTerm((i, i + 1), coupling * xx, label=f"heis{[i, i + 1]}") for i in range(n - 1)]
    if field:
        terms += [pauli_term((i,), "Z", field) for i in range(n)]
    return build_hamiltonian(chain(n), terms)


def _term_from_dict(entry):
    sites = entry["sites"]
    if "pauli" in entry:
        return pauli_term(sites, entry["pauli"], entry.get("coeff", 1.0))
    m = entry["matrix"]
    if isinstance(m, dict):
        op = np.asarray(m["real"], dtype=float) + 1j * np.asarray(m.get("imag", 0.0), dtype=float)
    else:
        op = np.asarray(m, dtype=float)
    return InteractionTerm(sites, entry.get("coeff", 1.0) * op)


def model_from_dict(data, max_sites=DEFAULT_MAX_SITES):
    spec = LatticeSpec(int(data["dimension"]), int(data["side_length"]))
    terms = [_term_from_dict(e) for e in data.get("terms", [])]
    return build_hamiltonian(spec, terms, max_sites=data.get("max_sites", max_sites))


def load_model(path):
    """Read a JSON model description file."""
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def model_to_dict(H):
    terms = []
    for t in H.terms:
        terms.append({
            "sites": list(t.support),
            "matrix": {"real": t.operator.real.tolist(), "imag": t.operator.imag.tolist()},
        })
    return {"dimension": H.lattice.dimension, "side_length": H.lattice.side_length, "terms": terms}
