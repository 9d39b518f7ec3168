"""Exact detailed-balanced Gibbs-sampling Lindbladians.

Each site ``a`` contributes

    L_a(rho) = -i [B_a, rho]
               + w * sum_alpha int gamma(w) (A(w) rho A(w)^dag - 1/2 {A(w)^dag A(w), rho}) dw

with ``A = A^{a, alpha}`` the Pauli matrices on ``a`` and ``A(w)`` their
Gaussian-filtered operator Fourier transforms. Everything is assembled in the
eigenbasis of ``H`` where ``A(w)_{jk} = A_{jk} f_hat(w - (E_j - E_k))``, so the
frequency integrals collapse to the closed-form kernel ``gamma_overlap``.

Two normalisations are fixed here:

* ``SITE_WEIGHT = 1/4`` multiplies every site generator. With it the
  ``beta -> 0`` limit is exactly ``LAMBDA (1/2 I_a (x) tr_a - id)``; without it
  the three Pauli channels sum to four times that rate.
* ``COHERENT_SCALE = 2`` multiplies the coherent term obtained from the
  ``b1``/``b2`` profiles. The profiles as written give exactly half of the
  Hamiltonian ``(i/2) tanh(beta nu / 4) R_nu`` that KMS detailed balance
  requires (``R = sum int gamma A(w)^dag A(w)``); with the factor two the Gibbs
  state is an exact fixed point.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import superop as so
from .filters import LAMBDA, FilterFunctions, gamma_overlap, gamma_weighted_f_hat
from .spin_model import ball, restrict

SITE_WEIGHT = 0.25
COHERENT_SCALE = 2.0


@dataclass(frozen=True)
class GeneratorMatrix:
    """Dense superoperator on column-stacked density matrices.

    ``heisenberg`` marks the adjoint (observable) picture.
    """

    matrix: np.ndarray
    beta: float
    scope: str = "full"
    site: int = None
    radius: int = None
    heisenberg: bool = False

    @property
    def dim(self):
        return int(round(np.sqrt(self.matrix.shape[0])))

    @property
    def n_qubits(self):
        return int(round(np.log2(self.dim)))

    def adjoint(self):
        return replace(self, matrix=self.matrix.conj().T, heisenberg=not self.heisenberg)

    def apply(self, x):
        return so.unvec(self.matrix @ so.vec(x), self.dim)

    def __add__(self, other):
        scope = self.scope if self.scope == other.scope else "sum"
        return replace(self, matrix=self.matrix + other.matrix, scope=scope, site=None, radius=None)

    def __sub__(self, other):
        return replace(self, matrix=self.matrix - other.matrix, scope="difference", site=None, radius=None)

    def save(self, path):
        """Write the matrix as text: a header line then row-major ``re im`` pairs."""
        m = self.matrix
        with open(path, "w") as fh:
            fh.write(f"# rows={m.shape[0]} cols={m.shape[1]} beta={self.beta!r} scope={self.scope} "
                     f"heisenberg={int(self.heisenberg)} vec=column-stacked\n")
            for row in m:
                fh.write(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row))
                fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            header = fh.readline()
            meta = dict(kv.split("=") for kv in header[1:].split())
            rows = [np.array(line.split(), dtype=float) for line in fh if line.strip()]
        arr = np.array(rows)
        mat = arr[:, 0::2] + 1j * arr[:, 1::2]
        return cls(mat, float(meta["beta"]), meta["scope"], heisenberg=bool(int(meta["heisenberg"])))


def _filters(filters):
    return filters if isinstance(filters, FilterFunctions) else FilterFunctions(filters)


def _bohr(E):
    return E[:, None] - E[None, :]


def jump_fourier(H, a, alpha, omega, filters):
    """Filtered jump ``A^{a,alpha}(omega)`` in the computational basis."""
    filters = _filters(filters)
    E, V = H.eigenvalues, H.eigenvectors
    A = V.conj().T @ so.site_pauli(alpha, a, H.n) @ V
    Aw = A * filters.f_hat(omega - _bohr(E))
    return V @ Aw @ V.conj().T


def integrated_jump(H, a, alpha, filters):
    """``int gamma(w) A^{a,alpha}(w) dw`` in the computational basis."""
    filters = _filters(filters)
    E, V = H.eigenvalues, H.eigenvectors
    A = V.conj().T @ so.site_pauli(alpha, a, H.n) @ V
    return V @ (A * gamma_weighted_f_hat(_bohr(E), filters)) @ V.conj().T


def _dissipator_tensor(A, nu, filters):
    """Eigenbasis 4-tensor of ``int gamma D_w dw`` for one jump operator."""
    d = A.shape[0]
    # transition part: out[j,l] += A_jk conj(A_lm) K(nu_jk, nu_lm) rho[k,m]
    kern = gamma_overlap(nu[:, None, :, None], nu[None, :, None, :], filters)
    t4 = np.einsum("jk,lm->jlkm", A, A.conj()) * kern
    # R_km = sum_j conj(A_jk) A_jm K(nu_jk, nu_jm)
    R = np.einsum("jk,jm,jkm->km", A.conj(), A, gamma_overlap(nu[:, :, None], nu[:, None, :], filters))
    eye = np.eye(d)
    t4 -= 0.5 * np.einsum("jk,lm->jlkm", R, eye)
    t4 -= 0.5 * np.einsum("jk,lm->jlkm", eye, R.T)
    return t4, R


def _coherent_eigen(A, E, beta):
    """Eigenbasis matrix of the b1/b2 coherent integral for one Pauli."""
    nu = _bohr(E)
    # B_jk = b1_hat(beta nu_jk) sum_m A_jm A_mk b2_hat(beta (2 E_m - E_j - E_k))
    y = beta * (2 * E[None, :, None] - E[:, None, None] - E[None, None, :])
    inner = np.einsum("jm,mk,jmk->jk", A, A, FilterFunctions.b2_hat(y))
    return FilterFunctions.b1_hat(beta * nu) * inner


def coherent_term(H, a, alpha, filters):
    """Coherent integral ``B^beta_{a,alpha}`` exactly as the b1/b2 profiles define it."""
    filters = _filters(filters)
    E, V = H.eigenvalues, H.eigenvectors
    A = V.conj().T @ so.site_pauli(alpha, a, H.n) @ V
    B = V @ _coherent_eigen(A, E, filters.beta) @ V.conj().T
    return so.hermitian_part(B)


def _site_tensor(H, a, filters, parts=("dissipator", "coherent")):
    """Eigenbasis 4-tensor of the (weighted) site generator."""
    E = H.eigenvalues
    V = H.eigenvectors
    nu = _bohr(E)
    d = E.size
    t4 = np.zeros((d, d, d, d), dtype=complex)
    B = np.zeros((d, d), dtype=complex)
    for alpha in (1, 2, 3):
        A = V.conj().T @ so.site_pauli(alpha, a, H.n) @ V
        if "dissipator" in parts:
            t4 += _dissipator_tensor(A, nu, filters)[0]
        if "coherent" in parts:
            B += _coherent_eigen(A, E, filters.beta)
    if "coherent" in parts:
        B = COHERENT_SCALE * so.hermitian_part(B)
        eye = np.eye(d)
        t4 += -1j * (np.einsum("jk,lm->jlkm", B, eye) - np.einsum("jk,lm->jlkm", eye, B.T))
    return SITE_WEIGHT * t4


def assemble_dissipator_site(H, a, filters):
    """Frequency-integrated dissipator of site ``a`` (all three Paulis)."""
    filters = _filters(filters)
    t4 = _site_tensor(H, a, filters, parts=("dissipator",))
    m = so.tensor_to_matrix(so.rotate_tensor(t4, H.eigenvectors))
    return GeneratorMatrix(m, filters.beta, "dissipator", site=a)


def jump_part_site(H, a, filters):
    """Superoperator ``rho -> w sum_alpha int gamma A(w) rho A(w)^dag dw`` (completely positive)."""
    filters = _filters(filters)
    E, V = H.eigenvalues, H.eigenvectors
    nu = _bohr(E)
    kern = gamma_overlap(nu[:, None, :, None], nu[None, :, None, :], filters)
    t4 = 0
    for alpha in (1, 2, 3):
        A = V.conj().T @ so.site_pauli(alpha, a, H.n) @ V
        t4 = t4 + np.einsum("jk,lm->jlkm", A, A.conj()) * kern
    return so.tensor_to_matrix(so.rotate_tensor(SITE_WEIGHT * t4, V))


def assemble_coherent_site(H, a, filters):
    """Hermitian ``B_a`` entering ``L_a`` as ``-i [B_a, .]``.

    Equals ``SITE_WEIGHT * COHERENT_SCALE * sum_alpha coherent_term(H, a, alpha)``.
    """
    filters = _filters(filters)
    E, V = H.eigenvalues, H.eigenvectors
    B = 0
    for alpha in (1, 2, 3):
        A = V.conj().T @ so.site_pauli(alpha, a, H.n) @ V
        B = B + _coherent_eigen(A, E, filters.beta)
    B = SITE_WEIGHT * COHERENT_SCALE * (V @ B @ V.conj().T)
    return so.hermitian_part(B)


def depolarizing_generator(n, site=None):
    """``LAMBDA * (1/2 I_a (x) tr_a - id)`` summed over ``site`` (or all sites)."""
    sites = range(n) if site is None else [site]
    d = 2**n
    m = np.zeros((d * d, d * d), dtype=complex)
    eye = np.eye(d * d)
    for a in sites:
        twirl = sum(so.sprepost(p, p) for p in
                    (so.embed(q, [a], n) for q in (so.SIGMA_I, so.SIGMA_X, so.SIGMA_Y, so.SIGMA_Z)))
        m += LAMBDA * (0.25 * twirl - eye)
    scope = "depolarizing" if site is None else "depolarizing-site"
    return GeneratorMatrix(m, 0.0, scope, site=site)


def local_generator(H, a, filters):
    """Site generator ``L_a``; ``filters`` may be a FilterFunctions or a bare beta."""
    beta = filters.beta if isinstance(filters, FilterFunctions) else float(filters)
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if beta == 0:
        g = depolarizing_generator(H.n, a)
        return replace(g, scope="site")
    filters = _filters(filters)
    t4 = _site_tensor(H, a, filters)
    m = so.tensor_to_matrix(so.rotate_tensor(t4, H.eigenvectors))
    return GeneratorMatrix(m, beta, "site", site=a)


def truncated_local_generator(H, a, r, filters):
    """``L_a`` built from ``H`` restricted to the ball of radius ``r`` around ``a``."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    Hr = restrict(H, ball(H.lattice, a, r))
    g = local_generator(Hr, a, filters)
    return replace(g, scope="truncated", radius=r)


def full_generator(H, filters):
    """``L = sum_a L_a`` assembled in one eigenbasis pass."""
    beta = filters.beta if isinstance(filters, FilterFunctions) else float(filters)
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if beta == 0:
        return depolarizing_generator(H.n)
    filters = _filters(filters)
    t4 = sum(_site_tensor(H, a, filters) for a in range(H.n))
    m = so.tensor_to_matrix(so.rotate_tensor(t4, H.eigenvectors))
    return GeneratorMatrix(m, beta, "full")
