"""Dense operator and superoperator utilities.

Conventions used throughout the package:

* qubit 0 is the leftmost tensor factor;
* density matrices are vectorized by column stacking, so that
  ``vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)``;
* a superoperator is stored as a ``(d*d, d*d)`` matrix acting on ``vec(rho)``.
  Internally it is sometimes handled as a 4-tensor ``T[j, l, k, m]`` with
  ``out[j, l] = sum_{k,m} T[j, l, k, m] * rho[k, m]``.
"""

from functools import reduce

import numpy as np

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULIS = {"I": SIGMA_I, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}
# jump index alpha = 1, 2, 3
JUMP_PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def kron_all(ops):
    return reduce(np.kron, ops, np.eye(1, dtype=complex))


def pauli_string(label):
    """Dense matrix of a Pauli string such as ``"XZI"`` (site 0 first)."""
    return kron_all([PAULIS[c] for c in label.upper()])


def embed(op, sites, n):
    """Embed ``op`` acting on ``sites`` (in that order) into ``n`` qubits."""
    sites = list(sites)
    k = len(sites)
    op = np.asarray(op, dtype=complex)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} sites")
    if len(set(sites)) != k:
        raise ValueError("repeated site in support")
    if any(s < 0 or s >= n for s in sites):
        raise ValueError(f"site out of range for {n} qubits: {sites}")
    rest = [s for s in range(n) if s not in sites]
    full = np.kron(op, np.eye(2 ** (n - k), dtype=complex))
    order = sites + rest
    # axes of `full` follow `order`; permute back to natural site order
    perm = np.argsort(order)
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(2**n, 2**n)


def site_pauli(alpha, site, n):
    """Pauli ``alpha`` in {1, 2, 3} (x, y, z) on ``site`` of ``n`` qubits."""
    return embed(JUMP_PAULIS[alpha - 1], [site], n)


def partial_trace_site(x, site, n):
    """Trace out one qubit; returns an operator on the remaining ``n - 1``."""
    t = np.asarray(x).reshape((2,) * (2 * n))
    return np.trace(t, axis1=site, axis2=n + site).reshape(2 ** (n - 1), 2 ** (n - 1))


def replace_site_by_identity(x, site, n):
    """``1/2 I_site (x) tr_site(x)`` with the identity reinserted at ``site``."""
    t = np.asarray(x).reshape((2,) * (2 * n))
    red = np.trace(t, axis1=site, axis2=n + site)
    out = 0.5 * np.multiply.outer(red, np.eye(2))
    # red has 2n-2 axes; new axes (i_site, j_site) sit at the end
    m = n - 1
    axes = list(range(m))
    axes.insert(site, 2 * m)
    col = list(range(m, 2 * m))
    col.insert(site, 2 * m + 1)
    return out.transpose(axes + col).reshape(2**n, 2**n)


def vec(rho):
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, d=None):
    v = np.asarray(v)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    return v.reshape(d, d, order="F")


def spre(a):
    """Superoperator of ``rho -> a @ rho``."""
    return np.kron(np.eye(a.shape[0]), a)


def spost(b):
    """Superoperator of ``rho -> rho @ b``."""
    return np.kron(b.T, np.eye(b.shape[0]))


def sprepost(a, b):
    """Superoperator of ``rho -> a @ rho @ b``."""
    return np.kron(b.T, a)


def commutator_superop(h):
    """Superoperator of ``rho -> -i [h, rho]``."""
    return -1j * (spre(h) - spost(h))


def tensor_to_matrix(t4):
    d = t4.shape[0]
    return t4.transpose(1, 0, 3, 2).reshape(d * d, d * d)


def matrix_to_tensor(m):
    d = int(round(np.sqrt(m.shape[0])))
    return m.reshape(d, d, d, d).transpose(1, 0, 3, 2)


def rotate_tensor(t4, v):
    """Change basis ``rho = v @ rho_e @ v^dag`` for a superoperator 4-tensor.

    ``t4`` acts on operators written in the basis given by the columns of
    ``v``; the result acts on operators in the standard basis.
    """
    vc = v.conj()
    out = np.tensordot(v, t4, axes=(1, 0))  # j j'
    out = np.tensordot(vc, out, axes=(1, 1)).transpose(1, 0, 2, 3)  # l l'
    out = np.tensordot(out, vc, axes=(2, 1)).transpose(0, 1, 3, 2)  # k k'
    out = np.tensordot(out, v, axes=(3, 1))  # m m'
    return out


def choi_matrix(superop):
    """Choi matrix ``sum_{ij} |i><j| (x) S(|i><j|)`` of a superoperator."""
    t4 = matrix_to_tensor(superop)  # out (j,l), in (k,m)
    d = t4.shape[0]
    # C[(k, j), (m, l)] = S(|k><m|)[j, l]
    return t4.transpose(2, 0, 3, 1).reshape(d * d, d * d)


def conditional_cp_spectrum(superop):
    """Eigenvalues of the Choi matrix compressed to the complement of ``sum_k |kk>``.

    A Hermiticity-preserving superoperator generates a completely positive
    semigroup iff these are all nonnegative.
    """
    c = hermitian_part(choi_matrix(superop))
    d = int(round(np.sqrt(c.shape[0])))
    omega = vec(np.eye(d)) / np.sqrt(d)
    q = np.eye(d * d) - np.outer(omega, omega.conj())
    return np.linalg.eigvalsh(hermitian_part(q @ c @ q))[1:]


def operator_norm(x):
    return float(np.linalg.norm(x, ord=2))


def trace_norm(x):
    x = np.asarray(x)
    if np.allclose(x, x.conj().T, atol=1e-13):
        return float(np.abs(np.linalg.eigvalsh(0.5 * (x + x.conj().T))).sum())
    return float(np.linalg.svd(x, compute_uv=False).sum())


def hermitian_part(x):
    return 0.5 * (x + x.conj().T)


def random_hermitian(d, rng, norm=1.0):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = hermitian_part(g)
    return norm * h / operator_norm(h)


def random_pure_state(d, rng):
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_density_matrix(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def haar_unitary(d, rng):
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def _sign_matrix(g):
    w, u = np.linalg.eigh(hermitian_part(g))
    s = np.where(w >= 0, 1.0, -1.0)
    return (u * s) @ u.conj().T


def sampled_infinity_norm(superop, n_qubits, samples=200, ascent_steps=5, seed=0):
    """Sampled lower bound on the induced infinity-to-infinity norm.

    ``superop`` is a Hermiticity-preserving map in Heisenberg picture, given as
    a ``(d*d, d*d)`` matrix. Trial observables are random Pauli strings and
    Haar-rotated projector differences (all of unit operator norm), each
    refined by a few ascent steps of the form ``X <- sign(M^dag(v v^dag))``
    where ``v`` is the dominant eigenvector of ``M(X)``. The returned value is
    always attained by a unit-norm observable, so it never exceeds the true
    norm.
    """
    m = np.asarray(superop)
    d = 2**n_qubits
    rng = np.random.default_rng(seed)
    mdag = m.conj().T
    best = 0.0
    for s in range(samples):
        if s % 2 == 0:
            label = "".join(rng.choice(list("IXYZ"), size=n_qubits))
            x = pauli_string(label)
        else:
            u = haar_unitary(d, rng)
            signs = np.where(rng.random(d) < 0.5, 1.0, -1.0)
            x = (u * signs) @ u.conj().T
        for step in range(ascent_steps + 1):
            y = unvec(m @ vec(x), d)
            w, vecs = np.linalg.eigh(hermitian_part(y))
            i = int(np.argmax(np.abs(w)))
            best = max(best, abs(w[i]))
            if step == ascent_steps:
                break
            v = vecs[:, i]
            proj = np.sign(w[i]) * np.outer(v, v.conj()) if w[i] != 0 else np.outer(v, v.conj())
            g = unvec(mdag @ vec(proj), d)
            x = _sign_matrix(g)
    return float(best)
