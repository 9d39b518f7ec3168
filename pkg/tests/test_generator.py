import numpy as np
import pytest
from scipy.linalg import expm

from qgibbs import generator as G
from qgibbs import oracles as O
from qgibbs import spin_model as sm
from qgibbs import superop as so
from qgibbs.dynamics import fixed_point, kms_residual
from qgibbs.filters import LAMBDA, FilterFunctions
from conftest import random_local_model


def _zero_model(n):
    return sm.build_hamiltonian(sm.chain(n), [])


def test_jump_fourier_zero_hamiltonian():
    H = _zero_model(2)
    f = FilterFunctions(0.6)
    for w in (-2.0, 0.0, 1.5):
        np.testing.assert_allclose(G.jump_fourier(H, 1, 2, w, f), so.site_pauli(2, 1, 2) * f.f_hat(-w), atol=1e-15)


def test_jump_fourier_single_qubit_z(z_qubit):
    f = FilterFunctions(0.4)
    for w in (-2.0, 0.3, 2.0):
        Aw = G.jump_fourier(z_qubit, 0, 1, w, f)
        assert Aw[0, 0] == 0 and Aw[1, 1] == 0
        # basis |0> has energy +1, so <0|A(w)|1> sits at Bohr frequency +2
        assert Aw[0, 1] == pytest.approx(f.f_hat(2 - w), rel=1e-14)
        assert Aw[1, 0] == pytest.approx(f.f_hat(-2 - w), rel=1e-14)


def test_jump_fourier_matches_quadrature(rng):
    H = random_local_model(2, rng)
    for _ in range(5):
        beta, w = rng.uniform(0.2, 2), rng.uniform(-4, 4)
        a, alpha = int(rng.integers(2)), int(rng.integers(1, 4))
        diff = G.jump_fourier(H, a, alpha, w, beta) - O.jump_fourier_quadrature(H, a, alpha, w, beta)
        assert np.max(np.abs(diff)) <= 1e-8


def test_jump_reflection(rng, ising3):
    f = FilterFunctions(0.9)
    for w in rng.uniform(-3, 3, 4):
        lhs = G.jump_fourier(ising3, 1, 2, w, f).conj().T
        np.testing.assert_allclose(lhs, G.jump_fourier(ising3, 1, 2, -w, f), atol=1e-14)


def test_integrated_jump_bound(rng):
    for beta in (0.05, 0.5, 2.0):
        H = random_local_model(3, rng)
        for alpha in (1, 2, 3):
            assert so.operator_norm(G.integrated_jump(H, 1, alpha, beta)) <= (2 * np.pi) ** 0.75 / np.sqrt(beta)


def test_beta_must_be_positive(ising3):
    for fn in (G.assemble_dissipator_site, G.assemble_coherent_site):
        with pytest.raises(ValueError):
            fn(ising3, 0, 0.0)
    with pytest.raises(ValueError):
        G.jump_fourier(ising3, 0, 1, 0.0, -1.0)
    with pytest.raises(ValueError):
        G.local_generator(ising3, 0, -0.1)


def _dissipator_by_quadrature(H, a, beta):
    f = FilterFunctions(beta)

    def fn(ws):
        out = []
        for w in ws:
            acc = 0
            for alpha in (1, 2, 3):
                Aw = G.jump_fourier(H, a, alpha, w, f)
                R = Aw.conj().T @ Aw
                acc = acc + so.sprepost(Aw, Aw.conj().T) - 0.5 * so.spre(R) - 0.5 * so.spost(R)
            out.append(f.gamma(w) * acc)
        return np.array(out)

    c = -1 / beta
    return G.SITE_WEIGHT * O.refine_trapezoid(fn, c - 14 / beta, c + 14 / beta, tol=1e-11)


@pytest.mark.parametrize("model", ["zero", "ising"])
def test_dissipator_matches_frequency_quadrature(model):
    H = _zero_model(2) if model == "zero" else sm.ising_chain(2)
    beta = 0.7
    diff = G.assemble_dissipator_site(H, 0, beta).matrix - _dissipator_by_quadrature(H, 0, beta)
    assert np.max(np.abs(diff)) <= 1e-8


def test_jump_part_choi_psd(rng):
    H = random_local_model(3, rng)
    for beta in (0.1, 1.0):
        C = so.choi_matrix(G.jump_part_site(H, 1, beta))
        assert np.linalg.eigvalsh(so.hermitian_part(C)).min() >= -1e-10


def test_coherent_is_hermitian_and_weighted(rng):
    H = random_local_model(3, rng)
    B = G.assemble_coherent_site(H, 1, 0.8)
    assert np.max(np.abs(B - B.conj().T)) <= 1e-10
    want = G.SITE_WEIGHT * G.COHERENT_SCALE * sum(G.coherent_term(H, 1, al, 0.8) for al in (1, 2, 3))
    np.testing.assert_allclose(B, want, atol=1e-14)


def test_coherent_matches_time_quadrature(z_qubit, rng):
    B = G.coherent_term(z_qubit, 0, 1, 0.05)
    assert np.max(np.abs(B - O.coherent_quadrature(z_qubit, 0, 1, 0.05))) <= 1e-7
    H = random_local_model(2, rng)
    for alpha in (1, 2, 3):
        B = G.coherent_term(H, 0, alpha, 0.6)
        phys = O.coherent_quadrature(H, 0, alpha, 0.6, form="physical")
        resc = O.coherent_quadrature(H, 0, alpha, 0.6, form="rescaled")
        assert np.max(np.abs(B - phys)) <= 1e-7
        assert np.max(np.abs(phys - resc)) <= 1e-10


def test_coherent_vanishes_without_hamiltonian():
    # b1 is odd, so the identity coefficient int int b1 b2 is zero
    B = G.coherent_term(_zero_model(2), 0, 3, 0.5)
    assert np.max(np.abs(B)) == 0


def test_coherent_norm_bound(rng):
    c = np.exp(1 / 8) / (2 * np.sqrt(2 * np.pi))
    for _ in range(5):
        H = random_local_model(3, rng)
        beta = rng.uniform(0.01, 0.3) / H.J
        for alpha in (1, 2, 3):
            assert so.operator_norm(G.coherent_term(H, 1, alpha, beta)) <= c * beta * H.J


def test_structure_hermiticity_and_trace(rng, heis3):
    L = G.full_generator(heis3, 0.4)
    d = heis3.dim
    for _ in range(5):
        X = so.random_hermitian(d, rng)
        Y = L.apply(X)
        assert np.max(np.abs(Y - Y.conj().T)) <= 1e-10
    # tr(L(rho)) = vec(I)^dag L vec(rho)
    assert np.max(np.abs(so.vec(np.eye(d)) @ L.matrix)) <= 1e-10


def _generators(H, beta):
    return (G.full_generator(H, beta), G.local_generator(H, 0, beta), G.truncated_local_generator(H, 1, 1, beta))


def test_gkls_conditional_complete_positivity(rng):
    for H in (random_local_model(3, rng), sm.heisenberg_chain(3)):
        for L in _generators(H, 0.5):
            ev = so.conditional_cp_spectrum(L.matrix)
            assert ev.min() >= -1e-10 * np.abs(ev).max()


def test_gkls_choi_of_short_step(rng):
    """Choi(I + dt L) is only PSD up to the second-order block term; exp(dt L) is PSD."""
    for H in (random_local_model(3, rng), sm.heisenberg_chain(3)):
        for L in _generators(H, 0.5):
            dt = 1e-3 / so.operator_norm(L.matrix)
            d2 = L.matrix.shape[0]
            d = int(round(np.sqrt(d2)))
            CL = so.hermitian_part(so.choi_matrix(L.matrix))
            omega = so.vec(np.eye(d)) / np.sqrt(d)
            alpha = d + dt * np.real(omega.conj() @ CL @ omega)
            b = dt * np.linalg.norm(CL @ omega - (omega.conj() @ CL @ omega) * omega)
            floor = 0.5 * (alpha - np.sqrt(alpha**2 + 4 * b**2))
            C = so.choi_matrix(np.eye(d2) + dt * L.matrix)
            assert np.linalg.eigvalsh(so.hermitian_part(C)).min() >= floor - 1e-10
            Ce = so.choi_matrix(expm(dt * L.matrix))
            assert np.linalg.eigvalsh(so.hermitian_part(Ce)).min() >= -1e-8


def test_depolarizing_limit_exact(ising3, rng):
    L0 = G.local_generator(ising3, 1, 0.0)
    X = so.random_hermitian(8, rng)
    want = LAMBDA * (so.replace_site_by_identity(X, 1, 3) - X)
    np.testing.assert_allclose(L0.apply(X), want, atol=1e-14)
    np.testing.assert_allclose(G.full_generator(ising3, 0.0).matrix,
                               sum(G.depolarizing_generator(3, a).matrix for a in range(3)), atol=1e-15)


def test_small_beta_approaches_depolarizing(ising3):
    beta = 1e-9
    d = G.local_generator(ising3, 1, beta).matrix - G.depolarizing_generator(3, 1).matrix
    assert np.max(np.abs(d)) <= 10 * beta * ising3.J


def test_eta_bound_sampled(heis3):
    beta = 0.01 / heis3.J
    for a in range(3):
        La = G.local_generator(heis3, a, beta).adjoint()
        L0 = G.depolarizing_generator(3, a).adjoint()
        assert so.sampled_infinity_norm(La.matrix - L0.matrix, 3, samples=60) <= beta * heis3.J


def test_adjoint_consistency(rng, ising3):
    L = G.local_generator(ising3, 2, 0.3)
    Ld = L.adjoint()
    assert Ld.heisenberg and not L.heisenberg
    for _ in range(5):
        X = so.random_hermitian(8, rng)
        rho = so.random_density_matrix(8, rng)
        assert abs(np.trace(X @ L.apply(rho)) - np.trace(Ld.apply(X) @ rho)) <= 1e-10


def test_truncation_examples():
    H = sm.ising_chain(4)
    a, beta = 1, 0.3
    full = G.local_generator(H, a, beta).matrix
    for r in (H.lattice.diameter, H.lattice.diameter + 2):
        t = G.truncated_local_generator(H, a, r, beta)
        assert t.scope == "truncated" and t.radius == r
        assert np.max(np.abs(t.matrix - full)) <= 1e-12
    # only a field on site a: nothing outside the ball of radius 0
    Hf = sm.build_hamiltonian(sm.chain(3), [sm.pauli_term((1,), "X", 0.8)])
    np.testing.assert_allclose(G.truncated_local_generator(Hf, 1, 0, beta).matrix,
                               G.local_generator(Hf, 1, beta).matrix, atol=1e-12)
    with pytest.raises(ValueError):
        G.truncated_local_generator(H, a, -1, beta)


def test_full_is_sum_of_local(rng):
    H = random_local_model(3, rng)
    full = G.full_generator(H, 0.6).matrix
    parts = sum(G.local_generator(H, a, 0.6).matrix for a in range(3))
    assert np.max(np.abs(full - parts)) <= 1e-12


def test_global_depolarizing_fixed_point(ising3):
    np.testing.assert_allclose(fixed_point(G.full_generator(ising3, 0.0)), np.eye(8) / 8, atol=1e-12)


@pytest.mark.parametrize("builder", [sm.ising_chain, sm.heisenberg_chain])
@pytest.mark.parametrize("beta", [0.1, 0.5, 1.5])
def test_gibbs_fixed_point_and_detailed_balance(builder, beta):
    H = builder(3)
    L = G.full_generator(H, beta)
    sigma = sm.gibbs_state(H, beta)
    assert so.trace_norm(L.apply(sigma)) <= 1e-9
    assert so.trace_norm(fixed_point(L) - sigma) <= 1e-8
    assert kms_residual(L, sigma, samples=10) <= 1e-6


def test_single_qubit_fixed_point(z_qubit):
    beta = 0.1
    L = G.local_generator(z_qubit, 0, beta)
    want = np.diag([np.exp(-beta), np.exp(beta)]) / (2 * np.cosh(beta))
    np.testing.assert_allclose(fixed_point(L), want, atol=1e-12)


def test_without_coherent_scale_detailed_balance_breaks(heis3, monkeypatch):
    # the unscaled b1/b2 term leaves a residual; the factor two removes it
    beta = 1.0
    sigma = sm.gibbs_state(heis3, beta)
    monkeypatch.setattr(G, "COHERENT_SCALE", 1.0)
    assert so.trace_norm(G.full_generator(heis3, beta).apply(sigma)) > 1e-4


def test_matrix_file_roundtrip(tmp_path, ising3):
    L = G.local_generator(ising3, 0, 0.5)
    path = tmp_path / "L.txt"
    L.save(path)
    back = G.GeneratorMatrix.load(path)
    assert back.beta == 0.5 and back.scope == "site"
    np.testing.assert_array_equal(back.matrix, L.matrix)
    header = path.read_text().splitlines()[0]
    assert header.startswith("# rows=64 cols=64")
