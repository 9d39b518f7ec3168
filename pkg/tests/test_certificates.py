import json
import warnings

import numpy as np
import pytest
from scipy.special import factorial

from qgibbs import certificates as cert
from qgibbs import generator as G
from qgibbs import spin_model as sm
from qgibbs import superop as so
from qgibbs.filters import LAMBDA


# ---- oscillator norm ------------------------------------------------------

def test_delta_site_properties(rng):
    n = 3
    X = so.random_hermitian(8, rng)
    for a in range(n):
        d = cert.delta_site(X, a)
        # idempotent, kills operators trivial on a
        np.testing.assert_allclose(cert.delta_site(d, a), d, atol=1e-12)
        np.testing.assert_allclose(cert.delta_site(so.replace_site_by_identity(X, a, n), a), 0, atol=1e-12)
    with pytest.raises(ValueError):
        cert.delta_site(X, 3)
    with pytest.raises(ValueError):
        cert.delta_site(np.eye(3), 0)


def test_oscillator_norm_examples(rng):
    assert cert.oscillator_norm(np.eye(8)) == pytest.approx(0, abs=1e-14)
    assert cert.oscillator_norm(so.site_pauli(3, 1, 3)) == pytest.approx(1.0)
    ZZ = so.pauli_string("ZZI")
    assert cert.oscillator_norm(ZZ) == pytest.approx(2.0)
    for _ in range(20):
        X = so.random_hermitian(8, rng)
        X /= so.operator_norm(X)
        assert cert.oscillator_norm(X) <= 2 * 3 + 1e-12


def test_decay_exact_at_infinite_temperature():
    L = G.depolarizing_generator(3)
    X = so.pauli_string("XZI")
    times = np.linspace(0, 5, 11)
    rep = cert.oscillator_decay(L.adjoint(), X, times, kappa=0.0)
    # both non-identity factors are hit, each at rate LAMBDA
    np.testing.assert_allclose(rep.norms, 2 * np.exp(-2 * LAMBDA * times), atol=1e-12)
    assert rep.fitted_rate == pytest.approx(2 * LAMBDA, rel=1e-8)
    assert rep.bound_holds
    single = cert.oscillator_decay(L.adjoint(), so.pauli_string("IYI"), times, kappa=0.0)
    np.testing.assert_allclose(single.norms, np.exp(-LAMBDA * times), atol=1e-12)
    assert single.max_excess <= 1e-8


def test_decay_identity_has_no_fit():
    L = G.depolarizing_generator(2)
    rep = cert.oscillator_decay(L.adjoint(), np.eye(4), [0.0, 1.0])
    assert np.all(rep.norms < 1e-12)
    assert rep.fitted_rate is None and not rep.fit_ok
    assert rep.max_excess is None


def test_decay_list_matches_single(ising3):
    Ldag = G.full_generator(ising3, 0.3).adjoint()
    Xs = [so.pauli_string("XII"), so.pauli_string("ZZI")]
    times = np.linspace(0, 2, 5)
    batch = cert.oscillator_decay(Ldag, Xs, times)
    for X, rep in zip(Xs, batch):
        np.testing.assert_allclose(rep.norms, cert.oscillator_decay(Ldag, X, times).norms, atol=1e-10)


# ---- Lieb-Robinson and truncation ----------------------------------------

def test_lr_defect_examples():
    H = sm.ising_chain(5)
    d, b = cert.lr_defect(H, 2, 1, 1, 0.0)
    assert d <= 1e-13 and b == 0
    d, b = cert.lr_defect(H, 2, 1, 2, 0.5)
    assert d == pytest.approx(0, abs=1e-12)  # the ball of radius 2 covers the chain
    d, b = cert.lr_defect(H, 0, 1, 2, 0.5)
    assert b == pytest.approx((2 * H.J * 0.5) ** 2 / factorial(2))
    assert d <= b
    with pytest.raises(ValueError):
        cert.lr_defect(H, 0, 1, 0, 0.5)
    with pytest.raises(ValueError):
        cert.lr_defect(H, 0, 1, 1, 2.0, long_range=(1.0, 1.0, 7))


def test_lr_defect_commuting_field_is_exact():
    # Z on every site: Z_a commutes with H so truncation costs nothing
    terms = [sm.pauli_term((i,), "Z") for i in range(4)] + [sm.pauli_term((0, 1), "ZZ")]
    H = sm.build_hamiltonian(sm.chain(4), terms)
    d, _ = cert.lr_defect(H, 3, 3, 1, 2.0)
    assert d <= 1e-12


def test_generator_distance_cases(ising3):
    L = G.local_generator(ising3, 0, 0.3)
    assert cert.generator_distance_lower_bound(L.adjoint(), L.adjoint(), samples=5) == 0
    Lr = G.truncated_local_generator(ising3, 0, 2, 0.3)
    assert cert.generator_distance_lower_bound(L.adjoint(), Lr.adjoint(), samples=20) <= 1e-12
    with pytest.raises(ValueError):
        cert.generator_distance_lower_bound(np.eye(4), np.eye(16))


def test_truncation_distance_small_at_high_temperature(ising3):
    beta = 0.01 / ising3.J
    L = G.local_generator(ising3, 0, beta)
    Lr = G.truncated_local_generator(ising3, 0, 1, beta)
    dist = cert.generator_distance_lower_bound(L.adjoint(), Lr.adjoint(), samples=40)
    assert dist <= 0.01


# ---- zeta and Delta --------------------------------------------------------

@pytest.mark.parametrize("x", [1e-5, 1e-4, 1e-3, 1 / 200])
def test_zeta_three_term_below_simplified(x):
    for r in range(1, 201):
        three, simple = cert.zeta_bound(r, x)
        assert three <= simple


def test_zeta_validation():
    with pytest.raises(ValueError):
        cert.zeta_bound(0, 0.001)
    with pytest.raises(ValueError):
        cert.zeta_bound(1, 0.0)
    # outside the validated range the check is not enforced
    cert.zeta_bound(1, 0.5)


def test_delta_tail_matches_termwise_sum():
    for x in (1e-4, 1e-3, 1 / 200):
        g = cert.g_base(x)
        for r0 in (1, 3, 6):
            termwise = sum(14 * g**l for l in range(r0, r0 + 400))
            assert cert.delta_tail(r0, x) == pytest.approx(termwise, rel=1e-14)


def test_delta_tail_warns_above_validated_range():
    with pytest.warns(UserWarning):
        cert.delta_tail(2, 0.01)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cert.delta_tail(2, 1 / 200)


def test_g_base():
    assert cert.g_base(0.25) == pytest.approx(1 / 3)
    assert cert.g_base(0.0) == 0


# ---- kappa, local regime ----------------------------------------------------

def test_kappa_local_example():
    led = cert.kappa_local(1, 1.0, 1 / 615, 4)
    assert led.terms["eta_term"] == pytest.approx(324 / 615, rel=1e-14)
    assert led.kappa < LAMBDA and led.certified
    assert led.margin == pytest.approx(LAMBDA - led.kappa)
    assert led.f_r0 == pytest.approx(led.kappa - led.terms["eta_term"])
    assert led.series_truncation_error < 1e-12 * led.kappa
    assert set(led.zeta_table) == set(range(1, 11))


def test_kappa_local_termwise_reference():
    D, x, r0 = 2, 1e-5, 3
    g = cert.g_base(x)
    Delta = lambda l: 14 * g**l / (1 - g)
    side = (2 * r0 + 1) ** D
    S1 = sum((2 * l + 1) ** (2 * D - 1) * Delta(l) for l in range(r0, 2000))
    S2 = sum((l - r0 + 1) * (2 * l + 1) ** (2 * D - 2) * Delta(l) for l in range(r0, 2000))
    want = 4 * side**2 * x + 5 * side**2 * Delta(r0) + (5 + 2 * r0 + 2 * side) * S1 + 2 * S2
    assert cert.kappa_local(D, 1.0, x, r0).kappa == pytest.approx(want, rel=1e-13)


def test_kappa_local_monotone_in_beta():
    ks = [cert.kappa_local(1, 1.0, b, 4).kappa for b in np.geomspace(1e-6, 1 / 200, 30)]
    assert np.all(np.diff(ks) > 0)


def test_kappa_local_r0_profile():
    # eta grows with r0 while the tail f(r0) shrinks, so kappa is unimodal in r0
    leds = [cert.kappa_local(1, 1.0, 1e-3, r0) for r0 in range(1, 15)]
    f = np.array([l.f_r0 for l in leds])
    k = np.array([l.kappa for l in leds])
    assert np.all(np.diff(f) < 0)
    i = int(np.argmin(k))
    assert np.all(np.diff(k[: i + 1]) < 0) and np.all(np.diff(k[i:]) > 0)


def test_kappa_local_validation():
    with pytest.raises(ValueError):
        cert.kappa_local(0, 1.0, 1e-3, 2)
    with pytest.raises(ValueError):
        cert.kappa_local(1, 1.0, 0.0, 2)
    with pytest.warns(UserWarning):
        cert.kappa_local(1, 1.0, 0.01, 2)


def test_ledger_json_roundtrip():
    led = cert.kappa_local(1, 1.0, 1e-3, 3)
    data = json.loads(led.to_json())
    assert data["kappa"] == led.kappa and data["certified"] == led.certified
    assert data["zeta_table"]["1"]["simplified"] == pytest.approx(14 * cert.g_base(1e-3))


# ---- kappa, long-range regime ----------------------------------------------

def test_long_range_divergent():
    led = cert.kappa_long_range(1, 6, 1.0, 1.0, 0.001, 3)
    assert led.divergent and not led.certified and np.isinf(led.kappa)
    with pytest.raises(ValueError):
        cert.kappa_long_range(1, 7, 1.0, 1.0, 0.3, 3)


def test_long_range_hurwitz_matches_partial_sum():
    D, nu, K, x, r0 = 1, 7.5, 2.0, 0.002, 4
    p = nu - 2 * D - 2
    base = x ** ((D + 1) / 2)
    N = 200000
    l = np.arange(r0, N, dtype=float)
    tail1 = (2 * N) ** (2 * D - 1) * N ** (1 - p) / (p - 2 * D)  # integral estimate, leading order
    S1 = np.sum((2 * l + 1) ** (2 * D - 1) * l ** (-p))
    side = (2 * r0 + 1) ** D
    S2 = np.sum((l - r0 + 1) * (2 * l + 1) ** (2 * D - 2) * l ** (-p))
    led = cert.kappa_long_range(D, nu, 1.0, K, x, r0)
    want1 = (5 + 2 * r0 + 2 * side) * K * base * S1
    assert led.terms["single_sum_term"] == pytest.approx(want1, rel=10 * tail1 / S1 + 1e-12)
    assert led.terms["double_sum_term"] == pytest.approx(2 * K * base * S2, rel=1e-6)
    assert led.series_truncation_error < 1e-12 * led.kappa


def test_long_range_small_beta_limit():
    ks = [cert.kappa_long_range(1, 8, 1.0, 1.0, b, 3).kappa for b in (1e-4, 1e-6, 1e-8)]
    assert ks[0] > ks[1] > ks[2] and ks[2] < 1e-5


def test_long_range_tail_decreases_in_r0():
    f = [cert.kappa_long_range(1, 9, 1.0, 1.0, 1e-3, r0).f_r0 for r0 in range(1, 12)]
    assert np.all(np.diff(f) < 0)


# ---- beta* -----------------------------------------------------------------

@pytest.mark.parametrize("D", [1, 2, 3])
def test_beta_star_local(D):
    res = cert.beta_star_search("local", D=D, J=1.0, r0_range=range(1, 8))
    assert res.beta_star > 0 and res.margin >= 0
    for r0, b in res.per_r0.items():
        if b > 0:
            assert cert.kappa_local(D, 1.0, b, r0, zeta_radii=()).kappa < LAMBDA
            assert cert.kappa_local(D, 1.0, b * (1 + 1e-8), r0, zeta_radii=()).kappa >= LAMBDA
    assert res.beta_star == max(res.per_r0.values())


def test_beta_star_d1_threshold():
    res = cert.beta_star_search("local", D=1)
    assert res.beta_star >= 1 / 615 and res.r0 == 4


def test_beta_star_scales_with_J():
    a = cert.beta_star_search("local", D=1, J=1.0, r0_range=range(3, 6))
    b = cert.beta_star_search("local", D=1, J=4.0, r0_range=range(3, 6))
    assert b.beta_star == pytest.approx(a.beta_star / 4, rel=1e-8)


def test_beta_star_decreases_with_dimension():
    bs = [cert.beta_star_search("local", D=D, r0_range=range(1, 8)).beta_star for D in (1, 2, 3)]
    assert bs[0] > bs[1] > bs[2]


def test_beta_star_long_range():
    res = cert.beta_star_search("long-range", D=1, nu=7, g=1.0, K=1.0, r0_range=range(1, 8))
    assert 0 < res.beta_star < 0.25
    assert cert.kappa_long_range(1, 7, 1.0, 1.0, res.beta_star, res.r0).certified
    none = cert.beta_star_search("long-range", D=1, nu=5, g=1.0, r0_range=range(1, 4))
    assert none.beta_star == 0 and none.r0 is None
    with pytest.raises(ValueError):
        cert.beta_star_search("bogus")
