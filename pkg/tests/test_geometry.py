import math

import numpy as np
import pytest

from minsurf4.expr import HoloFn, SingularityError, parse, render
from minsurf4.geometry import (PQ, AlphaBeta, CurvaturePair, DomainError, MoebiusParams,
                               NormalizationError, WeierstrassPair, alpha_beta_from_curvatures,
                               canonical_derivatives, curvature_pair,
                               curvatures_from_alpha_beta, curvatures_from_pq,
                               liouville_density, moebius, moebius_value, pq_from_alpha_beta,
                               pq_from_w, su2_transform, weierstrass_derivatives,
                               weierstrass_FG)

Z, Z2, EXP = HoloFn.parse("z"), HoloFn.parse("z^2"), HoloFn.parse("exp(z)")
GENERATORS = [HoloFn.parse(t) for t in
              ("z", "z^2", "exp(z)", "(2*z - 1)/(z + 2)", "z^3 + i*z", "sin(z) + 2*z")]


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def random_points(rng, n, radius=1.5):
    return rng.uniform(-radius, radius, n) + 1j * rng.uniform(-radius, radius, n)


# ---------------------------------------------------------------- density

def test_density_golden():
    assert liouville_density(Z, 0) == 4
    assert liouville_density(Z2, 1) == 4


def test_density_critical_point():
    with pytest.raises(SingularityError) as err:
        liouville_density(Z2, 0)
    assert err.value.kind == "derivative zero"


def test_density_positive():
    rng = np.random.default_rng(0)
    for w in GENERATORS:
        for z in random_points(rng, 50):
            assert liouville_density(w, z) > 0


# ---------------------------------------------------------------- p, q and curvatures

def test_pq_golden():
    assert pq_from_w(Z, Z2, 1) == PQ(1.0, 4.0)
    assert pq_from_w(Z, Z, 0) == PQ(4.0, 4.0)


def test_pq_names_failing_generator():
    with pytest.raises(SingularityError) as err:
        pq_from_w(Z, Z2, 0)
    assert err.value.which == "w2"
    assert "w2" in str(err.value)


def test_curvatures_from_pq_golden():
    assert curvatures_from_pq(PQ(1.0, 4.0)) == CurvaturePair(-5.0, -3.0)
    assert curvatures_from_pq(PQ(4.0, 4.0)) == CurvaturePair(-16.0, 0.0)
    assert curvatures_from_pq(PQ(2.5, 2.5)).kappa == 0


def test_curvature_pair_golden():
    c = curvature_pair(Z, Z2, 1)
    assert abs(c.K + 5) <= 1e-12 * 5 and abs(c.kappa + 3) <= 1e-12 * 3
    c = curvature_pair(Z, Z, 0)
    assert abs(c.K + 16) <= 1e-12 * 16 and c.kappa == 0


def test_curvature_pair_critical_point():
    with pytest.raises(SingularityError):
        curvature_pair(Z, Z2, 0)


def test_direct_formula_matches_pq_route():
    rng = np.random.default_rng(1)
    for k in range(200):
        w1, w2 = GENERATORS[k % 6], GENERATORS[(k // 6) % 6]
        z = random_points(rng, 1)[0]
        direct = curvature_pair(w1, w2, z)
        via = curvatures_from_pq(pq_from_w(w1, w2, z))
        assert rel(direct.K, via.K) <= 1e-12
        assert abs(direct.kappa - via.kappa) <= 1e-12 * abs(via.K)


def test_gauss_curvature_negative():
    rng = np.random.default_rng(2)
    for w1 in GENERATORS:
        for w2 in GENERATORS:
            for z in random_points(rng, 10):
                assert curvature_pair(w1, w2, z).K < 0


def test_swap_antisymmetry():
    rng = np.random.default_rng(3)
    for z in random_points(rng, 50):
        a = curvature_pair(EXP, Z2, z)
        b = curvature_pair(Z2, EXP, z)
        assert a.K == b.K and a.kappa == -b.kappa


def test_identity_discriminant():
    rng = np.random.default_rng(4)
    p, q = rng.uniform(0, 10, (2, 1000))
    p, q = np.maximum(p, 1e-3), np.maximum(q, 1e-3)
    c = curvatures_from_pq(PQ(p, q))
    err = np.abs((c.K - c.kappa) * (c.K + c.kappa) - (p * q) ** 2) / (p * q) ** 2
    assert err.max() <= 1e-12


# ---------------------------------------------------------------- alpha, beta

def test_alpha_beta_golden():
    ab = alpha_beta_from_curvatures(CurvaturePair(-5.0, -3.0))
    assert rel(ab.alpha, 1 / math.sqrt(2)) <= 1e-15 and rel(ab.beta, math.sqrt(2)) <= 1e-15
    assert alpha_beta_from_curvatures(CurvaturePair(-16.0, 0.0)) == AlphaBeta(2.0, 2.0)


@pytest.mark.parametrize("K, kappa", [(-4.0, 4.0), (-4.0, -4.0), (1.0, 0.0), (-1.0, 2.0)])
def test_alpha_beta_domain(K, kappa):
    with pytest.raises(DomainError):
        alpha_beta_from_curvatures(CurvaturePair(K, kappa))


def test_pq_from_alpha_beta_golden():
    pq = pq_from_alpha_beta(AlphaBeta(1 / math.sqrt(2), math.sqrt(2)))
    assert rel(pq.p, 1) <= 1e-15 and rel(pq.q, 4) <= 1e-15
    assert pq_from_alpha_beta(AlphaBeta(2.0, 2.0)) == PQ(4.0, 4.0)
    assert pq_from_alpha_beta(AlphaBeta(0.3, 0.3)).p == pytest.approx(0.6, rel=1e-15)


def test_alpha_beta_reconstruction():
    ab = AlphaBeta(0.7, 1.9)
    c = curvatures_from_alpha_beta(ab)
    back = alpha_beta_from_curvatures(c)
    assert rel(back.alpha, 0.7) <= 1e-15 and rel(back.beta, 1.9) <= 1e-15


def test_round_trip():
    rng = np.random.default_rng(5)
    p, q = rng.uniform(0, 10, (2, 1000))
    p, q = np.maximum(p, 1e-3), np.maximum(q, 1e-3)
    c = curvatures_from_pq(PQ(p, q))
    back = curvatures_from_pq(pq_from_alpha_beta(alpha_beta_from_curvatures(c)))
    assert (np.abs(back.K - c.K) / np.abs(c.K)).max() <= 1e-12
    assert (np.abs(back.kappa - c.kappa) / np.abs(c.K)).max() <= 1e-12


def test_pq_squares():
    ab = AlphaBeta(np.array([0.5, 1.2]), np.array([2.0, 0.3]))
    pq = pq_from_alpha_beta(ab)
    assert np.allclose(pq.p ** 2, 4 * ab.alpha ** 3 / ab.beta, rtol=1e-14)
    assert np.allclose(pq.q ** 2, 4 * ab.beta ** 3 / ab.alpha, rtol=1e-14)


# ---------------------------------------------------------------- gauge

def test_moebius_identity():
    w = HoloFn.parse("exp(z) + z")
    assert moebius(w, MoebiusParams(1, 0)).ast == w.ast


def test_moebius_inversion():
    w = moebius(Z, MoebiusParams(0, 1))
    assert w.ast == parse("-1/z")
    assert w(2 + 0j) == -0.5


def test_moebius_normalization():
    with pytest.raises(NormalizationError) as err:
        moebius(Z, MoebiusParams(1, 1))
    assert "2" in str(err.value)


def test_moebius_renormalize():
    w = moebius(Z, MoebiusParams(1, 1), renormalize=True)
    s = 1 / math.sqrt(2)
    assert abs(w(0.3 + 0j) - moebius_value(0.3, MoebiusParams(s, s))) <= 1e-15


def test_moebius_tolerance_edge():
    MoebiusParams(1 + 2e-13, 0).check()
    with pytest.raises(NormalizationError):
        MoebiusParams(1 + 1e-11, 0).check()


def test_moebius_result_round_trips():
    m = MoebiusParams.random(np.random.default_rng(6))
    w = moebius(HoloFn.parse("z^2 - 3"), m)
    assert parse(render(w.ast)) == w.ast


def test_moebius_pole_reported():
    w = moebius(Z, MoebiusParams(0, 1))
    with pytest.raises(SingularityError) as err:
        w.jet(0)
    assert err.value.kind == "pole"


def test_density_gauge_invariance():
    rng = np.random.default_rng(7)
    for w in (Z, EXP, Z2, HoloFn.parse("(2*z - 1)/(z + 2)")):
        for _ in range(100):
            m = MoebiusParams.random(rng)
            wh = moebius(w, m)
            z = random_points(rng, 1, 1.0)[0]
            try:
                nu_h = liouville_density(wh, z)
            except SingularityError:
                continue
            assert rel(nu_h, liouville_density(w, z)) <= 1e-9


def test_curvature_gauge_invariance():
    rng = np.random.default_rng(8)
    for _ in range(100):
        m1, m2 = MoebiusParams.random(rng), MoebiusParams.random(rng)
        z = random_points(rng, 1, 1.0)[0]
        c = curvature_pair(EXP, Z2, z)
        ch = curvature_pair(moebius(EXP, m1), moebius(Z2, m2), z)
        assert rel(ch.K, c.K) <= 1e-9
        assert abs(ch.kappa - c.kappa) <= 1e-9 * abs(c.K)


# ---------------------------------------------------------------- Weierstrass data

def test_weierstrass_golden():
    fg = weierstrass_FG(Z, 0)
    assert abs(fg.F - (-1j / math.sqrt(2))) <= 1e-15
    assert fg.G == 0


def test_weierstrass_critical_point():
    with pytest.raises(SingularityError):
        weierstrass_FG(Z2, 0)


def test_weierstrass_product_identity():
    rng = np.random.default_rng(9)
    for w in GENERATORS:
        for z in random_points(rng, 40):
            fg = weierstrass_FG(w, z)
            j = w.jet(z)
            ref = -j.value / j.deriv
            assert abs(2 * fg.F * fg.G - ref) <= 1e-12 * max(abs(ref), 1e-300) + 1e-300


def test_su2_identity():
    pair = WeierstrassPair(0.3 + 1j, -2 + 0.5j)
    assert su2_transform(pair, MoebiusParams(1, 0)) == pair


def test_su2_unitary():
    rng = np.random.default_rng(10)
    pair = WeierstrassPair(0.3 + 1j, -2 + 0.5j)
    for _ in range(20):
        out = su2_transform(pair, MoebiusParams.random(rng))
        before = abs(pair.F) ** 2 + abs(pair.G) ** 2
        assert rel(abs(out.F) ** 2 + abs(out.G) ** 2, before) <= 1e-14


def test_su2_rejects_non_unit():
    with pytest.raises(NormalizationError):
        su2_transform(WeierstrassPair(1, 0), MoebiusParams(1, 1))


def test_su2_matches_moebius():
    rng = np.random.default_rng(11)
    for w in GENERATORS:
        for _ in range(20):
            m = MoebiusParams.random(rng)
            z = random_points(rng, 1, 1.0)[0]
            out = su2_transform(weierstrass_FG(w, z), m)
            try:
                wh = moebius(w, m)(z)
            except SingularityError:
                continue
            assert abs(out.G / out.F - wh) <= 1e-10 * max(1.0, abs(wh))


def test_canonical_golden():
    d = canonical_derivatives(Z, 1)
    assert d == (0, -1j, -1)


def test_canonical_isotropy_and_sign_convention():
    rng = np.random.default_rng(12)
    for w in GENERATORS:
        for z in random_points(rng, 40):
            d = canonical_derivatives(w, z)
            scale = sum(abs(x) ** 2 for x in d)
            assert scale > 0
            assert abs(sum(x * x for x in d)) <= 1e-12 * scale
            ws = weierstrass_derivatives(weierstrass_FG(w, z))
            for a, b in zip(d, ws):
                assert abs(a - b) <= 1e-12 * math.sqrt(scale)


def test_array_inputs():
    p, q = np.array([1.0, 4.0]), np.array([4.0, 4.0])
    c = curvatures_from_pq(PQ(p, q))
    assert np.array_equal(c.K, [-5.0, -16.0]) and np.array_equal(c.kappa, [-3.0, 0.0])
    with pytest.raises(DomainError):
        curvatures_from_pq(PQ(np.array([1.0, 0.0]), q))
