import math

import numpy as np
import pytest

import adl
from adl.spectral import _v_q

from oracles import direct_dft


# ---------------------------------------------------------------------------
# transform
# ---------------------------------------------------------------------------


def test_transform_zero_vector():
    p = adl.WTrickParams.from_length(3, 8)
    v = adl.WeightVector(p, 1, np.zeros(8), "f")
    g = adl.transform(v, 32)
    assert not g.values.any()


def test_transform_against_direct_dft(table):
    rng = np.random.default_rng(3)
    for n in (4, 17, 64):
        p = adl.WTrickParams.from_length(3, n)
        vals = np.where(rng.random(n) < 0.4, rng.random(n) * 3, 0.0)
        v = adl.WeightVector(p, 1, vals, "f")
        m = adl.default_grid_size(n)
        g = adl.transform(v, m)
        oracle = direct_dft(vals, m)
        scale = max(1.0, np.abs(oracle).max())
        assert np.abs(g.values - oracle).max() / scale < 1e-9


def test_transform_invariants(table):
    p = adl.WTrickParams.from_length(3, 1 << 10)
    g = adl.nu_grid(p, 1, table)
    assert g.values[0] == pytest.approx(g.source.total())
    assert g.values[0].imag == 0
    assert np.allclose(g.values[1:][::-1], np.conj(g.values[1:]), atol=1e-9)
    assert g.values[0] == pytest.approx(p.N * g.source.mean())


def test_transform_size_validation(table):
    p = adl.WTrickParams.from_length(3, 100)
    v = adl.build_weight(p, 1, None, table)
    with pytest.raises(ValueError):
        adl.transform(v, 128)  # below 2N
    with pytest.raises(ValueError):
        adl.transform(v, 300)  # not a power of two
    with pytest.raises(ValueError):
        adl.default_grid_size(100, factor=3)


# ---------------------------------------------------------------------------
# indicator transform and I(beta)
# ---------------------------------------------------------------------------


def test_indicator_hat_examples():
    assert adl.indicator_hat(0.0, 7) == pytest.approx(7)
    assert abs(adl.indicator_hat(0.5, 4)) < 1e-12
    expected = np.exp(2j * np.pi / 3)
    assert adl.indicator_hat(1 / 3, 4) == pytest.approx(expected)


def test_indicator_hat_matches_direct_sum():
    rng = np.random.default_rng(11)
    for n in (1, 5, 37):
        alphas = rng.random(50)
        direct = np.array(
            [sum(np.exp(2j * np.pi * alpha * m) for m in range(1, n + 1)) for alpha in alphas]
        )
        got = adl.indicator_hat(alphas, n)
        assert np.abs(got - direct).max() < 1e-9 * n


def test_i_beta_examples_and_bound():
    assert adl.i_beta(0.0, 50) == pytest.approx(50)
    assert abs(adl.i_beta(1 / 100, 100)) < 1e-9
    assert abs(adl.i_beta(1 / 200, 100)) == pytest.approx(200 / math.pi)
    rng = np.random.default_rng(2)
    betas = np.concatenate([rng.uniform(-0.5, 0.5, 200), [0.0, 1e-12, -1e-9]])
    vals = np.abs(adl.i_beta(betas, 1000))
    bound = np.minimum(1000, 1 / (math.pi * np.maximum(np.abs(betas), 1e-300)))
    assert (vals <= bound + 1e-6).all()


def test_discrepancy_degenerate_n1():
    p = adl.WTrickParams.from_length(2, 1)  # W=2, N=1: progression value 3
    t = adl.sieve_primes(10)
    d = adl.pseudorandomness_discrepancy(p, 1, t)
    v = adl.build_weight(p, 1, None, t).values[0]
    assert d <= max(1.0, v)


# ---------------------------------------------------------------------------
# arc classification
# ---------------------------------------------------------------------------


def test_classify_examples(table):
    p = adl.WTrickParams.from_length(3, 4096)
    arc = adl.ArcParams.from_params(p, sigma=1.0)
    lab = adl.classify(0.0, arc)
    assert (lab.kind, lab.q, lab.a, lab.beta) == ("major", 1, 0, 0.0)
    delta = arc.half_width / 2
    lab2 = adl.classify(0.5 + delta, arc)
    assert (lab2.kind, lab2.q, lab2.a) == ("major", 2, 1)
    assert lab2.beta == pytest.approx(delta)
    golden = (math.sqrt(5) - 1) / 2
    assert adl.classify(golden, arc).kind == "minor"


def test_classify_wraparound(table):
    p = adl.WTrickParams.from_length(3, 4096)
    arc = adl.ArcParams.from_params(p, sigma=1.0)
    alpha = 1.0 - arc.half_width / 3
    lab = adl.classify(alpha, arc)
    assert (lab.kind, lab.q, lab.a) == ("major", 1, 0)
    assert lab.beta == pytest.approx(alpha - 1.0)


def test_classify_grid_agrees_with_scalar(table):
    p = adl.WTrickParams.from_length(3, 512)
    for sigma in (1.0, 3.0):
        arc = adl.ArcParams.from_params(p, sigma=sigma)
        alphas = np.arange(1024) / 1024
        q, a, beta, _ = adl.classify_grid(alphas, arc)
        rng = np.random.default_rng(1)
        for k in rng.integers(0, 1024, size=80):
            lab = adl.classify(alphas[k], arc)
            if lab.kind == "minor":
                assert q[k] == 0
            else:
                assert (q[k], a[k]) == (lab.q, lab.a)
                assert beta[k] == pytest.approx(lab.beta, abs=1e-12)


def test_arc_params_width_formula(table):
    p = adl.WTrickParams.from_length(3, 4096)
    arc = adl.ArcParams.from_params(p, sigma=2.0, sigma0=1.5)
    L = math.log(p.sieve_limit)
    assert arc.L == pytest.approx(L)
    assert arc.Q_arc == int(L ** 2)
    assert arc.half_width == pytest.approx(L ** 2 / (p.W * p.N))


# ---------------------------------------------------------------------------
# exponential sums
# ---------------------------------------------------------------------------


def test_s_q_star_examples():
    assert adl.s_q_star(1, 0, 1, 6) == pytest.approx(1)
    val = adl.s_q_star(3, 1, 1, 2)
    assert val == pytest.approx(1 + np.exp(4j * np.pi / 3))
    assert abs(val) == pytest.approx(1.0)
    assert abs(adl.s_q_star(6, 1, 1, 2)) < 1e-12


def test_s_q_star_preconditions():
    with pytest.raises(ValueError):
        adl.s_q_star(6, 2, 1, 2)  # a not reduced
    with pytest.raises(ValueError):
        adl.s_q_star(3, 1, 2, 6)  # b not a unit


def test_v_q_phase_identity():
    # V_q(a, b) = e_{Wq}(ab) S_q*(a, b)
    rng = np.random.default_rng(5)
    for _ in range(60):
        w_mod = int(rng.choice([2, 6, 30]))
        q = int(rng.integers(1, 300))
        a = int(rng.integers(0, q))
        if q > 1 and math.gcd(a, q) != 1:
            continue
        units = [b for b in range(1, w_mod + 1) if math.gcd(b, w_mod) == 1]
        b = int(rng.choice(units))
        lhs = _v_q(q, a, b, w_mod)
        rhs = np.exp(2j * np.pi * a * b / (w_mod * q)) * adl.s_q_star(q, a, b, w_mod)
        assert abs(lhs - rhs) < 1e-9


def test_crt_factor_examples():
    fac = adl.crt_factor(6, 1, 1, 2)
    assert (fac.u, fac.v) == (2, 3)
    assert abs(fac.product) < 1e-12 and abs(fac.direct) < 1e-12
    fac5 = adl.crt_factor(5, 1, 1, 6)
    assert (fac5.u, fac5.v) == (1, 5)
    assert abs(abs(fac5.direct) - 1.0) < 1e-9  # |mu(5)| = 1
    fac1 = adl.crt_factor(1, 0, 1, 6)
    assert fac1.product == pytest.approx(1.0)


def test_crt_factor_random_cases():
    rng = np.random.default_rng(123)
    for _ in range(80):
        w_mod = int(rng.choice([2, 6, 30]))
        q = int(rng.integers(2, 10_000))
        while True:
            a = int(rng.integers(1, q))
            if math.gcd(a, q) == 1:
                break
        units = [b for b in range(1, w_mod + 1) if math.gcd(b, w_mod) == 1]
        b = int(rng.choice(units))
        fac = adl.crt_factor(q, a, b, w_mod)
        assert abs(fac.product - fac.direct) < 1e-9
        assert fac.u * fac.v == q
        assert math.gcd(fac.v, w_mod) == 1


def test_major_arc_model_examples(table):
    p = adl.WTrickParams.from_length(3, 4096)
    assert adl.major_arc_model(adl.ArcLabel("major", 1, 0, 0.0), p, 1) == pytest.approx(4096)
    beta = 1 / (10 * p.N)
    assert adl.major_arc_model(adl.ArcLabel("major", 1, 0, beta), p, 1) == pytest.approx(
        adl.i_beta(beta, p.N)
    )
    val = adl.major_arc_model(adl.ArcLabel("major", 5, 1, 0.0), p, 1)
    s5 = adl.s_q_star(5, 1, 1, 6)
    assert val == pytest.approx((2 / 8) * s5 * p.N)
    with pytest.raises(ValueError):
        adl.major_arc_model(adl.ArcLabel("minor"), p, 1)


# ---------------------------------------------------------------------------
# trend checks on the shared ladder
# ---------------------------------------------------------------------------


def test_scan_alpha_zero_row(spectral_ladder):
    for entry in spectral_ladder["entries"].values():
        scan = entry.scan_sigma1
        # at alpha = 0 the model error reduces to |mean(nu) - 1|
        assert scan.err_over_N[0] == pytest.approx(abs(entry.nu_mean - 1), abs=1e-12)


def test_minor_arc_trend_endpoints(spectral_ladder):
    entries = spectral_ladder["entries"]
    for (W, b) in ((6, 1), (6, 5), (30, 7)):
        first = entries[(W, b, 1 << 12)].scan_sigma1.minor_max
        last = entries[(W, b, 1 << 16)].scan_sigma1.minor_max
        assert first is not None and last is not None
        assert last < first, f"minor sup rose for (W={W}, b={b}): {first} -> {last}"


def test_unit_arc_discrepancy_shrinks(spectral_ladder):
    entries = spectral_ladder["entries"]
    for (W, b) in ((6, 1), (6, 5), (30, 7)):
        first = entries[(W, b, 1 << 12)].scan_sigma1.unit_arc_disc
        last = entries[(W, b, 1 << 16)].scan_sigma1.unit_arc_disc
        assert last < first


def test_euler_maclaurin_gap_small_on_unit_arc(spectral_ladder):
    # |indicator_hat(alpha) - I(alpha)| stays O(1)-small near 0 at sigma=1
    for entry in spectral_ladder["entries"].values():
        assert entry.scan_sigma1.euler_maclaurin_max <= 10.0


def test_overlap_logging_field(spectral_ladder):
    for entry in spectral_ladder["entries"].values():
        assert entry.scan_sigma1.overlap_points >= 0
