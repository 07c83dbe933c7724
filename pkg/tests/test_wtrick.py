import math

import numpy as np
import pytest

import adl
from adl.subsets import PrimeSubsetSpec


def test_compute_W():
    assert adl.compute_W(2) == 2
    assert adl.compute_W(3) == 6
    assert adl.compute_W(5) == 30
    assert adl.compute_W(7) == 210
    with pytest.raises(ValueError):
        adl.compute_W(1)


def test_params_from_target():
    p = adl.WTrickParams.from_target(3, 100_000)
    assert p.W == 6 and p.N == 100_000 // 24 and p.n0 == 100_000
    assert p.sieve_limit == 6 * p.N + 6
    assert adl.WTrickParams.from_length(3, 10).units() == [1, 5]
    with pytest.raises(ValueError):
        adl.WTrickParams.from_target(3, 20)


def test_build_weight_example(table):
    p = adl.WTrickParams.from_length(3, 5)
    nu = adl.build_weight(p, 1, None, table)
    nonzero = [i + 1 for i in range(5) if nu.values[i] > 0]
    assert nonzero == [1, 2, 3, 5]  # 7, 13, 19, 31 prime; 25 is not
    assert nu.flavor == "nu"
    for i in nonzero:
        assert nu.values[i - 1] == pytest.approx((2 / 6) * math.log(6 * i + 1))

    # primes 7, 13, 19, 31 are all 1 mod 3, so the restriction is vacuous
    f = adl.build_weight(p, 1, PrimeSubsetSpec.residue_classes(3, [1]), table)
    assert f.flavor == "f"
    assert np.array_equal(f.values, nu.values)

    empty = adl.build_weight(p, 1, PrimeSubsetSpec.explicit([]), table)
    assert not empty.values.any()


def test_build_weight_preconditions(table):
    p = adl.WTrickParams.from_length(3, 10)
    with pytest.raises(ValueError):
        adl.build_weight(p, 2, None, table)  # gcd(2, 6) > 1
    with pytest.raises(ValueError):
        adl.build_weight(p, 7, None, table)  # outside [1, W]
    small = adl.sieve_primes(50)
    with pytest.raises(ValueError):
        adl.build_weight(p, 1, None, small)  # sieve too short


def test_f_below_nu_pointwise(table, spec_all, spec_mod3_1, spec_mod5_123):
    p = adl.WTrickParams.from_length(5, 4096)
    rng_specs = [spec_all, spec_mod3_1, spec_mod5_123,
                 PrimeSubsetSpec.random_density(0.7, seed=3)]
    for b in p.units():
        nu = adl.build_weight(p, b, None, table)
        for spec in rng_specs:
            f = adl.build_weight(p, b, spec, table)
            assert (f.values <= nu.values + 1e-15).all()


def test_mean_examples(table, spec_all):
    zero = adl.WeightVector(adl.WTrickParams.from_length(3, 4), 1, np.zeros(4), "f")
    assert adl.weight_mean(zero) == 0.0
    p = adl.WTrickParams.from_length(3, 100_000)
    nu = adl.build_weight(p, 1, None, table)
    assert 0.9 <= nu.mean() <= 1.1
    f = adl.build_weight(p, 1, spec_all, table)
    assert f.mean() == nu.mean()


def test_mean_of_nu_tightens(table):
    p12 = adl.WTrickParams.from_length(3, 1 << 12)
    p16 = adl.WTrickParams.from_length(3, 1 << 16)
    dev12 = abs(adl.build_weight(p12, 1, None, table).mean() - 1)
    dev16 = abs(adl.build_weight(p16, 1, None, table).mean() - 1)
    assert dev16 <= dev12 + 0.02


def test_mean_over_units(table, spec_all, spec_mod3_1):
    p = adl.WTrickParams.from_length(3, 100_000)
    rep = adl.mean_over_units(p, spec_all, table)
    assert 0.9 <= rep.value <= 1.1
    assert rep.value >= rep.lower_bound
    rep31 = adl.mean_over_units(p, spec_mod3_1, table)
    assert abs(rep31.value - 0.5) < 0.1
    assert rep31.value >= rep31.lower_bound
    empty = adl.mean_over_units(p, PrimeSubsetSpec.explicit([]), table)
    assert empty.value == 0.0 and empty.lower_bound == 0.0


def test_mean_over_units_bound_for_many_specs(table):
    p = adl.WTrickParams.from_length(5, 8192)
    for spec in (PrimeSubsetSpec.all_primes(),
                 PrimeSubsetSpec.residue_classes(5, [1, 2, 3]),
                 PrimeSubsetSpec.random_density(0.55, seed=9)):
        rep = adl.mean_over_units(p, spec, table)
        assert rep.value >= rep.lower_bound


def test_h_transform_examples():
    eps = 0.05
    res = adl.h_transform({1: eps / 2, 5: 0.0}, eps)
    assert res.values == {1: 0.0, 5: 0.0}
    assert not res.clipped
    res2 = adl.h_transform({1: 1.15}, 0.1)
    assert res2.clipped
    assert 0.0 <= res2.values[1] < 1.0
    with pytest.raises(ValueError):
        adl.h_transform({1: 0.5}, 0.5)  # epsilon outside (0, 1/6)


def test_select_eight_residues_all_primes(table, spec_all):
    p = adl.WTrickParams.from_length(3, 100_000)
    wit = adl.select_eight_residues(p, spec_all, 0.05, 0, table)
    assert sum(wit.residues) % 6 == 0
    assert wit.total > 4 * 1.05
    assert wit.total > 4.2
    assert min(wit.weights) > 0.05 / 2


def test_select_eight_residues_empty_spec_errors(table):
    p = adl.WTrickParams.from_length(3, 20_000)
    with pytest.raises(adl.WitnessSearchError) as err:
        adl.select_eight_residues(p, PrimeSubsetSpec.explicit([]), 0.05, 0, table)
    assert err.value.mean_h == 0.0


def test_select_eight_residues_w30_classes(table, spec_mod5_123):
    p = adl.WTrickParams.from_length(5, 100_000)
    wit = adl.select_eight_residues(p, spec_mod5_123, 0.01, 2, table)
    assert sum(wit.residues) % 30 == 2
    assert wit.total > 4 * 1.01
    assert min(wit.weights) > 0.01 / 2


def test_select_succeeds_on_every_even_residue(table, spec_all, spec_mod5_123):
    p = adl.WTrickParams.from_length(3, 1 << 14)
    for spec, eps in ((spec_all, 0.05), (spec_mod5_123, 0.05)):
        dens = adl.density_estimate(spec, p.sieve_limit, table)
        assert dens > 0.5 + 3 * eps
        for n in range(0, 6, 2):
            wit = adl.select_eight_residues(p, spec, eps, n, table)
            assert sum(wit.residues) % 6 == n
