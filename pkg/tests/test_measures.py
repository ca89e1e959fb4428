import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import fine_density_measure
from ulam.interval_maps import PreconditionError, counterexample_map, mp_map
from ulam.measures import (IntervalPair, StepMeasure, avg_density, check_key_inequality,
                           dirac0, is_monotonic, lebesgue, measure_of_interval, project,
                           pushforward, random_monotonic, random_ordered_pair)
from ulam.partitions import quasi_uniform_partition, uniform_partition


def one_minus_x():
    # antiderivative of 1 - x; total mass 1/2
    return fine_density_measure(lambda x: x - x * x / 2)


def two_minus_two_x():
    # antiderivative of 2 - 2x; a probability density
    return fine_density_measure(lambda x: 2 * x - x * x)


def test_interval_mass_uniform():
    assert measure_of_interval(lebesgue(uniform_partition(8)), (0.25, 0.75)) == pytest.approx(0.5)


def test_interval_mass_atom():
    mu = dirac0(uniform_partition(4))
    assert measure_of_interval(mu, (0, 0.1)) == 1.0
    assert measure_of_interval(mu, (0.1, 1)) == 0.0


def test_interval_mass_linear_density():
    assert measure_of_interval(one_minus_x(), (0.25, 0.5)) == pytest.approx(5 / 32, abs=1e-4)


def test_avg_density_remark_values():
    # the 1 - x density reproduces the printed averages 1/2 and 5/8
    mu = one_minus_x()
    assert avg_density(mu, (0, 1)) == pytest.approx(0.5, abs=1e-12)
    assert avg_density(mu, (0.25, 0.5)) == pytest.approx(5 / 8, abs=1e-12)
    # the printed density 2 - 2x doubles both; the pair is unordered either way
    mu2 = two_minus_two_x()
    assert avg_density(mu2, (0, 1)) == pytest.approx(1.0, abs=1e-12)
    assert avg_density(mu2, (0.25, 0.5)) == pytest.approx(1.25, abs=1e-12)
    pair = IntervalPair((0, 1), (0.25, 0.5))
    assert not pair.ordered
    with pytest.raises(PreconditionError):
        check_key_inequality(mu2, pair)


def test_avg_density_simple_cases():
    assert avg_density(lebesgue(uniform_partition(3)), (0.2, 0.9)) == pytest.approx(1.0)
    assert avg_density(dirac0(), (0.5, 0.6)) == 0.0
    assert avg_density(lebesgue(), (0.3, 0.3)) == 0.0


def test_is_monotonic_examples():
    p3, p2 = uniform_partition(3), uniform_partition(2)
    assert is_monotonic(StepMeasure(0, p3, [3, 2, 1])).ok
    check = is_monotonic(StepMeasure(0, p2, [1, 2]))
    assert not check.ok and check.witness == 0
    assert is_monotonic(StepMeasure(0.5, uniform_partition(5), np.full(5, 0.5))).ok


def test_key_inequality_examples():
    mu = StepMeasure(0, uniform_partition(2), [1.5, 0.5])
    assert check_key_inequality(mu, IntervalPair((0.2, 0.7), (0.2, 0.7)))
    mu = StepMeasure(0, uniform_partition(2), [2, 1])
    assert check_key_inequality(mu, IntervalPair((0, 0.5), (0.5, 1)))


def test_key_inequality_requires_monotone():
    mu = StepMeasure(0, uniform_partition(2), [0.5, 1.5])
    with pytest.raises(PreconditionError):
        check_key_inequality(mu, IntervalPair((0, 0.5), (0.5, 1)))


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 64), pair_seed=st.integers(0, 2**32 - 1))
def test_key_inequality_property(seed, n, pair_seed):
    mu = random_monotonic(seed, n, atom_prob=0.5)
    pair = random_ordered_pair(np.random.default_rng(pair_seed))
    assert pair.ordered
    assert check_key_inequality(mu, pair)


def test_random_monotonic_properties():
    mu = random_monotonic(3, 50, atom_prob=0.0)
    assert mu.atom0 == 0.0
    a, b = random_monotonic(11, 20), random_monotonic(11, 20)
    assert a.atom0 == b.atom0 and np.array_equal(a.densities, b.densities)
    for seed in range(200):
        mu = random_monotonic(seed, 17, atom_prob=0.7)
        assert is_monotonic(mu, tol=0.0)
        assert mu.total == pytest.approx(1.0, abs=1e-12)
        assert 0.0 <= mu.atom0 <= 0.9


def test_project_idempotent():
    p = quasi_uniform_partition(30, 3.0, 2)
    mu = random_monotonic(5, 30, atom_prob=0.0, partition=p)
    assert np.allclose(project(mu, p).densities, mu.densities, rtol=1e-13, atol=1e-13)


def test_project_atom():
    out = project(dirac0(), uniform_partition(10))
    assert out.atom0 == 0.0
    assert out.densities[0] == pytest.approx(10.0)
    assert np.all(out.densities[1:] == 0)


def test_project_linear_density():
    out = project(two_minus_two_x(), uniform_partition(2))
    assert out.masses == pytest.approx([0.75, 0.25], abs=1e-12)
    assert out.densities == pytest.approx([1.5, 0.5], abs=1e-12)


def test_pushforward_doubling_preserves_lebesgue():
    out = pushforward(mp_map(0), lebesgue(uniform_partition(7)), uniform_partition(64))
    assert np.allclose(out.densities, 1.0, atol=1e-13)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.5])
def test_pushforward_atom_at_fixed_origin(alpha):
    out = pushforward(mp_map(alpha), dirac0(uniform_partition(4)), uniform_partition(16))
    assert out.atom0 == 1.0 and np.all(out.densities == 0)


def test_pushforward_atom_off_fixed_point_becomes_mass():
    # T(0) = 1/2 for the counterexample map: the atom lands in the cell of 1/2
    out = pushforward(counterexample_map(), dirac0(), uniform_partition(12))
    assert out.atom0 == 0.0
    assert out.masses[6] == pytest.approx(1.0)
    assert out.masses.sum() == pytest.approx(1.0)


def test_pushforward_counterexample_mass():
    mu = lebesgue(uniform_partition(12))
    out = pushforward(counterexample_map(), mu, uniform_partition(24))
    # decreasing branch sends [5/12, 1/2) onto (0, 1/6]
    assert measure_of_interval(out, (0, 1 / 6)) == pytest.approx(1 / 12, abs=1e-13)
    assert out.total == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_in=st.integers(1, 40), n_out=st.integers(1, 300),
       K=st.floats(1.0, 4.0))
def test_mass_conservation(seed, n_in, n_out, K):
    p_in = quasi_uniform_partition(n_in, K, seed)
    p_out = quasi_uniform_partition(n_out, K, seed + 1)
    mu = random_monotonic(seed, n_in, atom_prob=0.5, partition=p_in)
    assert project(mu, p_out).total == pytest.approx(mu.total, abs=1e-12)
    for tmap in (mp_map(0.5), counterexample_map()):
        assert pushforward(tmap, mu, p_out).total == pytest.approx(mu.total, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_in=st.integers(1, 40), n_out=st.integers(1, 300),
       K=st.floats(1.0, 4.0))
def test_projection_preserves_monotonicity(seed, n_in, n_out, K):
    mu = random_monotonic(seed, n_in, atom_prob=0.5)
    out = project(mu, quasi_uniform_partition(n_out, K, seed))
    assert is_monotonic(out, tol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), alpha=st.sampled_from([0.0, 0.25, 0.5, 1.0, 1.5]),
       n_in=st.integers(1, 40))
def test_pushforward_preserves_monotonicity(seed, alpha, n_in):
    mu = random_monotonic(seed, n_in, atom_prob=0.5)
    out = pushforward(mp_map(alpha), mu, uniform_partition(512))
    assert is_monotonic(out, tol=1e-10)


def test_json_roundtrip():
    mu = random_monotonic(4, 9)
    back = StepMeasure.from_json(mu.to_json())
    assert back.atom0 == mu.atom0 and np.array_equal(back.densities, mu.densities)


def test_rejects_negative_density():
    with pytest.raises(ValueError):
        StepMeasure(0, uniform_partition(2), [1, -1])
