import random
from fractions import Fraction

import pytest

from universal_orbits.errors import (
    CoverageFailure,
    DepthMismatch,
    HorizonBeyondPoint,
    InfeasibleEpsilon,
    NotInvariant,
)
from universal_orbits.measures import (
    CylinderDistribution,
    LocalFunction,
    MeasureBall,
    cycle_measures,
    cylinder_marginals,
    empirical_measure,
    epsilon_net,
    random_invariant,
    sigmund_approximate,
    weak_star_distance,
)
from universal_orbits.sft import (
    FULL_2_SHIFT,
    GOLDEN_MEAN,
    ConnectorBlock,
    OrbitBlock,
    PeriodicOrbit,
    ScheduledPoint,
    enumerate_periodic,
    parse_word,
    periodic_point,
)

import oracles

F = Fraction


def orbit(w):
    return PeriodicOrbit(parse_word(w))


def dist(depth, **kw):
    return CylinderDistribution(depth, {parse_word(k[1:]): F(v) for k, v in kw.items()})


def test_marginals_fixed_point():
    assert cylinder_marginals(orbit("0"), 2).weights == {(0, 0): 1}


def test_marginals_two_cycle():
    assert cylinder_marginals(orbit("01"), 1).weights == {(0,): F(1, 2), (1,): F(1, 2)}


def test_marginals_three_cycle():
    mu = cylinder_marginals(orbit("001"), 2)
    assert mu.weights == {(0, 0): F(1, 3), (0, 1): F(1, 3), (1, 0): F(1, 3)}
    assert mu.is_invariant()


def test_distance_to_self():
    mu = cylinder_marginals(orbit("0011"), 3)
    assert weak_star_distance(mu, mu, 3) == 0


def test_distance_between_fixed_points():
    a, b = cylinder_marginals(orbit("0"), 3), cylinder_marginals(orbit("1"), 3)
    assert weak_star_distance(a, b, 3) == F(7, 8)


def test_distance_symmetric_and_bounded():
    rng = random.Random(5)
    ext = cycle_measures(GOLDEN_MEAN, 3)
    for _ in range(30):
        mu = random_invariant(GOLDEN_MEAN, 3, rng, extremes=ext)
        nu = random_invariant(GOLDEN_MEAN, 3, rng, extremes=ext)
        d = weak_star_distance(mu, nu, 3)
        assert d == weak_star_distance(nu, mu, 3)
        assert 0 <= d <= 1 - F(1, 8)


def test_distance_needs_depth():
    with pytest.raises(DepthMismatch):
        weak_star_distance(cylinder_marginals(orbit("0"), 1), cylinder_marginals(orbit("0"), 3), 3)


def test_non_invariant_detected():
    assert not dist(2, w00=F(1, 2), w01=F(1, 2)).is_invariant()


def test_csv_round_trip():
    mu = cylinder_marginals(orbit("00101"), 3)
    assert CylinderDistribution.from_csv(mu.to_csv()) == mu


def test_empirical_constant():
    x = periodic_point(orbit("0"))
    assert empirical_measure(x, 10 ** 9, 1).marginals.weights == {(0,): 1}


def test_empirical_alternating_prefix():
    # x = (01)^5 then 0 forever; the window at j=9 reads "10"
    x = ScheduledPoint((OrbitBlock(orbit("01"), 5), OrbitBlock(orbit("0"), None)), orbit("0"))
    w = empirical_measure(x, 10, 2).marginals
    assert w[(0, 1)] == F(1, 2)
    assert w[(1, 0)] == F(1, 2)
    assert w[(0, 0)] == 0 and w[(1, 1)] == 0


def test_empirical_beyond_extent():
    x = ScheduledPoint((OrbitBlock(orbit("01"), 5),), orbit("0"))
    with pytest.raises(HorizonBeyondPoint):
        empirical_measure(x, 11, 1)


def test_empirical_matches_eager_counting():
    rng = random.Random(17)
    pool = enumerate_periodic(GOLDEN_MEAN, 5)
    for _ in range(50):
        blocks = []
        for _ in range(rng.randint(1, 4)):
            o = rng.choice(pool)
            blocks.append(OrbitBlock(o, rng.randint(1, 400), 0))
            blocks.append(ConnectorBlock((0,)))
        blocks.append(OrbitBlock(rng.choice(pool), None))
        x = ScheduledPoint(tuple(blocks), orbit("0"))
        N = rng.randint(1, 10 ** 4)
        L = rng.randint(1, 3)
        got = empirical_measure(x, N, L).marginals
        want = oracles.eager_counts(x, 0, N, L)
        assert got.weights == {w: F(c, N) for w, c in want.items()}


def test_local_function_oscillation():
    xi = LocalFunction.indicator((0, 1))
    assert xi.oscillation(2) == 0
    assert xi.oscillation(1, GOLDEN_MEAN) == 1
    assert LocalFunction.constant(3).oscillation(0) == 0


def test_ball_radius_positive():
    with pytest.raises(ValueError):
        MeasureBall(cylinder_marginals(orbit("0"), 1), F(0))


def test_sigmund_returns_periodic_input():
    mu = cylinder_marginals(orbit("01"), 3)
    assert sigmund_approximate(mu, F(1, 3)) == orbit("01")
    assert sigmund_approximate(mu, 0) == orbit("01")


def test_sigmund_product_measure_depth_one():
    mu = CylinderDistribution(1, {(0,): F(1, 2), (1,): F(1, 2)})
    got = sigmund_approximate(mu, 0, FULL_2_SHIFT)
    assert got == orbit("01")


def test_sigmund_random_depth_two():
    rng = random.Random(20)
    ext = cycle_measures(GOLDEN_MEAN, 2)
    for _ in range(20):
        mu = random_invariant(GOLDEN_MEAN, 2, rng, extremes=ext)
        o = sigmund_approximate(mu, F(1, 20), GOLDEN_MEAN)
        assert o.admissible_in(GOLDEN_MEAN)
        assert weak_star_distance(cylinder_marginals(o, 2), mu, 2) <= F(1, 20)


def test_sigmund_full_shift_depth_three():
    rng = random.Random(21)
    ext = cycle_measures(FULL_2_SHIFT, 3)
    for _ in range(10):
        mu = random_invariant(FULL_2_SHIFT, 3, rng, extremes=ext)
        o = sigmund_approximate(mu, F(1, 50), FULL_2_SHIFT)
        assert weak_star_distance(cylinder_marginals(o, 3), mu, 3) <= F(1, 50)


def test_sigmund_rejects_non_invariant():
    with pytest.raises(NotInvariant):
        sigmund_approximate(dist(2, w00=F(1, 2), w01=F(1, 2)), F(1, 10))


def test_sigmund_infeasible_accuracy():
    # irrational-looking weights with a tiny cap cannot be matched exactly
    mu = CylinderDistribution(1, {(0,): F(1, 997), (1,): F(996, 997)})
    with pytest.raises(InfeasibleEpsilon):
        sigmund_approximate(mu, 0, FULL_2_SHIFT, denominator_cap=64, small_period=2)


def test_net_full_shift_depth_one():
    net = epsilon_net(FULL_2_SHIFT, F(1, 4), 1, 2)
    freqs = sorted(m.marginals[(0,)] for m in net)
    assert freqs == [0, F(1, 2), 1]


def test_net_huge_epsilon():
    assert len(epsilon_net(FULL_2_SHIFT, 2, 2, 4)) == 1


def test_net_golden_mean_only_fixed_point():
    with pytest.raises(CoverageFailure) as exc:
        epsilon_net(GOLDEN_MEAN, F(1, 8), 2, 1)
    assert exc.value.distance > F(1, 8)


def test_net_golden_mean_depth_three():
    net = epsilon_net(GOLDEN_MEAN, F(1, 4), 3, 5)
    assert [str(m.orbit) for m in net] == ["0", "01", "001", "00001"]
    assert net.worst_sample_distance <= F(1, 4)
    for i, a in enumerate(net.elements):
        for b in net.elements[i + 1:]:
            assert weak_star_distance(a.marginals, b.marginals, 3) > F(1, 8)


def test_cycle_measures_are_invariant():
    for mu in cycle_measures(GOLDEN_MEAN, 3):
        assert mu.is_invariant()
