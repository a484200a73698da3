import random
from fractions import Fraction

import pytest

from universal_orbits.errors import EmptyRowOrColumn, GapTooSmall, InadmissibleWord, NotMixing
from universal_orbits.sft import (
    FULL_2_SHIFT,
    GOLDEN_MEAN,
    ConnectorBlock,
    OrbitBlock,
    PeriodicOrbit,
    ScheduledPoint,
    admissible_words,
    connector,
    enumerate_periodic,
    higher_block,
    least_rotation,
    parse_sft,
    parse_word,
    periodic_point,
    shift_distance,
    validate_sft,
    with_symbol,
    word_str,
)

import oracles


def orbits(*words):
    return [PeriodicOrbit(parse_word(w)) for w in words]


def test_full_shift_mixes_in_one_step():
    assert validate_sft([[1, 1], [1, 1]]).mixing_time == 1


def test_golden_mean_needs_two_steps():
    # A^2 = [[2,1],[1,1]], A itself has a zero
    assert validate_sft([[1, 1], [1, 0]]).mixing_time == 2


def test_reducible_matrix_rejected():
    with pytest.raises(NotMixing):
        validate_sft([[1, 0], [0, 1]])


def test_periodic_but_irreducible_rejected():
    with pytest.raises(NotMixing):
        validate_sft([[0, 1], [1, 0]])


def test_empty_row_rejected():
    with pytest.raises(EmptyRowOrColumn):
        validate_sft([[1, 1], [0, 0]])


@pytest.mark.parametrize("bad", [[[1, 2], [1, 1]], [[1, 1]], []])
def test_malformed_matrix(bad):
    with pytest.raises(ValueError):
        validate_sft(bad)


def test_mixing_time_matches_boolean_powers():
    rng = random.Random(11)
    checked = 0
    while checked < 60:
        k = rng.randint(1, 5)
        mat = [[int(rng.random() < 0.55) for _ in range(k)] for _ in range(k)]
        want = oracles.mixing_time(mat)
        if want is None or not all(any(r) for r in mat) or not all(any(c) for c in zip(*mat)):
            continue
        assert validate_sft(mat).mixing_time == want
        checked += 1


def test_parse_round_trip():
    text = GOLDEN_MEAN.to_text()
    assert parse_sft(text) == GOLDEN_MEAN
    assert parse_sft("# comment\n2\n11\n10\n") == GOLDEN_MEAN


def test_parse_reports_line():
    with pytest.raises(ValueError, match="line 3"):
        parse_sft("2\n11\n1x\n")


def test_connector_direct_transition():
    assert connector(FULL_2_SHIFT, 0, 1, 1) == ()


def test_connector_through_zero():
    assert connector(GOLDEN_MEAN, 1, 1, 2) == (0,)


def test_connector_gap_below_mixing_time():
    with pytest.raises(GapTooSmall):
        connector(GOLDEN_MEAN, 1, 1, 1)


def test_connector_long_gap_is_admissible_path():
    for a in range(2):
        for b in range(2):
            for g in range(2, 9):
                w = connector(GOLDEN_MEAN, a, b, g)
                assert len(w) == g - 1
                assert GOLDEN_MEAN.is_admissible((a,) + w + (b,))


def test_enumerate_full_shift_p2():
    assert enumerate_periodic(FULL_2_SHIFT, 2) == orbits("0", "1", "01")


def test_enumerate_golden_mean_p2():
    assert enumerate_periodic(GOLDEN_MEAN, 2) == orbits("0", "01")


def test_enumerate_empty():
    assert enumerate_periodic(FULL_2_SHIFT, 0) == []


@pytest.mark.parametrize("mat,P", [
    ([[1, 1], [1, 1]], 7),
    ([[1, 1], [1, 0]], 8),
    ([[1, 1, 0], [0, 1, 1], [1, 0, 1]], 6),
    ([[0, 1, 1], [1, 1, 0], [1, 0, 1]], 6),
])
def test_enumerate_matches_brute_force(mat, P):
    got = [o.word for o in enumerate_periodic(validate_sft(mat), P)]
    assert sorted(got, key=lambda w: (len(w), w)) == oracles.periodic_words(mat, P)


def test_periodic_orbit_must_be_canonical():
    with pytest.raises(ValueError):
        PeriodicOrbit((1, 0))
    with pytest.raises(ValueError):
        PeriodicOrbit((0, 1, 0, 1))


def test_canonical_offset():
    orbit, off = PeriodicOrbit.canonical((1, 0, 0))
    assert orbit.word == (0, 0, 1)
    for i in range(6):
        assert orbit.word[(off + i) % 3] == (1, 0, 0)[i % 3]


def test_least_rotation():
    assert least_rotation((2, 1, 0, 1, 0)) == 2
    assert least_rotation((0, 0, 0)) == 0


def test_coordinate_far_out():
    x = periodic_point(PeriodicOrbit((0,)))
    assert x.coordinate(10 ** 30) == 0


def test_coordinate_inside_block():
    x = ScheduledPoint((OrbitBlock(PeriodicOrbit((0, 1)), 3),), PeriodicOrbit((0, 1)))
    assert x.coordinate(4) == 0
    assert x.expand(0, 6) == [0, 1, 0, 1, 0, 1]


def test_coordinate_left_tail():
    x = ScheduledPoint((OrbitBlock(PeriodicOrbit((0,)), None),), PeriodicOrbit((0, 1)), 0)
    assert x.coordinate(-1) == 1
    assert x.coordinate(-2) == 0


def test_shift_distance_equal():
    x = periodic_point(PeriodicOrbit((0, 1)))
    assert shift_distance(x, x, 7, 12) == 0


def test_shift_distance_opposite_fixed_points():
    x, y = periodic_point(PeriodicOrbit((0,))), periodic_point(PeriodicOrbit((1,)))
    assert shift_distance(x, y, 10 ** 20, 4) == 1


def test_shift_distance_single_flip():
    x = periodic_point(PeriodicOrbit((0,)))
    y = with_symbol(x, 5, 1)
    assert shift_distance(x, y, 2, 10) == Fraction(1, 8)
    assert shift_distance(x, y, 2, 2) == 0


def test_block_plan_lengths():
    a = PeriodicOrbit((0, 0, 1))
    x = ScheduledPoint((OrbitBlock(a, 4), ConnectorBlock((0,)), OrbitBlock(PeriodicOrbit((0,)), 5)),
                       PeriodicOrbit((0,)), 0, -3)
    assert x.starts == (-3, 9, 10)
    assert x.cumulative_lengths == (9, 10, 15)
    assert x.extent == 15


def test_last_block_must_be_orbit():
    with pytest.raises(ValueError):
        ScheduledPoint((ConnectorBlock((0,)),), PeriodicOrbit((0,)))


def test_check_admissible_junction():
    x = ScheduledPoint((OrbitBlock(PeriodicOrbit((0, 1)), 2), ConnectorBlock((1,)),
                        OrbitBlock(PeriodicOrbit((0,)), None)), PeriodicOrbit((0,)))
    with pytest.raises(InadmissibleWord):
        x.check_admissible(GOLDEN_MEAN)
    x.check_admissible(FULL_2_SHIFT)


def test_window_counts_match_eager_expansion():
    rng = random.Random(3)
    pool = enumerate_periodic(FULL_2_SHIFT, 4)
    for _ in range(40):
        blocks = []
        for _ in range(rng.randint(1, 5)):
            if rng.random() < 0.3:
                blocks.append(ConnectorBlock(tuple(rng.randint(0, 1) for _ in range(rng.randint(1, 4)))))
            o = rng.choice(pool)
            blocks.append(OrbitBlock(o, rng.randint(1, 6), rng.randrange(o.period)))
        x = ScheduledPoint(tuple(blocks), rng.choice(pool), rng.randrange(2), rng.randint(-5, 5))
        lo = rng.randint(-10, 10)
        hi = lo + rng.randint(0, 60)
        L = rng.randint(1, 4)
        assert x.window_counts(lo, hi, L) == oracles.eager_counts(x, lo, hi, L)


def test_serialization_round_trip():
    x = ScheduledPoint((OrbitBlock(PeriodicOrbit((0, 1)), 10 ** 25, 1), ConnectorBlock((0,)),
                        OrbitBlock(PeriodicOrbit((0,)), None)), PeriodicOrbit((0, 0, 1)), 2, 7)
    y = ScheduledPoint.from_dict(x.to_dict())
    assert y == x
    assert y.extent is None
    assert x.to_dict()["blocks"][0]["repetitions"] == str(10 ** 25)


def test_with_symbol_changes_one_coordinate():
    o = PeriodicOrbit((0, 0, 1))
    x = ScheduledPoint((OrbitBlock(o, 5),), o)
    y = with_symbol(x, 7, 1)
    assert [j for j in range(-5, 25) if x[j] != y[j]] == [7]
    z = with_symbol(x, 14, 0)
    assert [j for j in range(-5, 25) if x[j] != z[j]] == [14]


def test_admissible_words_lex_order():
    assert [word_str(w) for w in admissible_words(GOLDEN_MEAN, 3)] == ["000", "001", "010", "100", "101"]


def test_higher_block_depth_two():
    H, words = higher_block(GOLDEN_MEAN, 2)
    assert words == [(0, 0), (0, 1), (1, 0)]
    assert H.k == 3
    assert H.allowed(1, 2) and not H.allowed(2, 2)
