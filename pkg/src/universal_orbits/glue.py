"""Barycenter gluing of periodic orbits into a single universal point.

A target sequence of periodic orbits ``x_1, x_2, ...`` is glued onto a base
periodic point ``x_0``.  Stage ``n`` shadows ``x_n`` on the time window
``[a_n, b_n]`` where

    a_n = b_{n-1} + M_n,        b_n = a_n + 2**n * (b_{n-1} + M_n) * p_n.

On a mixing SFT the limit point is written down directly as a block plan:
each stage is a whole number of copies of ``x_n``'s word covering
``[a_n - pad_n, b_n + pad_n]`` with ``pad_n = K0 + n``, and consecutive
stages are joined by a connector of exactly ``mixing_time`` steps.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

from .errors import BoundViolated, ScheduleInfeasible, Violation
from .measures import (
    CylinderDistribution,
    LocalFunction,
    PeriodicMeasure,
    cylinder_marginals,
    weak_star_distance,
)
from .sft import (
    SFT,
    ConnectorBlock,
    OrbitBlock,
    PeriodicOrbit,
    ScheduledPoint,
    connector,
    parse_sft,
    parse_word,
    periodic_point,
    shift_distance,
    word_str,
)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


# --------------------------------------------------------------------------
# Two-orbit gluing


@dataclass(frozen=True)
class BarycenterBridge:
    """Periodic point ``z`` with ``z_j = orbit.word[(offset + j) % p]``."""

    orbit: PeriodicOrbit
    offset: int
    gap: int

    def point(self) -> ScheduledPoint:
        return periodic_point(self.orbit, self.offset % self.orbit.period)

    def coordinate(self, j: int) -> int:
        return self.orbit.word[(self.offset + j) % self.orbit.period]


def barycenter_connect(sft: SFT, p: PeriodicOrbit, q: PeriodicOrbit, K: int,
                       n1: int, n2: int) -> BarycenterBridge:
    """Periodic ``z`` and gap ``N`` with ``z`` shadowing ``p`` then ``q``.

    ``d(f^i z, f^i p) < 2**-K`` for ``-n1 <= i <= 0`` and
    ``d(f^{i+N} z, f^i q) < 2**-K`` for ``0 <= i <= n2``, where ``p`` and
    ``q`` are the periodic points reading their canonical words from
    position 0.  The gap is the least possible, ``N = 2K + m``.
    """
    if K < 0 or n1 < 0 or n2 < 0:
        raise ValueError("K, n1, n2 must be nonnegative")
    if p == q:
        return BarycenterBridge(p, 0, 0)
    m = sft.mixing_time
    N = 2 * K + m
    lo = -n1 - K
    p_part = [p.word[j % p.period] for j in range(lo, K + 1)]
    q_part = [q.word[(j - N) % q.period] for j in range(N - K, N + n2 + K + 1)]
    there = connector(sft, p_part[-1], q_part[0], m)
    back = connector(sft, q_part[-1], p_part[0], m)
    word = tuple(p_part) + there + tuple(q_part) + back
    orbit, rot = PeriodicOrbit.canonical(word)
    # word[i] sits at position lo + i
    return BarycenterBridge(orbit, (rot - lo) % orbit.period, N)


# --------------------------------------------------------------------------
# Targets and schedules


@dataclass(frozen=True)
class Target:
    orbit: PeriodicOrbit
    radius: Fraction = Fraction(0)

    @property
    def period(self) -> int:
        return self.orbit.period


@dataclass(frozen=True)
class GluingTargetSequence:
    """Targets ``x_1..x_N`` glued onto the base point ``x_0``.

    The base point reads ``base.word[(base_phase + j) % p]`` at position ``j``
    and ``delta = 2**-K0``.  ``growth`` overrides the factor ``2**n`` per
    stage; any override departs from the reference recurrence.
    """

    entries: tuple
    base: PeriodicOrbit
    K0: int = 1
    base_phase: int = 0
    growth: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(
            e if isinstance(e, Target) else Target(e) for e in self.entries))
        if self.K0 < 1:
            raise ValueError("delta = 2**-K0 must be at most 1/2")
        if self.growth is not None and len(self.growth) != len(self.entries):
            raise ValueError("one growth factor per stage")

    @property
    def delta(self) -> Fraction:
        return Fraction(1, 2 ** self.K0)

    def growth_factor(self, n: int) -> int:
        return 2 ** n if self.growth is None else self.growth[n - 1]

    def check_admissible(self, sft: SFT) -> None:
        for orbit in [self.base, *(e.orbit for e in self.entries)]:
            if not orbit.admissible_in(sft):
                raise ValueError(f"orbit {orbit} is not admissible")


def cycle_targets(net: Sequence, rounds: int, base: PeriodicOrbit, K0: int = 1,
                  base_phase: int = 0, radius=Fraction(0)) -> GluingTargetSequence:
    """Targets running through ``net`` (orbits or periodic measures) ``rounds`` times."""
    orbits = [m.orbit if isinstance(m, PeriodicMeasure) else m for m in net]
    entries = tuple(Target(o, Fraction(radius)) for _ in range(rounds) for o in orbits)
    return GluingTargetSequence(entries, base, K0, base_phase)


def schedule_recurrence(gaps: Sequence[int], periods: Sequence[int],
                        growth: Sequence[int] | None = None) -> list[tuple[int, int]]:
    """``[(a_0, b_0), (a_1, b_1), ...]`` for given gaps ``M_n`` and periods ``p_n``."""
    out = [(0, 0)]
    b = 0
    for n, (M, p) in enumerate(zip(gaps, periods), start=1):
        g = 2 ** n if growth is None else growth[n - 1]
        a = b + M
        b = a + g * (b + M) * p
        out.append((a, b))
    return out


@dataclass(frozen=True)
class Stage:
    n: int
    orbit: PeriodicOrbit
    M: int
    a: int
    b: int
    pad: int
    start: int
    repetitions: int
    phase: int
    connector: tuple
    growth: int

    @property
    def period(self) -> int:
        return self.orbit.period

    @property
    def end(self) -> int:
        """Last position covered by the stage block."""
        return self.start + self.repetitions * self.period - 1

    def reference_phase(self) -> int:
        """Phase at position 0 of the periodic point this stage shadows."""
        return (self.phase - self.start) % self.period


@dataclass(frozen=True)
class GluingSchedule:
    """Stages ``0..N`` with exact ``M_n, a_n, b_n`` and the block layout.

    Stage 0 is the base point: ``a_0 = b_0 = 0`` and its block starts at
    position 0.
    """

    sft: SFT
    K0: int
    stages: tuple

    @property
    def mixing_time(self) -> int:
        return self.sft.mixing_time

    def __len__(self) -> int:
        return len(self.stages) - 1

    def __getitem__(self, n: int) -> Stage:
        return self.stages[n]

    @property
    def delta(self) -> Fraction:
        return Fraction(1, 2 ** self.K0)

    def checkpoints(self) -> list[int]:
        return [s.b for s in self.stages[1:]]

    def point(self) -> ScheduledPoint:
        base = self.stages[0]
        blocks = [OrbitBlock(base.orbit, base.repetitions, base.phase)]
        prev_end = base.end
        for st in self.stages[1:]:
            if st.start - prev_end - 1 != len(st.connector) or st.start <= prev_end:
                raise ScheduleInfeasible(f"stage {st.n} overlaps its predecessor")
            blocks.append(ConnectorBlock(st.connector))
            blocks.append(OrbitBlock(st.orbit, st.repetitions, st.phase))
            prev_end = st.end
        return ScheduledPoint(tuple(blocks), base.orbit, base.phase, 0)

    def to_dict(self) -> dict:
        return {
            "sft": self.sft.to_text(),
            "K0": self.K0,
            "stages": [
                {
                    "n": s.n,
                    "orbit": str(s.orbit),
                    "period": s.period,
                    "M": str(s.M),
                    "a": str(s.a),
                    "b": str(s.b),
                    "pad": s.pad,
                    "start": str(s.start),
                    "repetitions": str(s.repetitions),
                    "phase": s.phase,
                    "connector": word_str(s.connector),
                    "growth": str(s.growth),
                }
                for s in self.stages
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "GluingSchedule":
        stages = tuple(
            Stage(
                n=int(s["n"]),
                orbit=PeriodicOrbit(parse_word(s["orbit"])),
                M=int(s["M"]),
                a=int(s["a"]),
                b=int(s["b"]),
                pad=int(s["pad"]),
                start=int(s["start"]),
                repetitions=int(s["repetitions"]),
                phase=int(s["phase"]),
                connector=parse_word(s["connector"]),
                growth=int(s["growth"]),
            )
            for s in data["stages"]
        )
        return cls(parse_sft(data["sft"]), int(data["K0"]), stages)

    @classmethod
    def from_json(cls, text: str) -> "GluingSchedule":
        return cls.from_dict(json.loads(text))


def build_schedule(targets: GluingTargetSequence, sft: SFT) -> GluingSchedule:
    """Exact schedule with the least gaps ``M_n`` the block layout allows.

    Each stage block starts at ``a_n - pad_n`` at phase 0 of its orbit word
    and runs a whole number of periods, so the gap must absorb the overhang
    of the previous block past ``b_{n-1} + pad_{n-1}``:
    ``M_n = m + pad_n + (end_{n-1} - b_{n-1})``.
    """
    if not targets.entries:
        raise ValueError("need at least one target")
    targets.check_admissible(sft)
    m = sft.mixing_time
    K0 = targets.K0
    base = targets.base
    reps0 = _ceil_div(K0 + 1, base.period)
    stages = [Stage(0, base, 0, 0, 0, K0, 0, reps0, targets.base_phase % base.period, (), 1)]
    prev = stages[0]
    prev_last = OrbitBlock(base, reps0, prev.phase).last()
    for n, entry in enumerate(targets.entries, start=1):
        orbit = entry.orbit
        p = orbit.period
        pad = K0 + n
        g = targets.growth_factor(n)
        M = m + pad + (prev.end - prev.b)
        a = prev.b + M
        b = a + g * (prev.b + M) * p
        start = a - pad
        reps = _ceil_div(b - a + 2 * pad + 1, p)
        conn = connector(sft, prev_last, orbit.word[0], start - prev.end)
        st = Stage(n, orbit, M, a, b, pad, start, reps, 0, conn, g)
        stages.append(st)
        prev = st
        prev_last = orbit.word[-1]
    return GluingSchedule(sft, K0, tuple(stages))


@dataclass(frozen=True)
class UniversalPoint:
    point: ScheduledPoint
    schedule: GluingSchedule
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def sft(self) -> SFT:
        return self.schedule.sft

    @property
    def checkpoints(self) -> list[int]:
        return self.schedule.checkpoints()

    @property
    def stages(self) -> int:
        return len(self.schedule)

    def checkpoint_counts(self, n: int, L: int):
        """Window counts of length ``L`` over ``[0, b_n)``."""
        key = ("counts", n, L)
        if key not in self._cache:
            self._cache[key] = self.point.window_counts(0, self.schedule[n].b, L)
        return self._cache[key]

    def checkpoint_measure(self, n: int, L: int) -> CylinderDistribution:
        key = ("measure", n, L)
        if key not in self._cache:
            b = self.schedule[n].b
            counts = self.checkpoint_counts(n, L)
            self._cache[key] = CylinderDistribution(L, {w: Fraction(c, b) for w, c in counts.items()})
        return self._cache[key]

    def checkpoint_average(self, n: int, xi: LocalFunction) -> Fraction:
        return xi.integrate_counts(self.checkpoint_counts(n, xi.depth)) / self.schedule[n].b

    def reference(self, n: int) -> ScheduledPoint:
        """The periodic point shadowed at stage ``n``."""
        st = self.schedule[n]
        return periodic_point(st.orbit, st.reference_phase())

    def stages_targeting(self, orbit: PeriodicOrbit) -> list[int]:
        return [s.n for s in self.schedule.stages[1:] if s.orbit == orbit]


def construct_universal_point(schedule: GluingSchedule,
                              targets: GluingTargetSequence | None = None) -> UniversalPoint:
    if targets is not None:
        got = [s.orbit for s in schedule.stages[1:]]
        want = [e.orbit for e in targets.entries]
        if got != want or schedule.stages[0].orbit != targets.base:
            raise ScheduleInfeasible("schedule does not match the target sequence")
    point = schedule.point()
    point.check_admissible(schedule.sft)
    return UniversalPoint(point, schedule)


def glue(targets: GluingTargetSequence, sft: SFT) -> UniversalPoint:
    return construct_universal_point(build_schedule(targets, sft), targets)


# --------------------------------------------------------------------------
# Verification


def first_disagreement(x: ScheduledPoint, ref_word, ref_phase: int, lo: int, hi: int) -> int | None:
    """First ``j`` in ``[lo, hi]`` with ``x_j != ref_word[(ref_phase + j) % p]``."""
    p = len(ref_word)
    for s, e, word, phase, pstart, periodic in x.segments():
        first = lo if s is None else max(lo, s)
        last = hi if e is None else min(hi, e - 1)
        if first > last:
            continue
        # a periodic segment agrees everywhere once it agrees over one joint period
        span = last - first + 1
        if periodic:
            span = min(span, lcm(p, len(word)))
        for j in range(first, first + span):
            if x.coordinate(j) != ref_word[(ref_phase + j) % p]:
                return j
    return None


def verify_eq5(up: UniversalPoint, n: int, sample_count: int = 100, seed: int = 0) -> bool:
    """Check that ``x`` shadows stage ``n``'s periodic point on ``[a_n, b_n]``.

    Structural part: ``x`` equals the periodic point on the padded window
    ``[a_n - pad_n, b_n + pad_n]``, which gives
    ``d(f^j x_n, f^j x) <= 2**-(pad_n + 1) < 2**(-n+1) * delta`` for every
    ``j`` in ``[a_n, b_n]``.  Sampled part: the distance itself is evaluated
    at both endpoints and ``sample_count`` random times.  Stage 0 checks
    ``x`` against the base point on ``[-K0, K0]``.
    """
    st = up.schedule[n]
    K0 = up.schedule.K0
    lo, hi = st.a - st.pad, st.b + st.pad
    pos = first_disagreement(up.point, st.orbit.word, st.reference_phase(), lo, hi)
    if pos is not None:
        witness = min(max(pos, st.a), st.b)
        raise Violation(f"stage {n}: x differs from x_{n} at position {pos}",
                        stage=n, witness=witness, position=pos)
    threshold = Fraction(1, 2 ** (K0 + n - 1)) if n else up.schedule.delta
    ref = up.reference(n)
    rng = random.Random(f"{seed}:{n}")
    times = [st.a, st.b] + [rng.randint(st.a, st.b) for _ in range(sample_count)]
    for j in times:
        d = shift_distance(ref, up.point, j, st.pad)
        if d >= threshold:
            raise Violation(f"stage {n}: distance {d} at j={j}", stage=n, witness=j)
    return True


def eq6_bound(A, xi: LocalFunction, y: ScheduledPoint) -> tuple[Fraction, Fraction]:
    """Both sides of the subset-average comparison for the time set ``A``.

    ``lhs = |mean_{j in A} xi(f^j y) - mean_{0 <= j <= max A} xi(f^j y)|`` and
    ``rhs = 2 (max A + 1 - |A|) ||xi|| / |A|``.
    """
    A = sorted(set(A))
    if not A:
        raise ValueError("A must be nonempty")
    if A[0] < 0:
        raise ValueError("A must consist of nonnegative integers")
    top = A[-1]
    values = [xi(y.window(j, xi.depth)) for j in range(top + 1)]
    sub = sum((values[j] for j in A), Fraction(0)) / len(A)
    full = sum(values, Fraction(0)) / (top + 1)
    lhs = abs(sub - full)
    rhs = Fraction(2 * (top + 1 - len(A))) * xi.sup_norm() / len(A)
    assert lhs <= rhs, (lhs, rhs)
    return lhs, rhs


@dataclass(frozen=True)
class Step2Result:
    stage: int
    lhs: Fraction
    bound: Fraction
    oscillation_term: Fraction
    tail_term: Fraction
    segment_gap: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.bound


def verify_step2(up: UniversalPoint, n: int, xi: LocalFunction) -> Step2Result:
    """``|int xi d nu_{b_n} - int xi dY_n| <= w_xi(2**(-n+1) delta) + 2 a_n / (b_n - a_n)``.

    Everything is exact; ``segment_gap`` is the shadowing error on
    ``[a_n, b_n)`` alone, which the oscillation term controls.
    """
    if n < 1:
        raise ValueError("stages start at 1")
    if xi.sup_norm() > 1:
        raise ValueError("observable must satisfy ||xi|| <= 1")
    st = up.schedule[n]
    K0 = up.schedule.K0
    y_integral = cylinder_marginals(st.orbit, xi.depth).integrate(xi)
    nu_integral = up.checkpoint_average(n, xi)
    segment = xi.integrate_counts(up.point.window_counts(st.a, st.b, xi.depth)) / (st.b - st.a)
    osc = xi.oscillation(K0 + n - 1, up.sft)
    tail = Fraction(2 * st.a, st.b - st.a)
    res = Step2Result(n, abs(nu_integral - y_integral), osc + tail, osc, tail,
                      abs(segment - y_integral))
    if not res.holds or res.segment_gap > osc:
        raise BoundViolated(f"stage {n}: {res.lhs} > {res.bound}", stage=n,
                            lhs=res.lhs, bound=res.bound)
    return res


@dataclass(frozen=True)
class DensityRow:
    orbit: PeriodicOrbit
    best_stage: int
    distance: Fraction
    claimed_bound: Fraction

    @property
    def holds(self) -> bool:
        return self.distance <= self.claimed_bound


def vfx_density_report(up: UniversalPoint, net: Sequence, L: int) -> list[DensityRow]:
    """For each net measure, the checkpoint whose empirical measure is closest.

    The claimed bound at stage ``n`` is
    ``(1 - 2**-L) a_n / b_n + rho_L(Y_n, Y)``: on ``[a_n, b_n)`` the point
    reproduces ``Y_n``'s window frequencies exactly.
    """
    K0 = up.schedule.K0
    rows = []
    stage_measures = {}
    for st in up.schedule.stages[1:]:
        stage_measures[st.n] = cylinder_marginals(st.orbit, L)
    for y in net:
        orbit = y.orbit if isinstance(y, PeriodicMeasure) else y
        target = cylinder_marginals(orbit, L)
        best = None
        bound = None
        for st in up.schedule.stages[1:]:
            d = weak_star_distance(up.checkpoint_measure(st.n, L), target, L)
            if best is None or d < best[1]:
                best = (st.n, d)
            if K0 + st.n >= L - 1:
                c = (1 - Fraction(1, 2 ** L)) * Fraction(st.a, st.b) \
                    + weak_star_distance(stage_measures[st.n], target, L)
                bound = c if bound is None else min(bound, c)
        rows.append(DensityRow(orbit, best[0], best[1], bound if bound is not None else Fraction(1)))
    return rows
