"""Ball systems over the measure simplex and a cylinder-by-cylinder witness scan.

A point belongs to the open dense set for ball ``V_i`` once some empirical
measure ``delta(x)^N`` enters ``V_i``.  The scan builds, inside every
cylinder of a given length, a glued point and records the first checkpoint
horizon at which it enters each ball.  Only checkpoint horizons ``b_n`` are
examined, so an absent entry means "not witnessed", never "disproved".
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .glue import GluingTargetSequence, UniversalPoint, glue
from .measures import (
    CylinderDistribution,
    MeasureBall,
    PeriodicMeasure,
    weak_star_distance,
)
from .sft import SFT, PeriodicOrbit, Word, admissible_words, shortest_connector, word_str
from .errors import InadmissibleWord


@dataclass(frozen=True)
class BallSystem:
    """Pairs ``(V_i, U_i)`` sharing a center, ``radius(V_i) < radius(U_i)``."""

    pairs: tuple

    def __post_init__(self):
        prev = None
        for v, u in self.pairs:
            if v.center != u.center:
                raise ValueError("paired balls must share a center")
            if not v.radius < u.radius:
                raise ValueError("inner radius must be smaller than outer radius")
            if not v.center.is_invariant():
                raise ValueError("ball centers must be invariant distributions")
            if prev is not None and v.radius > prev:
                raise ValueError("radii must be non-increasing")
            prev = v.radius

    def __len__(self):
        return len(self.pairs)

    @property
    def inner(self) -> list[MeasureBall]:
        return [v for v, _ in self.pairs]


def build_ball_system(net: Sequence[PeriodicMeasure], rounds: int, shrink,
                      base_radius=Fraction(1, 4)) -> BallSystem:
    """``len(net) * rounds`` balls; round ``r`` (from 1) has radius ``base * shrink**r``.

    The outer ball of each pair takes the previous round's radius.
    """
    shrink = Fraction(shrink)
    base_radius = Fraction(base_radius)
    if not net:
        raise ValueError("net must be nonempty")
    if not 0 < shrink < 1:
        raise ValueError("shrink must lie in (0, 1)")
    pairs = []
    for r in range(1, rounds + 1):
        rv = base_radius * shrink ** r
        for m in net:
            pairs.append((MeasureBall(m.marginals, rv), MeasureBall(m.marginals, rv / shrink)))
    return BallSystem(tuple(pairs))


def pu_membership(x, ball: MeasureBall, checkpoints: Sequence[int], L: int) -> int | None:
    """Smallest checkpoint ``N`` with ``rho_L(delta(x)^N, center) <= radius``, else ``None``."""
    if not checkpoints:
        raise ValueError("need at least one checkpoint")
    for N in sorted(checkpoints):
        if weak_star_distance(_empirical(x, N, L), ball.center, L) <= ball.radius:
            return N
    return None


def _empirical(x, N: int, L: int) -> CylinderDistribution:
    if isinstance(x, UniversalPoint):
        for st in x.schedule.stages[1:]:
            if st.b == N:
                return x.checkpoint_measure(st.n, L)
        x = x.point
    counts = x.window_counts(0, N, L)
    return CylinderDistribution(L, {w: Fraction(c, N) for w, c in counts.items()})


def base_orbit_for(word: Word, sft: SFT) -> tuple[PeriodicOrbit, int]:
    """Periodic extension of ``word`` closed by the shortest connector, with its phase."""
    word = tuple(word)
    if not word or not sft.is_admissible(word):
        raise InadmissibleWord(f"word {word_str(word)} is not admissible")
    closing = () if sft.allowed(word[-1], word[0]) else shortest_connector(sft, word[-1], word[0])
    return PeriodicOrbit.canonical(word + closing)


def density_witness(word: Word, template: GluingTargetSequence, sft: SFT) -> UniversalPoint:
    """A glued point whose coordinates ``0..len(word)-1`` spell ``word``."""
    orbit, phase = base_orbit_for(word, sft)
    targets = GluingTargetSequence(template.entries, orbit, len(word), phase, template.growth)
    return glue(targets, sft)


@dataclass(frozen=True)
class ScanEntry:
    cylinder: Word
    ball_index: int
    horizon: int | None
    distance: Fraction | None


@dataclass(frozen=True)
class DensityReport:
    entries: tuple
    witnesses: dict = field(repr=False, compare=False)
    depth: int = 1

    @property
    def failures(self) -> list[ScanEntry]:
        return [e for e in self.entries if e.horizon is None]

    @property
    def success(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        cylinders = len({e.cylinder for e in self.entries})
        status = "ok" if self.success else f"{len(self.failures)} absent"
        return f"# cylinders={cylinders} checks={len(self.entries)} status={status}"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cylinder", "ball", "horizon", "rho"])
        for e in self.entries:
            rho = "" if e.distance is None else f"{e.distance.numerator}/{e.distance.denominator}"
            w.writerow([word_str(e.cylinder), e.ball_index,
                        "absent" if e.horizon is None else str(e.horizon), rho])
        buf.write(self.summary() + "\n")
        return buf.getvalue()


def scan_cylinder(witness: UniversalPoint, cylinder: Word, system: BallSystem, L: int) -> list[ScanEntry]:
    out = []
    checkpoints = witness.checkpoints
    for i, ball in enumerate(system.inner):
        N = pu_membership(witness, ball, checkpoints, L)
        d = None if N is None else weak_star_distance(_empirical(witness, N, L), ball.center, L)
        out.append(ScanEntry(cylinder, i, N, d))
    return out


def residual_scan(sft: SFT, scan_depth: int, system: BallSystem, template: GluingTargetSequence,
                  L: int) -> DensityReport:
    """Witness every ball from inside every cylinder of length ``scan_depth``."""
    if scan_depth < 1:
        raise ValueError("scan depth must be at least 1")
    entries = []
    witnesses = {}
    for w in admissible_words(sft, scan_depth):
        up = density_witness(w, template, sft)
        witnesses[w] = up
        entries.extend(scan_cylinder(up, w, system, L))
    return DensityReport(tuple(entries), witnesses, scan_depth)


def reverify(report: DensityReport, system: BallSystem, L: int) -> bool:
    """Recompute every recorded distance from the stored witnesses."""
    for e in report.entries:
        if e.horizon is None:
            continue
        up = report.witnesses[e.cylinder]
        d = weak_star_distance(_empirical(up.point, e.horizon, L), system.inner[e.ball_index].center, L)
        if d != e.distance or d > system.inner[e.ball_index].radius:
            return False
    return True
