"""Diagonal locally constant cocycles: exponents, mean cycles and certificates.

A cocycle assigns to each symbol ``s`` the log contraction ``u(s)`` along E
and the log expansion ``v(s)`` along F.  Over an SFT the extreme values of
``int u dmu`` over invariant measures are attained on simple cycles, so the
exponent sign conditions reduce to exact maximum/minimum cycle means.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import exp
from typing import Mapping, Sequence

import networkx as nx

from .errors import HorizonBeyondPoint, InconsistentVerdicts, PairNotInTargets, PositiveCycleDetected
from .genericity import density_witness
from .glue import GluingTargetSequence, UniversalPoint
from .measures import LocalFunction, cylinder_marginals
from .sft import SFT, PeriodicOrbit, ScheduledPoint, admissible_words


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class DiagonalCocycle:
    """Per-symbol log rates; ``L`` is the block length of the NUH averages."""

    u: Mapping[int, Fraction]
    v: Mapping[int, Fraction]
    L: int = 1

    def __post_init__(self):
        object.__setattr__(self, "u", {int(s): Fraction(x) for s, x in self.u.items()})
        object.__setattr__(self, "v", {int(s): Fraction(x) for s, x in self.v.items()})
        if set(self.u) != set(self.v):
            raise ValueError("u and v must be defined on the same symbols")
        if self.L < 1:
            raise ValueError("block length must be positive")

    def check_alphabet(self, sft: SFT) -> None:
        if set(self.u) != set(range(sft.k)):
            raise ValueError("cocycle must be defined on every symbol")

    def phi_E(self, sft: SFT) -> LocalFunction:
        """``log ||Df^L|_E||`` as a function of the next ``L`` symbols."""
        return LocalFunction(self.L, {w: sum((self.u[s] for s in w), Fraction(0))
                                      for w in admissible_words(sft, self.L)})

    def phi_F(self, sft: SFT) -> LocalFunction:
        """``log ||(Df^L|_F)^{-1}||``, i.e. minus the summed expansion rates."""
        return LocalFunction(self.L, {w: -sum((self.v[s] for s in w), Fraction(0))
                                      for w in admissible_words(sft, self.L)})


def birkhoff_sum(x: ScheduledPoint, w: Mapping[int, Fraction], N: int) -> Fraction:
    """``sum_{j<N} w(x_j)`` in closed form over the block plan."""
    if N < 1:
        raise ValueError("horizon must be positive")
    if x.extent is not None and N > x.extent:
        raise HorizonBeyondPoint(f"horizon {N} beyond materialized extent {x.extent}")
    return x.symbol_sum(w, 0, N)


@dataclass(frozen=True)
class MeanCycle:
    value: Fraction
    cycle: PeriodicOrbit


def _karp(sft: SFT, w: Mapping[int, Fraction]) -> Fraction:
    n = sft.k
    preds = [[a for a in range(n) if sft.allowed(a, b)] for b in range(n)]
    D = [[Fraction(0)] * n]
    for _ in range(n):
        prev = D[-1]
        row = []
        for b in range(n):
            cands = [prev[a] + w[a] for a in preds[b] if prev[a] is not None]
            row.append(max(cands) if cands else None)
        D.append(row)
    best = None
    for v in range(n):
        if D[n][v] is None:
            continue
        worst = min((D[n][v] - D[t][v]) / (n - t) for t in range(n) if D[t][v] is not None)
        best = worst if best is None else max(best, worst)
    return best


def _critical_cycle(sft: SFT, w: Mapping[int, Fraction], lam: Fraction) -> PeriodicOrbit:
    # longest-path potentials for w - lam; a cycle of tight edges has mean lam
    reduced = {s: w[s] - lam for s in range(sft.k)}
    pot = [Fraction(0)] * sft.k
    for _ in range(sft.k + 1):
        changed = False
        for a in range(sft.k):
            for b in sft.successors(a):
                if pot[a] + reduced[a] > pot[b]:
                    pot[b] = pot[a] + reduced[a]
                    changed = True
        if not changed:
            break
    tight = nx.DiGraph()
    for a in range(sft.k):
        for b in sft.successors(a):
            if pot[a] + reduced[a] == pot[b]:
                tight.add_edge(a, b)
    best = None
    for i, cyc in enumerate(nx.simple_cycles(tight)):
        orbit = PeriodicOrbit.from_word(tuple(cyc))
        if best is None or (orbit.period, orbit.word) < (best.period, best.word):
            best = orbit
        if i > 10000:
            break
    return best


def max_mean_cycle(sft: SFT, w: Mapping[int, Fraction]) -> MeanCycle:
    """Largest ``(sum of w over a cycle) / (cycle length)`` via Karp's recursion."""
    w = {s: Fraction(x) for s, x in w.items()}
    lam = _karp(sft, w)
    return MeanCycle(lam, _critical_cycle(sft, w, lam))


def min_mean_cycle(sft: SFT, w: Mapping[int, Fraction]) -> MeanCycle:
    res = max_mean_cycle(sft, {s: -Fraction(x) for s, x in w.items()})
    return MeanCycle(-res.value, res.cycle)


@dataclass(frozen=True)
class CaoResult:
    passed: bool
    eta: Fraction
    max_mean_u: MeanCycle
    min_mean_v: MeanCycle


def cao_check(sft: SFT, c: DiagonalCocycle) -> CaoResult:
    """Every invariant measure contracts E and expands F iff the cycle means do."""
    c.check_alphabet(sft)
    mu = max_mean_cycle(sft, c.u)
    mv = min_mean_cycle(sft, c.v)
    passed = mu.value < 0 and mv.value > 0
    return CaoResult(passed, min(-mu.value, mv.value), mu, mv)


def periodic_exponents(orbit: PeriodicOrbit, c: DiagonalCocycle) -> tuple[Fraction, Fraction]:
    p = orbit.period
    lam_e = sum((c.u[s] for s in orbit.word), Fraction(0)) / p
    lam_f = sum((c.v[s] for s in orbit.word), Fraction(0)) / p
    return lam_e, lam_f


@dataclass(frozen=True)
class NUHCertificate:
    """Checkpoint averages of ``phi_E`` and ``phi_F``; both must stay ``<= -eta``.

    The limsup is replaced by the finite set of checkpoints from ``onset`` on.
    """

    eta: Fraction
    L: int
    onset: int
    averages: tuple  # (stage, b_n, avg phi_E, avg phi_F)

    def stage_ok(self, row) -> bool:
        _, _, e, f = row
        return e <= -self.eta and f <= -self.eta

    @property
    def verdicts(self) -> list[tuple[int, bool]]:
        return [(row[0], self.stage_ok(row)) for row in self.averages]

    @property
    def passed(self) -> bool:
        return all(self.stage_ok(r) for r in self.averages if r[0] >= self.onset)

    @property
    def failing_stages(self) -> list[int]:
        return [r[0] for r in self.averages if r[0] >= self.onset and not self.stage_ok(r)]

    def to_dict(self) -> dict:
        return {
            "eta": _frac_str(self.eta),
            "L": self.L,
            "onset": self.onset,
            "passed": self.passed,
            "note": "limsup certified over the finite checkpoint set from the onset stage",
            "checkpoints": [
                {"stage": n, "b": str(b), "avg_phi_E": _frac_str(e), "avg_phi_F": _frac_str(f),
                 "ok": self.stage_ok((n, b, e, f))}
                for n, b, e, f in self.averages
            ],
        }


def nuh_check(up: UniversalPoint, c: DiagonalCocycle, eta, onset: int = 1) -> NUHCertificate:
    eta = Fraction(eta)
    if eta <= 0:
        raise ValueError("eta must be positive")
    phi_e = c.phi_E(up.sft)
    phi_f = c.phi_F(up.sft)
    rows = []
    for st in up.schedule.stages[1:]:
        rows.append((st.n, st.b, up.checkpoint_average(st.n, phi_e),
                     up.checkpoint_average(st.n, phi_f)))
    return NUHCertificate(eta, c.L, onset, tuple(rows))


def _max_path_sum(sft: SFT, w: Mapping[int, Fraction]) -> Fraction:
    # best[s]: largest sum over nonempty paths starting at s; empty path counts 0
    best = {s: w[s] for s in range(sft.k)}
    for _ in range(sft.k + 1):
        new = {s: w[s] + max([Fraction(0), *(best[t] for t in sft.successors(s))])
               for s in range(sft.k)}
        if new == best:
            return max(Fraction(0), *best.values())
        best = new
    raise PositiveCycleDetected("reduced weights still improve after k rounds")


def max_word_sums(sft: SFT, w: Mapping[int, Fraction], n_max: int) -> list[Fraction]:
    """``max`` of ``sum w`` over admissible words of each length ``1..n_max``."""
    f = {s: w[s] for s in range(sft.k)}
    out = [max(f.values())]
    for _ in range(n_max - 1):
        f = {b: max(f[a] for a in range(sft.k) if sft.allowed(a, b)) + w[b] for b in range(sft.k)}
        out.append(max(f.values()))
    return out


@dataclass(frozen=True)
class HyperbolicityCertificate:
    """``||Df^n|_E|| <= C lambda^n`` and ``||Df^-n|_F|| <= C lambda^n``, in log form.

    ``log_lambda = -eta`` and ``log_C = max(D_E, D_F)``.
    """

    eta: Fraction
    max_mean_u: Fraction
    min_mean_v: Fraction
    D_E: Fraction
    D_F: Fraction
    n_check: int
    max_sums_E: tuple = field(repr=False)
    max_sums_F: tuple = field(repr=False)

    @property
    def log_lambda(self) -> Fraction:
        return -self.eta

    @property
    def log_C(self) -> Fraction:
        return max(self.D_E, self.D_F)

    def holds(self) -> bool:
        return all(s <= self.log_C - self.eta * n for n, s in enumerate(self.max_sums_E, start=1)) and \
            all(s <= self.log_C - self.eta * n for n, s in enumerate(self.max_sums_F, start=1))

    def to_dict(self) -> dict:
        return {
            "eta": _frac_str(self.eta),
            "log_lambda": _frac_str(self.log_lambda),
            "log_C": _frac_str(self.log_C),
            "max_mean_cycle_u": _frac_str(self.max_mean_u),
            "min_mean_cycle_v": _frac_str(self.min_mean_v),
            "D_E": _frac_str(self.D_E),
            "D_F": _frac_str(self.D_F),
            "n_check": self.n_check,
            "validated": self.holds(),
            "lambda_decimal": f"{exp(-self.eta):.12f}",
            "C_decimal": f"{exp(self.log_C):.12f}",
        }


def uniform_constants(sft: SFT, c: DiagonalCocycle, n_check: int = 25) -> HyperbolicityCertificate:
    """Uniform constants from the reduced weights ``u + eta`` and ``-v + eta``.

    The reduced weights have no positive cycles, so the largest path sum is
    finite; it bounds every word sum by ``D - eta * n``.  The bound is then
    checked exactly for all word lengths up to ``n_check``.
    """
    cao = cao_check(sft, c)
    if not cao.passed:
        raise ValueError("cocycle fails the mean-cycle sign conditions")
    eta = cao.eta
    f = {s: -c.v[s] for s in range(sft.k)}
    D_E = _max_path_sum(sft, {s: c.u[s] + eta for s in range(sft.k)})
    D_F = _max_path_sum(sft, {s: f[s] + eta for s in range(sft.k)})
    cert = HyperbolicityCertificate(
        eta, cao.max_mean_u.value, cao.min_mean_v.value, D_E, D_F, n_check,
        tuple(max_word_sums(sft, c.u, n_check)), tuple(max_word_sums(sft, f, n_check)))
    if not cert.holds():
        raise PositiveCycleDetected("validation of the uniform constants failed")
    return cert


# --------------------------------------------------------------------------
# Irregular points


def checkpoint_series(up: UniversalPoint, xi: LocalFunction) -> list[tuple[int, Fraction]]:
    return [(st.n, up.checkpoint_average(st.n, xi)) for st in up.schedule.stages[1:]]


@dataclass(frozen=True)
class Oscillation:
    value: Fraction
    guaranteed: Fraction
    averages: tuple


def irregular_detect(up: UniversalPoint, xi: LocalFunction,
                     pair: Sequence[PeriodicOrbit]) -> Oscillation:
    """Spread of checkpoint averages over the stages targeting ``pair``.

    Only stages whose shadowing precision resolves ``xi`` are used; there the
    average is within ``2**(1-n) / p_n`` of the orbit mean, which yields the
    guaranteed lower bound.
    """
    K0 = up.schedule.K0
    alpha, beta = pair
    usable = {}
    for orbit in (alpha, beta):
        stages = [n for n in up.stages_targeting(orbit) if K0 + n - 1 >= xi.depth]
        if not stages:
            raise PairNotInTargets(f"orbit {orbit} is not targeted at a resolving stage")
        usable[orbit] = stages
    stages = sorted(set(usable[alpha]) | set(usable[beta]))
    averages = tuple((n, up.checkpoint_average(n, xi)) for n in stages)
    vals = [a for _, a in averages]
    value = max(vals) - min(vals)
    gap = abs(cylinder_marginals(beta, xi.depth).integrate(xi)
              - cylinder_marginals(alpha, xi.depth).integrate(xi))
    n1, n2 = usable[alpha][-1], usable[beta][-1]
    guaranteed = gap - Fraction(2, 2 ** n1 * alpha.period) - Fraction(2, 2 ** n2 * beta.period)
    if alpha != beta:
        assert value >= guaranteed, (value, guaranteed)
    return Oscillation(value, guaranteed, averages)


# --------------------------------------------------------------------------
# Point-to-set pipeline


@dataclass
class Theorem2Report:
    nuh: NUHCertificate
    cao: CaoResult
    uniform: HyperbolicityCertificate | None
    nuh_pass: bool
    cao_pass: bool
    tolerance: Fraction
    forward_ok: bool
    backward_ok: bool | None
    consistent: bool

    def verdict_rows(self) -> list[tuple[str, str]]:
        return [
            ("nuh_check", "pass" if self.nuh_pass else "fail"),
            ("cao_check", "pass" if self.cao_pass else "fail"),
            ("uniform_constants", "issued" if self.uniform else "none"),
            ("consistent", "yes" if self.consistent else "no"),
        ]

    def to_dict(self) -> dict:
        return {
            "nuh": self.nuh.to_dict(),
            "cao": {
                "passed": self.cao.passed,
                "eta": _frac_str(self.cao.eta),
                "max_mean_cycle_u": _frac_str(self.cao.max_mean_u.value),
                "max_mean_cycle_u_witness": str(self.cao.max_mean_u.cycle),
                "min_mean_cycle_v": _frac_str(self.cao.min_mean_v.value),
                "min_mean_cycle_v_witness": str(self.cao.min_mean_v.cycle),
            },
            "uniform": None if self.uniform is None else self.uniform.to_dict(),
            "verdicts": {"nuh": self.nuh_pass, "cao": self.cao_pass},
            "tolerance": _frac_str(self.tolerance),
            "forward_ok": self.forward_ok,
            "backward_ok": self.backward_ok,
            "consistent": self.consistent,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def theorem2_pipeline(sft: SFT, w, c: DiagonalCocycle, template: GluingTargetSequence,
                      eta, onset: int = 1) -> Theorem2Report:
    """NUH at a glued point inside the cylinder ``[w]`` versus the cycle criterion.

    Forward: every checkpoint average from ``onset`` is within
    ``2 ||phi|| a_n / b_n`` of the stage orbit's mean.  Backward: when the
    cycle criterion holds, every average is at most ``-L eta_c + L D / b_n``.
    Verdicts may differ only when ``|L eta_c - eta|`` is within those
    tolerances; anything else raises :class:`InconsistentVerdicts`.
    """
    eta = Fraction(eta)
    up = density_witness(tuple(w), template, sft)
    nuh = nuh_check(up, c, eta, onset)
    cao = cao_check(sft, c)
    uniform = uniform_constants(sft, c) if cao.passed else None
    L = c.L
    K0 = up.schedule.K0
    phi_e, phi_f = c.phi_E(sft), c.phi_F(sft)
    norm = max(phi_e.sup_norm(), phi_f.sup_norm())

    forward_ok = True
    tol = Fraction(0)
    for n, b, avg_e, avg_f in nuh.averages:
        if n < onset:
            continue
        st = up.schedule[n]
        dev = 2 * norm * Fraction(st.a, st.b)
        tol = max(tol, dev)
        if K0 + n < L - 1:
            continue
        lam_e, lam_f = periodic_exponents(st.orbit, c)
        if abs(avg_e - L * lam_e) > dev or abs(avg_f + L * lam_f) > dev:
            forward_ok = False

    backward_ok = None
    if uniform is not None:
        backward_ok = True
        for n, b, avg_e, avg_f in nuh.averages:
            if n < onset:
                continue
            slack = L * uniform.log_C / b
            tol = max(tol, slack)
            if avg_e > -L * cao.eta + L * uniform.D_E / b or avg_f > -L * cao.eta + L * uniform.D_F / b:
                backward_ok = False

    nuh_pass = nuh.passed
    cao_pass = cao.passed and L * cao.eta >= eta
    consistent = forward_ok and backward_ok is not False and (
        nuh_pass == cao_pass or abs(L * cao.eta - eta) <= tol)
    report = Theorem2Report(nuh, cao, uniform, nuh_pass, cao_pass, tol, forward_ok, backward_ok,
                            consistent)
    if not consistent:
        raise InconsistentVerdicts(
            f"nuh={'pass' if nuh_pass else 'fail'} cao={'pass' if cao_pass else 'fail'} "
            f"beyond tolerance {tol}", report=report)
    return report
