"""Invariant measures at finite cylinder depth, with exact rational weights."""

from __future__ import annotations

import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping

import networkx as nx

from .errors import (
    CoverageFailure,
    DepthMismatch,
    HorizonBeyondPoint,
    InfeasibleEpsilon,
    NotInvariant,
)
from .sft import (
    SFT,
    PeriodicOrbit,
    ScheduledPoint,
    Word,
    admissible_words,
    cyclic_windows,
    enumerate_periodic,
    parse_word,
    word_str,
)


@dataclass(frozen=True)
class CylinderDistribution:
    """Weights on the words of length ``depth``; absent words weigh zero."""

    depth: int
    weights: Mapping[Word, Fraction]

    def __post_init__(self):
        clean = {tuple(w): Fraction(v) for w, v in self.weights.items() if v != 0}
        if any(len(w) != self.depth for w in clean):
            raise DepthMismatch(f"all words must have length {self.depth}")
        if any(v < 0 for v in clean.values()):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", dict(sorted(clean.items())))

    def __getitem__(self, word) -> Fraction:
        return self.weights.get(tuple(word), Fraction(0))

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def marginal(self, depth: int) -> "CylinderDistribution":
        """Weights of the length-``depth`` prefixes."""
        if depth > self.depth:
            raise DepthMismatch(f"cannot raise depth {self.depth} to {depth}")
        if depth == self.depth:
            return self
        acc: dict = defaultdict(Fraction)
        for w, v in self.weights.items():
            acc[w[:depth]] += v
        return CylinderDistribution(depth, acc)

    def suffix_marginal(self, depth: int) -> "CylinderDistribution":
        acc: dict = defaultdict(Fraction)
        for w, v in self.weights.items():
            acc[w[len(w) - depth:]] += v
        return CylinderDistribution(depth, acc)

    def is_invariant(self) -> bool:
        if self.total() != 1:
            return False
        return all(self.marginal(l).weights == self.suffix_marginal(l).weights
                   for l in range(1, self.depth))

    def integrate(self, f) -> Fraction:
        """Integral of a function of the first ``depth`` coordinates."""
        return sum((v * Fraction(f(w)) for w, v in self.weights.items()), Fraction(0))

    def to_csv(self) -> str:
        return "".join(f"{word_str(w)},{v.numerator}/{v.denominator}\n"
                       for w, v in self.weights.items())

    @classmethod
    def from_csv(cls, text: str) -> "CylinderDistribution":
        weights = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            w, v = line.split(",")
            weights[parse_word(w)] = Fraction(v)
        depths = {len(w) for w in weights}
        if len(depths) != 1:
            raise DepthMismatch("rows have mixed word lengths")
        return cls(depths.pop(), weights)


@dataclass(frozen=True)
class LocalFunction:
    """A function of the window ``x_0 .. x_{depth-1}``; unlisted words map to ``default``."""

    depth: int
    values: Mapping[Word, Fraction]
    default: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "values", {tuple(w): Fraction(v) for w, v in self.values.items()})
        object.__setattr__(self, "default", Fraction(self.default))
        if any(len(w) != self.depth for w in self.values):
            raise DepthMismatch(f"all words must have length {self.depth}")

    def __call__(self, word) -> Fraction:
        return self.values.get(tuple(word[:self.depth]), self.default)

    def sup_norm(self) -> Fraction:
        return max([abs(self.default), *(abs(v) for v in self.values.values())])

    @classmethod
    def indicator(cls, word) -> "LocalFunction":
        word = tuple(word)
        return cls(len(word), {word: Fraction(1)})

    @classmethod
    def constant(cls, c, depth: int = 1) -> "LocalFunction":
        return cls(depth, {}, Fraction(c))

    @classmethod
    def symbol_weights(cls, weights: Mapping[int, Fraction]) -> "LocalFunction":
        return cls(1, {(s,): Fraction(v) for s, v in weights.items()})

    def oscillation(self, K: int, sft: SFT | None = None) -> Fraction:
        """``max |f(y) - f(z)|`` over points with ``d(y, z) <= 2**-K``.

        Such points agree on coordinates ``|i| < K``, so the value vanishes
        once ``K >= depth``.
        """
        if K >= self.depth:
            return Fraction(0)
        if sft is None:
            vals = [self.default, *self.values.values()]
            return max(vals) - min(vals)
        groups: dict = defaultdict(list)
        for w in admissible_words(sft, self.depth):
            groups[w[:max(K, 0)]].append(self(w))
        return max(max(v) - min(v) for v in groups.values())

    def integrate_counts(self, counts: Mapping[Word, int]) -> Fraction:
        return sum((self(w) * c for w, c in counts.items()), Fraction(0))


@dataclass(frozen=True)
class PeriodicMeasure:
    orbit: PeriodicOrbit
    marginals: CylinderDistribution


@dataclass(frozen=True)
class EmpiricalMeasure:
    source: ScheduledPoint = field(repr=False)
    horizon: int
    marginals: CylinderDistribution


@dataclass(frozen=True)
class MeasureBall:
    center: CylinderDistribution
    radius: Fraction

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    def contains(self, mu: CylinderDistribution, depth: int | None = None) -> bool:
        L = self.center.depth if depth is None else depth
        return weak_star_distance(mu, self.center, L) <= self.radius


def cylinder_marginals(orbit: PeriodicOrbit, L: int) -> CylinderDistribution:
    if L < 1:
        raise ValueError("depth must be at least 1")
    counts = Counter(cyclic_windows(orbit.word, L))
    p = orbit.period
    return CylinderDistribution(L, {w: Fraction(c, p) for w, c in counts.items()})


def periodic_measure(orbit: PeriodicOrbit, L: int) -> PeriodicMeasure:
    return PeriodicMeasure(orbit, cylinder_marginals(orbit, L))


def total_variation(mu: CylinderDistribution, nu: CylinderDistribution) -> Fraction:
    words = set(mu.weights) | set(nu.weights)
    return sum((abs(mu[w] - nu[w]) for w in words), Fraction(0)) / 2


def weak_star_distance(mu: CylinderDistribution, nu: CylinderDistribution, L: int) -> Fraction:
    """``sum_{l=1..L} 2**-l * TV_l(mu, nu)``."""
    if mu.depth < L or nu.depth < L:
        raise DepthMismatch(f"need depth >= {L}, got {mu.depth} and {nu.depth}")
    return sum((Fraction(1, 2 ** l) * total_variation(mu.marginal(l), nu.marginal(l))
                for l in range(1, L + 1)), Fraction(0))


def empirical_counts(x: ScheduledPoint, N: int, L: int) -> Counter:
    if N < 1:
        raise ValueError("horizon must be positive")
    if x.extent is not None and N > x.extent:
        raise HorizonBeyondPoint(f"horizon {N} beyond materialized extent {x.extent}")
    return x.window_counts(0, N, L)


def empirical_measure(x: ScheduledPoint, N: int, L: int) -> EmpiricalMeasure:
    counts = empirical_counts(x, N, L)
    weights = {w: Fraction(c, N) for w, c in counts.items()}
    return EmpiricalMeasure(x, N, CylinderDistribution(L, weights))


# --------------------------------------------------------------------------
# Periodic approximation


def _lift_to_depth_two(mu: CylinderDistribution, sft: SFT | None) -> CylinderDistribution:
    """An invariant depth-2 distribution with depth-1 marginal ``mu``.

    Solved as an integer transportation problem between "leaving" and
    "entering" copies of each symbol over the allowed transitions.
    """
    if sft is None:
        raise ValueError("depth-1 input needs the ambient SFT")
    D = lcm(*(v.denominator for v in mu.weights.values()))
    G = nx.DiGraph()
    for a, v in mu.weights.items():
        G.add_edge("s", ("out", a[0]), capacity=int(v * D))
        G.add_edge(("in", a[0]), "t", capacity=int(v * D))
    for (a,) in mu.weights:
        for (b,) in mu.weights:
            if sft.allowed(a, b):
                # prefer alternation: distinct symbols first, loops last
                G.add_edge(("out", a), ("in", b), capacity=D, weight=int(a == b))
    flow = nx.max_flow_min_cost(G, "s", "t")
    sent = sum(flow["s"].values())
    if sent != D:
        raise NotInvariant("depth-1 frequencies are not realizable on this SFT")
    weights = {}
    for (a,) in mu.weights:
        for node, f in flow[("out", a)].items():
            if f:
                weights[(a, node[1])] = Fraction(f, D)
    return CylinderDistribution(2, weights)


def _eulerian_orbit(counts: Mapping[Word, int], sft: SFT | None) -> tuple[Word, int]:
    """Close up an integer edge multiset on the word graph and spell a circuit.

    Vertices are words of length ``L-1`` and each length-``L`` word is an
    edge from its prefix to its suffix.  Components are joined and degrees
    balanced by lexicographically least shortest paths.  Returns the cyclic
    word and the number of correction edges that were added.
    """
    L = len(next(iter(counts)))
    G = nx.MultiDiGraph()
    for w, c in sorted(counts.items()):
        for _ in range(c):
            G.add_edge(w[:-1], w[1:], word=w)
    if sft is not None:
        graph_edges = [w for w in admissible_words(sft, L)]
    else:
        graph_edges = sorted(counts)
    full = nx.DiGraph()
    for w in graph_edges:
        full.add_edge(w[:-1], w[1:], word=w)

    def path_edges(u, v):
        path = _lex_shortest_path(full, u, v)
        return [full.edges[a, b]["word"] for a, b in zip(path, path[1:])]

    added = 0

    def add(words):
        nonlocal added
        for w in words:
            G.add_edge(w[:-1], w[1:], word=w)
            added += 1

    comps = sorted((min(c) for c in nx.weakly_connected_components(G)))
    if len(comps) > 1:
        ring = comps + [comps[0]]
        for u, v in zip(ring, ring[1:]):
            add(path_edges(u, v))
    while True:
        surplus = sorted(v for v in G if G.out_degree(v) > G.in_degree(v))
        deficit = sorted(v for v in G if G.in_degree(v) > G.out_degree(v))
        if not surplus:
            break
        add(path_edges(deficit[0], surplus[0]))
    start = min(G.nodes)
    circuit = list(nx.eulerian_circuit(G, source=start, keys=True))
    word = tuple(G.edges[u, v, key]["word"][0] for u, v, key in circuit)
    return word, added


def _lex_shortest_path(G: nx.DiGraph, u, v) -> list:
    # BFS over a graph built in lexicographic edge order
    return nx.shortest_path(G, u, v)


def sigmund_approximate(mu: CylinderDistribution, eps, sft: SFT | None = None,
                        denominator_cap: int = 1 << 14,
                        small_period: int = 6) -> PeriodicOrbit:
    """A periodic orbit whose depth-L marginals are within ``eps`` of ``mu``.

    Short orbits that match ``mu`` exactly are returned first.  Otherwise the
    weights are scaled to integers with a common denominator ``D``; the
    resulting edge multiset on the word graph is completed to an Eulerian one
    and a circuit spells the orbit.  ``D`` doubles until the target accuracy
    is met or ``denominator_cap`` is exceeded.
    """
    eps = Fraction(eps)
    L = mu.depth
    if not mu.is_invariant():
        raise NotInvariant("distribution is not shift invariant")
    if sft is not None:
        for orbit in enumerate_periodic(sft, small_period):
            if cylinder_marginals(orbit, L) == mu:
                return orbit
    work = mu if L >= 2 else _lift_to_depth_two(mu, sft)
    Q = lcm(*(v.denominator for v in work.weights.values()))
    D = Q if Q <= denominator_cap else 1 << max(1, denominator_cap.bit_length() - 8)
    while D <= denominator_cap:
        counts = {w: int(v * D) for w, v in work.weights.items()}
        counts = {w: c for w, c in counts.items() if c}
        if counts:
            word, _ = _eulerian_orbit(counts, sft)
            orbit = PeriodicOrbit.from_word(word)
            if weak_star_distance(cylinder_marginals(orbit, L), mu, L) <= eps:
                return orbit
        D *= 2
    raise InfeasibleEpsilon(f"accuracy {eps} not reached with denominators up to {denominator_cap}")


# --------------------------------------------------------------------------
# Nets over the invariant simplex


def cycle_measures(sft: SFT, L: int, limit: int = 400) -> list[CylinderDistribution]:
    """Extreme points of the depth-L invariant polytope (simple cycles of the word graph)."""
    D = max(L, 2)
    G = nx.DiGraph()
    for w in admissible_words(sft, D):
        G.add_edge(w[:-1], w[1:])
    out = []
    seen = set()
    for cyc in nx.simple_cycles(G):
        orbit = PeriodicOrbit.from_word(tuple(v[0] for v in cyc))
        if orbit in seen:
            continue
        seen.add(orbit)
        out.append(cylinder_marginals(orbit, L))
        if len(out) >= limit:
            break
    return out


def mixture(parts: Iterable[tuple[Fraction, CylinderDistribution]]) -> CylinderDistribution:
    acc: dict = defaultdict(Fraction)
    depth = None
    for lam, mu in parts:
        depth = mu.depth
        for w, v in mu.weights.items():
            acc[w] += lam * v
    return CylinderDistribution(depth, acc)


def random_invariant(sft: SFT, L: int, rng: random.Random, terms: int = 3,
                     extremes: list | None = None) -> CylinderDistribution:
    """Random rational convex combination of cycle measures."""
    extremes = extremes or cycle_measures(sft, L)
    chosen = [rng.choice(extremes) for _ in range(terms)]
    raw = [rng.randint(1, 20) for _ in chosen]
    total = sum(raw)
    return mixture((Fraction(r, total), mu) for r, mu in zip(raw, chosen))


@dataclass(frozen=True)
class EpsilonNet:
    elements: list
    epsilon: Fraction
    depth: int
    samples: int
    worst_sample_distance: Fraction

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


def epsilon_net(sft: SFT, eps, L: int, P: int, samples: int = 64, seed: int = 0) -> EpsilonNet:
    """Periodic measures of period ``<= P`` pruned so no two lie within ``eps/2``.

    Coverage is certified by sampling: each of ``samples`` random points of the
    depth-L invariant polytope must lie within ``eps`` of some net element.
    """
    eps = Fraction(eps)
    net: list[PeriodicMeasure] = []
    for orbit in enumerate_periodic(sft, P):
        pm = periodic_measure(orbit, L)
        if all(weak_star_distance(pm.marginals, q.marginals, L) > eps / 2 for q in net):
            net.append(pm)
    rng = random.Random(seed)
    extremes = cycle_measures(sft, L)
    worst = Fraction(0)
    for _ in range(samples):
        sample = random_invariant(sft, L, rng, extremes=extremes)
        d = min(weak_star_distance(sample, q.marginals, L) for q in net) if net else Fraction(1)
        worst = max(worst, d)
        if d > eps:
            raise CoverageFailure(f"sample at distance {d} > {eps} from the net; raise P",
                                  sample=sample, distance=d)
    return EpsilonNet(net, eps, L, samples, worst)
