"""Brute-force reference computations used to pin expected values.

Nothing here calls into the closed-form paths of the library: words are
expanded eagerly, cycles come from networkx, extremal word sums from
exhaustive numpy enumeration.
"""

from collections import Counter
from fractions import Fraction
from itertools import product
from math import lcm

import networkx as nx
import numpy as np


def mixing_time(matrix):
    k = len(matrix)
    power = [row[:] for row in matrix]
    for m in range(1, k * k + 2):
        if all(all(v > 0 for v in row) for row in power):
            return m
        power = [[int(any(power[i][t] and matrix[t][j] for t in range(k))) for j in range(k)]
                 for i in range(k)]
    return None


def periodic_words(matrix, P):
    """Canonical words of primitive periodic orbits with period <= P, by brute force."""
    k = len(matrix)
    out = set()
    for p in range(1, P + 1):
        for w in product(range(k), repeat=p):
            if not all(matrix[w[i]][w[(i + 1) % p]] for i in range(p)):
                continue
            rotations = [w[i:] + w[:i] for i in range(p)]
            if len(set(rotations)) != p:
                continue
            out.add(min(rotations))
    return sorted(out, key=lambda w: (len(w), w))


def eager_counts(x, lo, hi, L):
    seq = [x.coordinate(j) for j in range(lo, hi + L - 1)]
    return Counter(tuple(seq[i:i + L]) for i in range(hi - lo))


def graph(matrix):
    G = nx.DiGraph()
    k = len(matrix)
    G.add_nodes_from(range(k))
    G.add_edges_from((i, j) for i in range(k) for j in range(k) if matrix[i][j])
    return G


def simple_cycle_means(matrix, w):
    return [(Fraction(sum(w[s] for s in c), len(c)), tuple(c))
            for c in nx.simple_cycles(graph(matrix))]


def max_cycle_mean(matrix, w):
    return max(m for m, _ in simple_cycle_means(matrix, w))


def min_cycle_mean(matrix, w):
    return min(m for m, _ in simple_cycle_means(matrix, w))


def enumerated_word_extrema(matrix, w, n_max):
    """Max of ``sum w`` over every admissible word of length ``n`` for n = 1..n_max.

    Weights are scaled to integers by their common denominator; each word is
    kept as its own row so no two words are merged.
    """
    k = len(matrix)
    den = lcm(*(Fraction(w[s]).denominator for s in range(k)))
    iw = np.array([int(Fraction(w[s]) * den) for s in range(k)], dtype=np.int64)
    A = np.array(matrix, dtype=bool)
    last = np.arange(k)
    sums = iw.copy()
    out = [Fraction(int(sums.max()), den)]
    for _ in range(2, n_max + 1):
        nl, ns = [], []
        for b in range(k):
            keep = A[last, b]
            nl.append(np.full(int(keep.sum()), b))
            ns.append(sums[keep] + iw[b])
        last = np.concatenate(nl)
        sums = np.concatenate(ns)
        out.append(Fraction(int(sums.max()), den))
    return out


def eq6_sides(A, values, norm):
    A = sorted(set(A))
    top = A[-1]
    sub = Fraction(sum(values[j] for j in A), len(A))
    full = Fraction(sum(values[: top + 1]), top + 1)
    return abs(sub - full), Fraction(2 * (top + 1 - len(A))) * norm / len(A)
