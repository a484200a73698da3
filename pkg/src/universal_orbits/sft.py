"""Two-sided subshifts of finite type and lazily scheduled points on them.

Symbols are the integers ``0..k-1``; words are tuples of symbols.  All
positions, lengths and repetition counts are Python ints, so coordinates
far beyond 2**64 are handled without special care.
"""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import EmptyRowOrColumn, GapTooSmall, InadmissibleWord, NotMixing

Word = tuple


@dataclass(frozen=True)
class SFT:
    """Transition matrix ``A`` with ``A[a][b] == 1`` iff ``b`` may follow ``a``."""

    transitions: tuple
    mixing_time: int

    @property
    def k(self) -> int:
        return len(self.transitions)

    alphabet_size = k

    def allowed(self, a: int, b: int) -> bool:
        return self.transitions[a][b] == 1

    def successors(self, a: int) -> list[int]:
        return [b for b in range(self.k) if self.transitions[a][b]]

    def is_admissible(self, word: Sequence[int]) -> bool:
        if any(not 0 <= s < self.k for s in word):
            return False
        return all(self.transitions[a][b] for a, b in zip(word, word[1:]))

    def is_cyclically_admissible(self, word: Sequence[int]) -> bool:
        return bool(word) and self.is_admissible(word) and self.allowed(word[-1], word[0])

    def to_text(self) -> str:
        rows = ["".join(str(x) for x in row) for row in self.transitions]
        return "\n".join([str(self.k), *rows]) + "\n"


def validate_sft(matrix) -> SFT:
    """Check ``matrix`` and return an :class:`SFT` with its minimal mixing time."""
    rows = tuple(tuple(int(x) for x in row) for row in matrix)
    k = len(rows)
    if k < 1:
        raise ValueError("alphabet must be nonempty")
    if any(len(row) != k for row in rows):
        raise ValueError("transition matrix must be square")
    if any(x not in (0, 1) for row in rows for x in row):
        raise ValueError("transition matrix must be 0/1")
    A = np.array(rows, dtype=np.int64)
    if (A.sum(axis=1) == 0).any() or (A.sum(axis=0) == 0).any():
        raise EmptyRowOrColumn("every row and column needs at least one allowed transition")
    power = A.copy()
    for m in range(1, k * k + 2):
        if (power > 0).all():
            return SFT(rows, m)
        power = ((power @ A) > 0).astype(np.int64)
    raise NotMixing(f"no power A^n with n <= {k * k + 1} is positive")


def parse_sft(text: str) -> SFT:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty SFT file")
    try:
        k = int(lines[0])
    except ValueError:
        raise ValueError(f"line 1: expected alphabet size, got {lines[0]!r}") from None
    if len(lines) != k + 1:
        raise ValueError(f"expected {k} matrix rows, got {len(lines) - 1}")
    matrix = []
    for i, row in enumerate(lines[1:], start=2):
        if len(row) != k or set(row) - {"0", "1"}:
            raise ValueError(f"line {i}: expected {k} binary digits, got {row!r}")
        matrix.append([int(c) for c in row])
    return validate_sft(matrix)


FULL_2_SHIFT = validate_sft([[1, 1], [1, 1]])
GOLDEN_MEAN = validate_sft([[1, 1], [1, 0]])


def word_str(word: Sequence[int]) -> str:
    if all(s < 10 for s in word):
        return "".join(str(s) for s in word)
    return ".".join(str(s) for s in word)


def parse_word(text: str) -> Word:
    text = text.strip()
    if not text:
        return ()
    if "." in text:
        return tuple(int(s) for s in text.split("."))
    return tuple(int(c) for c in text)


def admissible_words(sft: SFT, n: int) -> Iterator[Word]:
    """All admissible words of length ``n`` in lexicographic order."""
    if n <= 0:
        if n == 0:
            yield ()
        return
    stack = [(s,) for s in reversed(range(sft.k))]
    while stack:
        w = stack.pop()
        if len(w) == n:
            yield w
            continue
        for b in reversed(sft.successors(w[-1])):
            stack.append(w + (b,))


def _path_table(sft: SFT, b: int, g: int) -> list[set[int]]:
    # reach[t]: states with an admissible path of exactly t steps ending at b
    reach = [{b}]
    for _ in range(g):
        prev = reach[-1]
        reach.append({s for s in range(sft.k) if any(sft.transitions[s][c] for c in prev)})
    return reach


def lex_path(sft: SFT, a: int, b: int, g: int) -> Word | None:
    """Intermediate symbols of the lexicographically least ``g``-step path a -> b."""
    if g < 1:
        return None
    reach = _path_table(sft, b, g)
    if a not in reach[g]:
        return None
    out = []
    cur = a
    for i in range(1, g):
        cur = next(c for c in sft.successors(cur) if c in reach[g - i])
        out.append(cur)
    return tuple(out)


def connector(sft: SFT, a: int, b: int, gap: int) -> Word:
    """The ``gap - 1`` symbols strictly between ``a`` and ``b`` on a ``gap``-step path."""
    if gap < sft.mixing_time:
        raise GapTooSmall(f"gap {gap} below mixing time {sft.mixing_time}")
    path = lex_path(sft, a, b, gap)
    if path is None:  # pragma: no cover - mixing guarantees a path
        raise GapTooSmall(f"no path of {gap} steps from {a} to {b}")
    return path


def shortest_connector(sft: SFT, a: int, b: int) -> Word:
    """Lexicographically least path between ``a`` and ``b`` with the fewest steps."""
    for g in range(1, sft.mixing_time + 1):
        path = lex_path(sft, a, b, g)
        if path is not None:
            return path
    raise GapTooSmall(f"no path from {a} to {b}")  # pragma: no cover


def least_rotation(word: Sequence[int]) -> int:
    """Booth's algorithm: start index of the lexicographically least rotation."""
    s = list(word) * 2
    n = len(s)
    f = [-1] * n
    k = 0
    for j in range(1, n):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k % len(word) if word else 0


def primitive_root_length(word: Sequence[int]) -> int:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and all(word[i] == word[i % d] for i in range(d, n)):
            return d
    return n


@dataclass(frozen=True, order=True)
class PeriodicOrbit:
    """A periodic orbit stored as its primitive, lexicographically least word."""

    word: Word

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))
        if not self.word:
            raise ValueError("periodic orbit needs a nonempty word")
        if primitive_root_length(self.word) != len(self.word):
            raise ValueError(f"word {word_str(self.word)} is not primitive")
        if least_rotation(self.word) != 0:
            raise ValueError(f"word {word_str(self.word)} is not in canonical rotation")

    @property
    def period(self) -> int:
        return len(self.word)

    def __str__(self) -> str:
        return word_str(self.word)

    @classmethod
    def canonical(cls, word: Sequence[int]) -> tuple["PeriodicOrbit", int]:
        """Canonical orbit of the periodic extension of ``word`` and its offset.

        The offset ``t`` satisfies ``orbit.word[(t + i) % p] == word[i % len(word)]``.
        """
        word = tuple(word)
        d = primitive_root_length(word)
        root = word[:d]
        r = least_rotation(root)
        orbit = cls(root[r:] + root[:r])
        return orbit, (-r) % d

    @classmethod
    def from_word(cls, word: Sequence[int]) -> "PeriodicOrbit":
        return cls.canonical(word)[0]

    @classmethod
    def parse(cls, text: str) -> "PeriodicOrbit":
        return cls.from_word(parse_word(text))

    def admissible_in(self, sft: SFT) -> bool:
        return sft.is_cyclically_admissible(self.word)


def _lyndon_words(k: int, n: int) -> Iterator[Word]:
    # Fredricksen-Kessler-Maiorana: Lyndon words of length <= n in lex order
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(w)
        m = len(w)
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()


def enumerate_periodic(sft: SFT, P: int) -> list[PeriodicOrbit]:
    """Every periodic orbit of period ``<= P``, sorted by (period, word)."""
    if P < 1:
        return []
    found = [PeriodicOrbit(w) for w in _lyndon_words(sft.k, P) if sft.is_cyclically_admissible(w)]
    return sorted(found, key=lambda o: (o.period, o.word))


def higher_block(sft: SFT, L: int) -> tuple[SFT, list[Word]]:
    """Depth-``L`` block presentation: states are admissible ``L``-words."""
    words = list(admissible_words(sft, L))
    index = {w: i for i, w in enumerate(words)}
    n = len(words)
    matrix = [[0] * n for _ in range(n)]
    for w in words:
        for b in sft.successors(w[-1]):
            matrix[index[w]][index[w[1:] + (b,)]] = 1
    return validate_sft(matrix), words


# --------------------------------------------------------------------------
# Scheduled points


@dataclass(frozen=True)
class OrbitBlock:
    """``repetitions`` copies of the orbit word read from ``phase``; ``None`` repeats forever."""

    orbit: PeriodicOrbit
    repetitions: int | None
    phase: int = 0

    @property
    def length(self) -> int | None:
        return None if self.repetitions is None else self.repetitions * self.orbit.period

    def first(self) -> int:
        return self.orbit.word[self.phase % self.orbit.period]

    def last(self) -> int:
        return self.orbit.word[(self.phase - 1) % self.orbit.period]


@dataclass(frozen=True)
class ConnectorBlock:
    word: Word

    @property
    def length(self) -> int:
        return len(self.word)

    def first(self) -> int:
        return self.word[0]

    def last(self) -> int:
        return self.word[-1]


@lru_cache(maxsize=4096)
def cyclic_windows(word: Word, L: int) -> tuple:
    p = len(word)
    return tuple(tuple(word[(r + t) % p] for t in range(L)) for r in range(p))


def periodic_window_counts(word: Word, residue: int, count: int, L: int) -> Counter:
    """Counts of length-``L`` windows for ``count`` consecutive starts from ``residue``."""
    p = len(word)
    windows = cyclic_windows(word, L)
    q, rem = divmod(count, p)
    out: Counter = Counter()
    if q:
        for w in windows:
            out[w] += q
    for t in range(rem):
        out[windows[(residue + t) % p]] += 1
    return out


@dataclass(frozen=True)
class ScheduledPoint:
    """Bi-infinite sequence: a periodic left tail followed by a block plan.

    Blocks start at position ``origin``; position ``j < origin`` carries
    ``left_tail.word[(tail_phase + j - origin) % p]``.  The last block must be
    an :class:`OrbitBlock` and is continued periodically past its end so every
    coordinate is defined; ``extent`` marks where the materialized plan stops.
    """

    blocks: tuple
    left_tail: PeriodicOrbit
    tail_phase: int = 0
    origin: int = 0
    starts: tuple = field(init=False, repr=False, compare=False)
    extent: int | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        blocks = tuple(b for b in self.blocks if b.length != 0)
        object.__setattr__(self, "blocks", blocks)
        if not blocks or not isinstance(blocks[-1], OrbitBlock):
            raise ValueError("a scheduled point must end with an orbit block")
        starts = []
        pos = self.origin
        for i, b in enumerate(blocks):
            starts.append(pos)
            if b.length is None:
                if i != len(blocks) - 1:
                    raise ValueError("only the last block may repeat forever")
                pos = None
            else:
                pos += b.length
        object.__setattr__(self, "starts", tuple(starts))
        object.__setattr__(self, "extent", pos)

    @property
    def cumulative_lengths(self) -> tuple:
        return self.starts[1:] + ((self.extent,) if self.extent is not None else ())

    def check_admissible(self, sft: SFT) -> None:
        if not self.left_tail.admissible_in(sft):
            raise InadmissibleWord(f"left tail {self.left_tail} not admissible")
        prev = self.left_tail.word[(self.tail_phase - 1) % self.left_tail.period]
        for i, b in enumerate(self.blocks):
            if isinstance(b, OrbitBlock):
                ok = b.orbit.admissible_in(sft)
            else:
                ok = sft.is_admissible(b.word)
            if not ok or not sft.allowed(prev, b.first()):
                raise InadmissibleWord(f"block {i} breaks admissibility")
            prev = b.last()

    def _locate(self, j: int) -> int:
        return bisect.bisect_right(self.starts, j) - 1

    def coordinate(self, j: int) -> int:
        if j < self.origin:
            tail = self.left_tail.word
            return tail[(self.tail_phase + j - self.origin) % len(tail)]
        i = self._locate(j)
        block = self.blocks[i]
        local = j - self.starts[i]
        if isinstance(block, ConnectorBlock):
            return block.word[local]
        word = block.orbit.word
        return word[(block.phase + local) % len(word)]

    __getitem__ = coordinate

    def window(self, j: int, L: int) -> Word:
        return tuple(self.coordinate(j + t) for t in range(L))

    def expand(self, lo: int, hi: int) -> list[int]:
        return [self.coordinate(j) for j in range(lo, hi)]

    def segments(self):
        # (start or None for -inf, end or None for +inf, word, phase, pattern start)
        tail = self.left_tail
        yield None, self.origin, tail.word, self.tail_phase, self.origin, True
        for i, b in enumerate(self.blocks):
            s = self.starts[i]
            e = None if i == len(self.blocks) - 1 else self.starts[i + 1]
            if isinstance(b, OrbitBlock):
                yield s, e, b.orbit.word, b.phase, s, True
            else:
                yield s, e, b.word, 0, s, False

    def window_counts(self, lo: int, hi: int, L: int) -> Counter:
        """Exact counts of length-``L`` windows starting at ``j`` in ``[lo, hi)``.

        Periodic stretches are counted in closed form, so the cost depends on
        the number of blocks and their periods, not on ``hi - lo``.
        """
        counts: Counter = Counter()
        if hi <= lo:
            return counts
        for s, e, word, phase, pstart, periodic in self.segments():
            if e is not None and e <= lo:
                continue
            if s is not None and s >= hi:
                break
            first = lo if s is None else max(lo, s)
            stop = hi if e is None else min(hi, e)
            if periodic:
                inner = stop if e is None else min(stop, e - L + 1)
                if inner > first:
                    residue = (phase + first - pstart) % len(word)
                    counts.update(periodic_window_counts(word, residue, inner - first, L))
                explicit = range(max(first, inner), stop)
            else:
                explicit = range(first, stop)
            for j in explicit:
                counts[self.window(j, L)] += 1
        return counts

    def symbol_sum(self, weights, lo: int, hi: int) -> Fraction:
        """Sum of ``weights[x_j]`` for ``j`` in ``[lo, hi)`` in closed form."""
        counts = self.window_counts(lo, hi, 1)
        return sum((Fraction(weights[w[0]]) * c for w, c in counts.items()), Fraction(0))

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        blocks = []
        for b in self.blocks:
            if isinstance(b, OrbitBlock):
                blocks.append({
                    "orbit": str(b.orbit),
                    "repetitions": None if b.repetitions is None else str(b.repetitions),
                    "phase": b.phase,
                })
            else:
                blocks.append({"connector": word_str(b.word)})
        return {
            "left_tail": str(self.left_tail),
            "tail_phase": self.tail_phase,
            "origin": str(self.origin),
            "blocks": blocks,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScheduledPoint":
        blocks = []
        for b in data["blocks"]:
            if "connector" in b:
                blocks.append(ConnectorBlock(parse_word(b["connector"])))
            else:
                reps = b["repetitions"]
                blocks.append(OrbitBlock(
                    PeriodicOrbit(parse_word(b["orbit"])),
                    None if reps is None else int(reps),
                    int(b["phase"]),
                ))
        return cls(tuple(blocks), PeriodicOrbit(parse_word(data["left_tail"])),
                   int(data["tail_phase"]), int(data["origin"]))


def periodic_point(orbit: PeriodicOrbit, phase: int = 0) -> ScheduledPoint:
    """The bi-infinite periodic point with ``x_0 = orbit.word[phase]``."""
    return ScheduledPoint((OrbitBlock(orbit, None, phase),), orbit, phase, 0)


def coordinate(x: ScheduledPoint, j: int) -> int:
    return x.coordinate(j)


def shift_distance(x: ScheduledPoint, y: ScheduledPoint, j: int, W: int) -> Fraction:
    """``2**-k`` for the nearest disagreement ``|i| = k <= W`` around ``j``, else 0."""
    if W < 0:
        raise ValueError("window must be nonnegative")
    for k in range(W + 1):
        if x.coordinate(j + k) != y.coordinate(j + k) or x.coordinate(j - k) != y.coordinate(j - k):
            return Fraction(1, 2 ** k)
    return Fraction(0)


def with_symbol(x: ScheduledPoint, position: int, symbol: int) -> ScheduledPoint:
    """Copy of ``x`` with one coordinate replaced; used for negative controls.

    The result is not checked for admissibility.
    """
    if position < x.origin:
        raise ValueError("can only alter positions inside the block plan")
    i = x._locate(position)
    block = x.blocks[i]
    local = position - x.starts[i]
    if isinstance(block, ConnectorBlock):
        w = list(block.word)
        w[local] = symbol
        pieces = [ConnectorBlock(tuple(w))]
    else:
        p = block.orbit.period
        k, r = divmod(local, p)
        before = OrbitBlock(block.orbit, k, block.phase)
        word = [block.orbit.word[(block.phase + t) % p] for t in range(p)]
        word[r] = symbol
        middle = ConnectorBlock(tuple(word))
        after_reps = None if block.repetitions is None else block.repetitions - k - 1
        after = OrbitBlock(block.orbit, after_reps, block.phase)
        pieces = [before, middle, after]
        if after_reps == 0 and i == len(x.blocks) - 1:
            # keep an orbit block last; coordinates past the end are unchanged
            pieces[-1] = OrbitBlock(block.orbit, 1, block.phase)
    blocks = x.blocks[:i] + tuple(pieces) + x.blocks[i + 1:]
    return ScheduledPoint(blocks, x.left_tail, x.tail_phase, x.origin)
