"""Full chains of B_n: enumeration, sampling and chain partitions.

Partition averages are computed by counting chains (a chain through a
k-set is one of k!(n-k)!), with enumeration kept for cross-checks.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import comb, factorial
from typing import Iterator

from .family import SetFamily, elements_of, fmt_rational, popcount

MAX_ENUM_N = 8
MC_BLOCK = 1024


class ChainError(ValueError):
    pass


@dataclass(frozen=True)
class FullChain:
    """A permutation of 1..n; its prefixes are the members of the chain."""

    permutation: tuple[int, ...]

    def masks(self) -> list[int]:
        out = [0]
        m = 0
        for e in self.permutation:
            m |= 1 << (e - 1)
            out.append(m)
        return out


def enumerate_chains(n: int) -> Iterator[FullChain]:
    if n > MAX_ENUM_N:
        raise ChainError(f"exact chain enumeration capped at n={MAX_ENUM_N}, got {n}")
    for p in permutations(range(1, n + 1)):
        yield FullChain(p)


def meet_count(f: SetFamily, c: FullChain) -> int:
    if len(c.permutation) != f.n:
        raise ChainError("chain and family have different ground sizes")
    return sum(1 for m in c.masks() if m in f)


def lubell_via_chains(f: SetFamily) -> Fraction:
    total = 0
    count = 0
    for c in enumerate_chains(f.n):
        total += meet_count(f, c)
        count += 1
    return Fraction(total, count)


def _block_sums(f: SetFamily, seed: int, block: int, size: int) -> tuple[int, int]:
    rng = random.Random(f"{seed}:{block}")
    members = f._set
    perm = list(range(f.n))
    s = s2 = 0
    for _ in range(size):
        rng.shuffle(perm)
        m = 0
        hits = 1 if 0 in members else 0
        for i in perm:
            m |= 1 << i
            if m in members:
                hits += 1
        s += hits
        s2 += hits * hits
    return s, s2


def lubell_monte_carlo(f: SetFamily, samples: int, seed: int = 0, workers: int = 1) -> tuple[Fraction, Fraction]:
    """Mean meet count over uniformly random full chains, with its standard error.

    Samples are drawn in fixed blocks of ``MC_BLOCK``, each seeded from
    ``(seed, block index)``, so the result does not depend on ``workers``.
    """
    if samples < 1:
        raise ChainError("samples must be >= 1")
    blocks = [(b, min(MC_BLOCK, samples - b * MC_BLOCK)) for b in range(math.ceil(samples / MC_BLOCK))]
    if workers > 1 and len(blocks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_block_sums, [f] * len(blocks), [seed] * len(blocks),
                                [b for b, _ in blocks], [s for _, s in blocks]))
    else:
        parts = [_block_sums(f, seed, b, s) for b, s in blocks]
    s = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = Fraction(s, samples)
    if samples == 1:
        return mean, Fraction(0)
    var = (Fraction(s2) - samples * mean * mean) / (samples - 1)
    stderr = Fraction(math.sqrt(var / samples)).limit_denominator(10**12)
    return mean, stderr


# --- partitions -------------------------------------------------------------

@dataclass(frozen=True)
class ChainBlockReport:
    """One block of a chain partition.

    ``kind`` is ``deleted``, ``min``, ``minmax`` or ``empty``; ``key`` holds
    the element i, the mask A, or the pair (A, B) accordingly.
    """

    kind: str
    key: object
    chain_count: int
    average_meet: Fraction
    restricted_lubell: Fraction | None = None

    def key_text(self) -> str:
        def s(m):
            return "{" + ",".join(map(str, elements_of(m))) + "}"

        if self.kind == "deleted":
            return f"deleted:{self.key}"
        if self.kind == "min":
            return f"min:{s(self.key)}"
        if self.kind == "minmax":
            a, b = self.key
            return f"minmax:{s(a)}-{s(b)}"
        return "empty"

    def line(self) -> str:
        return f"block {self.key_text()} chains={self.chain_count} avg={fmt_rational(self.average_meet)}"


def emit_report(blocks: list[ChainBlockReport]) -> str:
    return "".join(b.line() + "\n" for b in blocks)


def weighted_average(blocks: list[ChainBlockReport]) -> Fraction:
    total = sum(b.chain_count for b in blocks)
    return sum((b.average_meet * b.chain_count for b in blocks), Fraction(0)) / total


def _check_exact(f: SetFamily, low: int = 1) -> None:
    if f.n < low:
        raise ChainError(f"need n >= {low}")
    if f.n > MAX_ENUM_N:
        raise ChainError(f"exact partitions capped at n={MAX_ENUM_N}")


def partition_by_deleted_element(f: SetFamily) -> list[ChainBlockReport]:
    """Blocks C_i of chains whose last added element is i.

    Every chain also passes through [n], so a block average is the Lubell
    value of F_i over [n] - {i} plus one when [n] is a member.
    """
    _check_exact(f, 2)
    n = f.n
    top = 1 if f.full in f else 0
    out = []
    for i in range(1, n + 1):
        bit = 1 << (i - 1)
        restricted = sum((Fraction(1, comb(n - 1, popcount(m))) for m in f.members if not m & bit), Fraction(0))
        out.append(ChainBlockReport("deleted", i, factorial(n - 1), restricted + top, restricted))
    return out


def _ways_below(f: SetFamily) -> list[int]:
    """ways[X] = chains from the empty set to X whose members strictly below X avoid f."""
    n = f.n
    ways = [0] * (1 << n)
    ways[0] = 1
    for x in sorted(range(1, 1 << n), key=popcount):
        w = 0
        y = x
        while y:
            low = y & -y
            prev = x ^ low
            if prev not in f:
                w += ways[prev]
            y ^= low
        ways[x] = w
    return ways


def _ways_above(f: SetFamily) -> list[int]:
    from .family import conjugate

    below = _ways_below(conjugate(f))
    full = f.full
    return [below[full ^ x] for x in range(1 << f.n)]


def min_partition(f: SetFamily) -> list[ChainBlockReport]:
    """Blocks keyed by the smallest member of f met by the chain, plus the empty block."""
    _check_exact(f)
    n = f.n
    ways = _ways_below(f)
    out = []
    for a in sorted(f.members, key=lambda m: (popcount(m), m)):
        rest = n - popcount(a)
        count = ways[a] * factorial(rest)
        avg = 1 + sum((Fraction(1, comb(rest, popcount(s ^ a))) for s in f.members if s != a and s & a == a), Fraction(0))
        out.append(ChainBlockReport("min", a, count, avg))
    empty = 0 if f.full in f else ways[f.full]
    out.append(ChainBlockReport("empty", None, empty, Fraction(0)))
    return out


def minmax_partition(f: SetFamily) -> list[ChainBlockReport]:
    """Blocks keyed by (smallest, largest) member of f met by the chain."""
    _check_exact(f)
    below = _ways_below(f)
    above = _ways_above(f)
    members = sorted(f.members, key=lambda m: (popcount(m), m))
    out = []
    for a in members:
        for b in members:
            if a & b != a:
                continue
            gap = popcount(b ^ a)
            count = below[a] * factorial(gap) * above[b]
            if a == b:
                avg = Fraction(1)
            else:
                avg = 2 + sum((Fraction(1, comb(gap, popcount(s ^ a)))
                               for s in f.members if s != a and s != b and s & a == a and s & b == s), Fraction(0))
            out.append(ChainBlockReport("minmax", (a, b), count, avg))
    empty = 0 if f.full in f else below[f.full]
    out.append(ChainBlockReport("empty", None, empty, Fraction(0)))
    return out


# --- enumeration oracles ------------------------------------------------------

def classify_chains(f: SetFamily, kind: str) -> dict[object, tuple[int, int]]:
    """Block key -> (chain count, total meets) by enumerating every chain."""
    out: dict[object, list[int]] = {}
    for c in enumerate_chains(f.n):
        hits = [m for m in c.masks() if m in f]
        if kind == "deleted":
            key = c.permutation[-1]
        elif not hits:
            key = None
        elif kind == "min":
            key = hits[0]
        elif kind == "minmax":
            key = (hits[0], hits[-1])
        else:
            raise ChainError(f"unknown partition kind {kind!r}")
        acc = out.setdefault(key, [0, 0])
        acc[0] += 1
        acc[1] += len(hits)
    return {k: (v[0], v[1]) for k, v in out.items()}


def max_block_average(blocks: list[ChainBlockReport]) -> Fraction:
    return max(b.average_meet for b in blocks if b.chain_count)

