"""Finite poset patterns and weak-subposet containment.

Pattern elements are labelled ``0..p-1``.  Relations are stored as a
transitively closed set of strict pairs ``(u, v)`` meaning ``u < v``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Sequence


class PosetError(ValueError):
    pass


def transitive_closure(pairs: Iterable[tuple[int, int]], element_count: int) -> frozenset[tuple[int, int]]:
    """Smallest transitively closed superset of ``pairs``.

    Raises PosetError on a reflexive pair or a cycle.
    """
    up = [0] * element_count
    for u, v in pairs:
        if not (0 <= u < element_count and 0 <= v < element_count):
            raise PosetError(f"pair ({u}, {v}) out of range for {element_count} elements")
        if u == v:
            raise PosetError(f"cycle: reflexive pair ({u}, {u})")
        up[u] |= 1 << v
    # Warshall on bitsets
    for k in range(element_count):
        bit = 1 << k
        for i in range(element_count):
            if up[i] & bit:
                up[i] |= up[k]
    out = set()
    for u in range(element_count):
        if up[u] >> u & 1:
            raise PosetError(f"cycle through element {u}")
        for v in range(element_count):
            if up[u] >> v & 1:
                out.add((u, v))
    return frozenset(out)


@dataclass(frozen=True)
class PosetPattern:
    element_count: int
    strict_less: frozenset[tuple[int, int]]
    name: str | None = None

    @classmethod
    def from_pairs(cls, element_count: int, pairs: Iterable[tuple[int, int]], name: str | None = None) -> PosetPattern:
        return cls(element_count, transitive_closure(pairs, element_count), name)

    def __post_init__(self):
        if self.element_count < 0:
            raise PosetError("negative element count")
        closed = transitive_closure(self.strict_less, self.element_count)
        if closed != frozenset(self.strict_less):
            raise PosetError("relation is not transitively closed")

    def less(self, u: int, v: int) -> bool:
        return (u, v) in self.strict_less

    def up_masks(self) -> list[int]:
        up = [0] * self.element_count
        for u, v in self.strict_less:
            up[u] |= 1 << v
        return up

    def down_masks(self) -> list[int]:
        down = [0] * self.element_count
        for u, v in self.strict_less:
            down[v] |= 1 << u
        return down

    def topological_order(self) -> list[int]:
        down = self.down_masks()
        # number of predecessors is a valid linear extension key
        return sorted(range(self.element_count), key=lambda x: (bin(down[x]).count("1"), x))

    def __str__(self) -> str:
        return self.name or f"poset[{self.element_count}]"


class HostPoset:
    """A finite poset given by precomputed strict up/down bitsets."""

    def __init__(self, element_count: int, below: Sequence[int]):
        self.element_count = element_count
        self.below = list(below)
        self.above = [0] * element_count
        for y in range(element_count):
            b = self.below[y]
            while b:
                low = b & -b
                self.above[low.bit_length() - 1] |= 1 << y
                b ^= low
        self._down_size = [bin(b).count("1") for b in self.below]
        self._up_size = [bin(a).count("1") for a in self.above]

    @classmethod
    def from_pattern(cls, p: PosetPattern) -> HostPoset:
        return cls(p.element_count, p.down_masks())

    @classmethod
    def from_masks(cls, masks: Sequence[int]) -> HostPoset:
        """Inclusion order on a list of distinct subset bitmasks."""
        below = []
        for y in masks:
            b = 0
            for i, x in enumerate(masks):
                if x != y and x & y == x:
                    b |= 1 << i
            below.append(b)
        return cls(len(masks), below)

    def less(self, x: int, y: int) -> bool:
        return bool(self.below[y] >> x & 1)

    def height(self) -> int:
        if not self.element_count:
            return 0
        # longest chain ending at each element, processed by down-set size
        order = sorted(range(self.element_count), key=lambda x: self._down_size[x])
        best = [1] * self.element_count
        for y in order:
            b = self.below[y]
            while b:
                low = b & -b
                x = low.bit_length() - 1
                if best[x] + 1 > best[y]:
                    best[y] = best[x] + 1
                b ^= low
        return max(best)


@dataclass(frozen=True)
class EmbeddingWitness:
    mapping: tuple[int, ...]

    def check(self, pattern: PosetPattern, host: HostPoset) -> bool:
        if len(set(self.mapping)) != len(self.mapping):
            return False
        return all(host.less(self.mapping[u], self.mapping[v]) for u, v in pattern.strict_less)


def _popcount(x: int) -> int:
    return bin(x).count("1")


def iter_embeddings(pattern: PosetPattern, host: HostPoset, forced: dict[int, int] | None = None) -> Iterator[tuple[int, ...]]:
    """All order-preserving injections, as tuples indexed by pattern element.

    ``forced`` pins some pattern elements to host elements.
    """
    p = pattern.element_count
    if p == 0:
        yield ()
        return
    if p > host.element_count:
        return
    order = pattern.topological_order()
    pdown = pattern.down_masks()
    pup = pattern.up_masks()
    need_down = [_popcount(b) for b in pdown]
    need_up = [_popcount(b) for b in pup]
    # candidate filter: a host image needs at least as many elements below/above
    cand = []
    for u in range(p):
        c = 0
        for x in range(host.element_count):
            if host._down_size[x] >= need_down[u] and host._up_size[x] >= need_up[u]:
                c |= 1 << x
        cand.append(c)
    if forced:
        for u, x in forced.items():
            cand[u] &= 1 << x
    mapping = [-1] * p

    def rec(i: int, used: int) -> Iterator[tuple[int, ...]]:
        if i == p:
            yield tuple(mapping)
            return
        u = order[i]
        c = cand[u] & ~used
        # images of already-placed predecessors/successors constrain u
        for j in range(i):
            w = order[j]
            if pdown[u] >> w & 1:
                c &= host.above[mapping[w]]
            elif pup[u] >> w & 1:
                c &= host.below[mapping[w]]
        while c:
            low = c & -c
            x = low.bit_length() - 1
            mapping[u] = x
            yield from rec(i + 1, used | low)
            c ^= low
        mapping[u] = -1

    yield from rec(0, 0)


def embeds(pattern: PosetPattern, host: HostPoset) -> EmbeddingWitness | None:
    for m in iter_embeddings(pattern, host):
        w = EmbeddingWitness(m)
        assert w.check(pattern, host)
        return w
    return None


def height(p: PosetPattern) -> int:
    return HostPoset.from_pattern(p).height()


# --- named patterns -------------------------------------------------------

def chain(k: int) -> PosetPattern:
    if k < 1:
        raise PosetError("chain needs k >= 1")
    return PosetPattern.from_pairs(k, [(i, i + 1) for i in range(k - 1)], f"chain:{k}")


def diamond(k: int) -> PosetPattern:
    """D_k with labels 0=A, 1..k=B_i, k+1=C."""
    if k < 2:
        raise PosetError("diamond needs k >= 2")
    top = k + 1
    pairs = [(0, i) for i in range(1, top)] + [(i, top) for i in range(1, top)]
    return PosetPattern.from_pairs(k + 2, pairs, f"diamond:{k}")


def fork(r: int) -> PosetPattern:
    if r < 2:
        raise PosetError("fork needs r >= 2")
    return PosetPattern.from_pairs(r + 1, [(0, i) for i in range(1, r + 1)], f"fork:{r}")


def butterfly() -> PosetPattern:
    # 0=A, 1=B below 2=C, 3=D
    return PosetPattern.from_pairs(4, [(0, 2), (0, 3), (1, 2), (1, 3)], "butterfly")


def n_poset() -> PosetPattern:
    # A<B, C<B, C<D with 0=A 1=B 2=C 3=D
    return PosetPattern.from_pairs(4, [(0, 1), (2, 1), (2, 3)], "nposet")


def j_poset() -> PosetPattern:
    # B<A and B<C<D with 0=A 1=B 2=C 3=D
    return PosetPattern.from_pairs(4, [(1, 0), (1, 2), (2, 3)], "jposet")


def harp(lengths: Sequence[int]) -> PosetPattern:
    """Paths of the given lengths sharing their bottom (0) and top (last label)."""
    if not lengths or any(l < 3 for l in lengths):
        raise PosetError("harp path lengths must each be >= 3")
    top = 1 + sum(l - 2 for l in lengths)
    pairs = []
    nxt = 1
    for l in lengths:
        prev = 0
        for _ in range(l - 2):
            pairs.append((prev, nxt))
            prev = nxt
            nxt += 1
        pairs.append((prev, top))
    return PosetPattern.from_pairs(top + 1, pairs, "harp:" + ",".join(map(str, lengths)))


def antichain(k: int) -> PosetPattern:
    return PosetPattern(k, frozenset(), f"antichain:{k}")


def make_named_pattern(kind: str, *args) -> PosetPattern:
    kind = kind.lower()
    if kind == "chain":
        return chain(*args)
    if kind == "diamond":
        return diamond(*args)
    if kind == "fork":
        return fork(*args)
    if kind == "butterfly":
        return butterfly()
    if kind in ("nposet", "n_poset"):
        return n_poset()
    if kind in ("jposet", "j_poset"):
        return j_poset()
    if kind == "harp":
        lengths = args[0] if len(args) == 1 and not isinstance(args[0], int) else args
        return harp(list(lengths))
    if kind == "antichain":
        return antichain(*args)
    raise PosetError(f"unknown pattern kind {kind!r}")


def parse_pattern_spec(spec: str) -> PosetPattern:
    """``chain:4``, ``diamond:2``, ``harp:4,3``, ``butterfly``, ... or a DSL file path."""
    spec = spec.strip()
    kind, _, arg = spec.partition(":")
    known = {"chain", "diamond", "fork", "butterfly", "nposet", "jposet", "harp", "antichain"}
    if kind.lower() not in known:
        path = Path(spec)
        if path.exists():
            return load_pattern(path)
        raise PosetError(f"bad pattern spec {spec!r}")
    try:
        nums = [int(a) for a in arg.split(",")] if arg else []
    except ValueError:
        raise PosetError(f"bad pattern spec {spec!r}") from None
    if kind.lower() == "harp":
        return harp(nums)
    return make_named_pattern(kind, *nums)


# --- DSL ------------------------------------------------------------------

def loads_pattern(text: str) -> PosetPattern:
    lines = [(i, ln.split("#")[0].strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise PosetError("empty pattern file")
    lineno, head = lines[0]
    parts = head.split()
    if len(parts) != 3 or parts[0] != "poset":
        raise PosetError(f"line {lineno}: expected 'poset <name> <element_count>'")
    name = parts[1]
    try:
        count = int(parts[2])
    except ValueError:
        raise PosetError(f"line {lineno}: bad element count") from None
    pairs = []
    for lineno, ln in lines[1:]:
        u, sep, v = ln.partition("<")
        try:
            pairs.append((int(u), int(v)))
        except ValueError:
            raise PosetError(f"line {lineno}: expected '<u> < <v>'") from None
        if not sep:
            raise PosetError(f"line {lineno}: expected '<u> < <v>'")
    try:
        return PosetPattern.from_pairs(count, pairs, name)
    except PosetError as e:
        raise PosetError(f"{e} (pattern {name})") from None


def dumps_pattern(p: PosetPattern) -> str:
    out = [f"poset {p.name or 'pattern'} {p.element_count}"]
    out += [f"{u} < {v}" for u, v in sorted(p.strict_less)]
    return "\n".join(out) + "\n"


def load_pattern(path) -> PosetPattern:
    return loads_pattern(Path(path).read_text())


# --- middle-level check ---------------------------------------------------

def _middle_level_sizes(n: int, m: int) -> list[range]:
    # m middle sizes; two variants when n+m is even
    m = min(m, n + 1)
    lo_a = (n - m + 1) // 2
    lo_b = -((-(n - m + 1)) // 2)
    variants = {lo_a, lo_b}
    return [range(lo, lo + m) for lo in sorted(variants)]


def e_lower(pattern: PosetPattern, n_max: int) -> int:
    """Largest m such that B(n, m) is pattern-free for every n <= n_max.

    A finite surrogate for e(P); for m > n + 1 the m middle levels of B_n
    are all of 2^[n].
    """
    if n_max > 10:
        raise PosetError("n_max must be <= 10")
    best = 0
    m = 1
    while m <= n_max + 1:
        ok = True
        for n in range(0, n_max + 1):
            for sizes in _middle_level_sizes(n, m):
                masks = [x for x in range(1 << n) if bin(x).count("1") in sizes]
                if embeds(pattern, HostPoset.from_masks(masks)) is not None:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            break
        best = m
        m += 1
    return best


def brute_force_embeds(pattern: PosetPattern, host: HostPoset) -> bool:
    """Check every injection; only for tiny inputs."""
    from itertools import permutations

    p = pattern.element_count
    for image in combinations(range(host.element_count), p):
        for m in permutations(image):
            if all(host.less(m[u], m[v]) for u, v in pattern.strict_less):
                return True
    return False
