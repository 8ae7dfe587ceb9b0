"""Set families over [n] as sorted bitmask tuples, with exact Lubell values.

Element ``i`` of [n] (1-based, as printed) is bit ``i - 1`` of a mask.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb, floor
from pathlib import Path
from typing import Iterable

from .poset import HostPoset, PosetPattern, embeds

MAX_GROUND = 30


class FamilyError(ValueError):
    pass


def popcount(x: int) -> int:
    return bin(x).count("1")


def mask_of(elements: Iterable[int]) -> int:
    m = 0
    for e in elements:
        m |= 1 << (e - 1)
    return m


def elements_of(mask: int) -> list[int]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


@dataclass(frozen=True)
class SetFamily:
    n: int
    members: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.n <= MAX_GROUND:
            raise FamilyError(f"ground size {self.n} outside [0, {MAX_GROUND}]")
        full = (1 << self.n) - 1
        prev = -1
        for m in self.members:
            if m <= prev:
                raise FamilyError("members must be distinct and sorted")
            if m & ~full:
                raise FamilyError(f"mask {m} is not a subset of [{self.n}]")
            prev = m

    @classmethod
    def of(cls, n: int, masks: Iterable[int]) -> SetFamily:
        return cls(n, tuple(sorted(set(masks))))

    @classmethod
    def from_sets(cls, n: int, sets: Iterable[Iterable[int]]) -> SetFamily:
        return cls.of(n, (mask_of(s) for s in sets))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, mask: int) -> bool:
        return mask in self._set

    @property
    def _set(self) -> frozenset[int]:
        s = self.__dict__.get("_cached_set")
        if s is None:
            s = frozenset(self.members)
            object.__setattr__(self, "_cached_set", s)
        return s

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def union(self, other: SetFamily) -> SetFamily:
        if other.n != self.n:
            raise FamilyError("ground sizes differ")
        return SetFamily.of(self.n, self.members + other.members)

    def add(self, mask: int) -> SetFamily:
        return SetFamily.of(self.n, self.members + (mask,))

    def relabel(self, perm) -> SetFamily:
        """Apply a permutation of 0-based bit positions (``perm[i]`` is the image of bit i)."""
        return SetFamily.of(self.n, (permute_mask(m, perm) for m in self.members))

    def as_sets(self) -> list[list[int]]:
        return [elements_of(m) for m in self.members]

    def host(self) -> HostPoset:
        return HostPoset.from_masks(self.members)

    def __repr__(self) -> str:
        body = ", ".join("{" + ",".join(map(str, elements_of(m))) + "}" for m in self.members)
        return f"SetFamily(n={self.n}, [{body}])"


def permute_mask(mask: int, perm) -> int:
    out = 0
    i = 0
    while mask:
        if mask & 1:
            out |= 1 << perm[i]
        mask >>= 1
        i += 1
    return out


def fmt_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# --- Lubell function and sizes --------------------------------------------

def lubell(f: SetFamily) -> Fraction:
    counts = [0] * (f.n + 1)
    for m in f.members:
        counts[popcount(m)] += 1
    return sum((Fraction(c, comb(f.n, k)) for k, c in enumerate(counts) if c), Fraction(0))


def family_height(f: SetFamily) -> int:
    if not f.members:
        return 0
    # members sorted by size form a linear extension of inclusion
    order = sorted(f.members, key=popcount)
    best: dict[int, int] = {}
    for y in order:
        h = 1
        for x, hx in best.items():
            if hx + 1 > h and x & y == x:
                h = hx + 1
        best[y] = h
    return max(best.values())


@lru_cache(maxsize=None)
def sigma(n: int, k: int) -> int:
    """Sum of the k middle binomial coefficients of n."""
    if not 0 <= k <= n + 1:
        raise FamilyError(f"sigma needs 0 <= k <= n+1, got n={n}, k={k}")
    return sum(comb(n, i) for i in middle_sizes(n, k))


def middle_sizes(n: int, k: int, variant: str = "low") -> range:
    if variant not in ("low", "high"):
        raise FamilyError(f"unknown variant {variant!r}")
    if variant == "low":
        lo = (n - k + 1) // 2
    else:
        lo = -((-(n - k + 1)) // 2)
    return range(lo, lo + k)


def middle_levels(n: int, k: int, variant: str = "low") -> SetFamily:
    if not 1 <= k <= n + 1:
        raise FamilyError(f"middle_levels needs 1 <= k <= n+1, got n={n}, k={k}")
    sizes = middle_sizes(n, k, variant)
    return SetFamily(n, tuple(m for m in range(1 << n) if popcount(m) in sizes))


def conjugate(f: SetFamily) -> SetFamily:
    return SetFamily.of(f.n, (f.full ^ m for m in f.members))


def k_subsets(elems: Iterable[int], k: int) -> list[int]:
    return [mask_of(c) for c in combinations(sorted(elems), k)]


def join(*families: list[int]) -> list[int]:
    """Pairwise unions across families (the ``F1 v F2 v ...`` operation)."""
    out = [0]
    for fam in families:
        out = [a | b for a in out for b in fam]
    return out


def _check_parts(s_set, t_set) -> tuple[set[int], set[int], int]:
    s, t = set(s_set), set(t_set)
    if not s or not t:
        raise FamilyError("S and T must both be nonempty")
    if s & t:
        raise FamilyError(f"S and T overlap in {sorted(s & t)}")
    n = len(s) + len(t)
    if s | t != set(range(1, n + 1)):
        raise FamilyError("S and T must partition [n]")
    return s, t, n


def construct_c1(s_set, t_set) -> SetFamily:
    s, t, n = _check_parts(s_set, t_set)
    s1 = k_subsets(s, 1)
    masks = [0] + s1 + join(s1, k_subsets(t, 1)) + k_subsets(t, 2)
    return SetFamily.of(n, masks)


def construct_c2(s_set, t_set) -> SetFamily:
    s, t, n = _check_parts(s_set, t_set)
    s1, s2, t1, t2 = k_subsets(s, 1), k_subsets(s, 2), k_subsets(t, 1), k_subsets(t, 2)
    masks = [0] + s2 + t2 + join(s2, t1) + join(s1, t2)
    return SetFamily.of(n, masks)


def construct_c3(s_set, t_set) -> SetFamily:
    s, t, n = _check_parts(s_set, t_set)
    s1, s2, t1, t2 = k_subsets(s, 1), k_subsets(s, 2), k_subsets(t, 1), k_subsets(t, 2)
    masks = k_subsets(range(1, n + 1), 1) + s2 + t2 + join(s2, t1) + join(s1, t2)
    return SetFamily.of(n, masks)


CONSTRUCTIONS = {1: construct_c1, 2: construct_c2, 3: construct_c3}


def construction(i: int, s: int, n: int) -> SetFamily:
    """C_i([s], [n] \\ [s])."""
    if not 0 < s < n:
        raise FamilyError(f"need 0 < s < n, got s={s}, n={n}")
    return CONSTRUCTIONS[i](range(1, s + 1), range(s + 1, n + 1))


def construction_lubell(s: int, n: int) -> Fraction:
    return 2 + Fraction(s * (n - s), n * (n - 1))


def delta_lower(n: int) -> Fraction:
    """Lubell value of the balanced constructions, 2 + ceil(n/2)floor(n/2)/(n(n-1))."""
    return 2 + Fraction((n // 2) * ((n + 1) // 2), n * (n - 1))


# --- freeness ---------------------------------------------------------------

def is_pattern_free(f: SetFamily, p: PosetPattern) -> bool:
    return embeds(p, f.host()) is None


def interval_count(f: SetFamily, x: int, z: int) -> int:
    if x & z != x or x == z:
        raise FamilyError("interval_count needs x strictly inside z")
    return sum(1 for y in f.members if y != x and y != z and x & y == x and y & z == y)


def diamond_free_fast(f: SetFamily, k: int) -> bool:
    """True iff no interval [X, Z] with X, Z in f holds k members strictly inside."""
    if k < 2:
        raise FamilyError("diamond needs k >= 2")
    members = f.members
    for x in members:
        ups = [y for y in members if y != x and x & y == x]
        if len(ups) < k + 1:
            continue
        for z in ups:
            inside = 0
            for y in ups:
                if y != z and y & z == y:
                    inside += 1
            if inside >= k:
                return False
    return True


# --- bounds -----------------------------------------------------------------

def lubell_size_bound(n: int, m) -> tuple[int, int | None]:
    """(floor(m * C(n, n//2)), Sigma(n, m) when m is an integer else None)."""
    m = Fraction(m)
    if m <= 0:
        raise FamilyError("m must be positive")
    coarse = floor(m * comb(n, n // 2))
    refined = None
    if m.denominator == 1:
        refined = sigma(n, min(int(m), n + 1))
    return coarse, refined


@dataclass(frozen=True)
class BoundsReport:
    k: int
    m: int
    case_tag: str
    lower: Fraction
    upper: Fraction


def dk_bounds(k: int) -> BoundsReport:
    if k < 2:
        raise FamilyError("k must be >= 2")
    m = (k + 1).bit_length()  # ceil(log2(k + 2))
    mid = comb(m, m // 2)
    if 2 ** (m - 1) - 1 <= k <= 2**m - mid - 1:
        return BoundsReport(k, m, "case1", Fraction(m), Fraction(m))
    upper = m + 1 - Fraction(2**m - k - 1, mid)
    return BoundsReport(k, m, "case2", Fraction(m), upper)


def claim1_holds(n: int) -> bool:
    """The balanced construction value minus 1/C(n,3) stays below 25/11."""
    return delta_lower(n) - Fraction(1, comb(n, 3)) < Fraction(25, 11)


# --- file format ------------------------------------------------------------

def dumps_family(f: SetFamily) -> str:
    lines = [f"family {f.n}"]
    for m in f.members:
        lines.append(",".join(map(str, elements_of(m))) if m else "{}")
    return "\n".join(lines) + "\n"


def loads_family(text: str) -> SetFamily:
    raw = text.splitlines()
    lines = [(i, ln.strip()) for i, ln in enumerate(raw, 1) if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise FamilyError("line 1: missing 'family <n>' header")
    lineno, head = lines[0]
    parts = head.split()
    if len(parts) != 2 or parts[0] != "family" or not parts[1].isdigit():
        raise FamilyError(f"line {lineno}: expected 'family <n>', got {head!r}")
    n = int(parts[1])
    if n > MAX_GROUND:
        raise FamilyError(f"line {lineno}: ground size {n} exceeds {MAX_GROUND}")
    masks = []
    for lineno, ln in lines[1:]:
        if ln in ("{}", "∅"):
            masks.append(0)
            continue
        try:
            elems = [int(tok) for tok in ln.strip("{}").split(",")]
        except ValueError:
            raise FamilyError(f"line {lineno}: cannot parse subset {ln!r}") from None
        if any(not 1 <= e <= n for e in elems) or len(set(elems)) != len(elems):
            raise FamilyError(f"line {lineno}: subset {ln!r} is not a set of elements of [{n}]")
        masks.append(mask_of(elems))
    if len(set(masks)) != len(masks):
        raise FamilyError("duplicate subsets in family file")
    return SetFamily.of(n, masks)


def load_family(path) -> SetFamily:
    return loads_family(Path(path).read_text())


def save_family(f: SetFamily, path) -> None:
    Path(path).write_text(dumps_family(f))
