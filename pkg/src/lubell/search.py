"""Exact branch-and-bound over P-free families of subsets of [n].

A family contains P exactly when it contains the image of some
order-preserving injection of P into B_n, so the search works on the
hypergraph of those images: a family is P-free iff it contains no image.
Subsets are branched on in a fixed order (closest to the middle rank
first, then by mask), and bit ``i`` of every internal bitset is the i-th
subset in that order.

Bounds are all scaled to integers: cardinality counts sets, the Lubell
objective counts in units of 1/L with L = lcm of the binomials C(n, k).
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import comb, lcm

from .family import SetFamily, fmt_rational, dumps_family, is_pattern_free, middle_levels, permute_mask
from .poset import HostPoset, PosetPattern, iter_embeddings

MAX_SEARCH_N = 6
MAX_CANON_N = 8
THREADS_ENV = "LUBELL_THREADS"


class SearchError(ValueError):
    pass


class _Stop(Exception):
    pass


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SearchConfig:
    prune_lubell: bool = True
    prune_height: bool = True
    use_symmetry: bool = True
    exclude_full_set: bool = False
    thread_budget: int = field(default_factory=default_threads)
    node_limit: int | None = None
    time_limit: float | None = None

    def __post_init__(self):
        if self.thread_budget < 1:
            raise SearchError("thread_budget must be >= 1")
        if self.node_limit is not None and self.node_limit <= 0:
            raise SearchError("node_limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise SearchError("time_limit must be positive")


@dataclass
class SearchOutcome:
    objective: str
    optimum: Fraction | None
    witnesses: list[SetFamily]
    nodes_explored: int
    completed: bool
    n: int = 0
    pattern: str = ""

    def serialize(self) -> str:
        opt = "none" if self.optimum is None else fmt_rational(self.optimum)
        head = (f"search {self.objective} n={self.n} pattern={self.pattern} optimum={opt} "
                f"completed={str(self.completed).lower()} nodes={self.nodes_explored}")
        return head + "\n" + "".join(dumps_family(w) for w in self.witnesses)


def parse_outcome(text: str) -> SearchOutcome:
    from .family import loads_family

    lines = text.splitlines()
    head = dict(tok.split("=", 1) for tok in lines[0].split()[2:])
    objective = lines[0].split()[1]
    blocks, cur = [], []
    for ln in lines[1:]:
        if ln.startswith("family") and cur:
            blocks.append(cur)
            cur = []
        if ln.strip():
            cur.append(ln)
    if cur:
        blocks.append(cur)
    opt = None if head["optimum"] == "none" else Fraction(head["optimum"])
    return SearchOutcome(objective, opt, [loads_family("\n".join(b)) for b in blocks],
                         int(head["nodes"]), head["completed"] == "true", int(head["n"]), head["pattern"])


# --- canonical forms --------------------------------------------------------

@dataclass(frozen=True, order=True)
class CanonicalForm:
    n: int
    masks: tuple[int, ...]

    def family(self) -> SetFamily:
        return SetFamily(self.n, self.masks)


@lru_cache(maxsize=None)
def _mask_tables(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(permute_mask(m, p) for m in range(1 << n)) for p in permutations(range(n)))


def canonical_form(f: SetFamily) -> CanonicalForm:
    """Lexicographically least sorted mask sequence over all relabelings of [n]."""
    if f.n > MAX_CANON_N:
        raise SearchError(f"canonical form capped at n={MAX_CANON_N}")
    if f.n <= 6:
        best = min(tuple(sorted(t[m] for m in f.members)) for t in _mask_tables(f.n))
    else:
        best = min(tuple(sorted(permute_mask(m, p) for m in f.members)) for p in permutations(range(f.n)))
    return CanonicalForm(f.n, best)


# --- the search space -----------------------------------------------------------

class _Space:
    """Branch order, forbidden images and symmetry tables for one (n, P)."""

    def __init__(self, n: int, pattern: PosetPattern):
        self.n = n
        self.pattern = pattern
        size = 1 << n
        self.size = size
        self.order = sorted(range(size), key=lambda m: (abs(2 * m.bit_count() - n), m))
        self.pos = [0] * size
        for i, m in enumerate(self.order):
            self.pos[m] = i
        host = HostPoset(size, [sum(1 << x for x in range(size) if x != y and x & y == x) for y in range(size)])
        images = set()
        for emb in iter_embeddings(pattern, host):
            e = 0
            for x in emb:
                e |= 1 << self.pos[x]
            images.add(e)
        self.images = images
        self.edges_of: list[list[int]] = [[] for _ in range(size)]
        for e in sorted(images):
            x = e
            while x:
                low = x & -x
                self.edges_of[low.bit_length() - 1].append(e)
                x ^= low
        self.L = lcm(*(comb(n, k) for k in range(n + 1)))
        self.weight_lubell = [self.L // comb(n, m.bit_count()) for m in self.order]
        self.level_mask = [0] * (n + 1)
        for i, m in enumerate(self.order):
            self.level_mask[m.bit_count()] |= 1 << i
        self.level_weight = [self.L // comb(n, k) for k in range(n + 1)]
        self.levels_cheap_first = sorted(range(n + 1), key=lambda k: self.level_weight[k])
        # every full chain as a bitset of positions
        self.chains = []
        for p in permutations(range(n)):
            m = 0
            c = 1 << self.pos[0]
            for i in p:
                m |= 1 << i
                c |= 1 << self.pos[m]
            self.chains.append(c)
        self.chain_count = len(self.chains)
        # distance classes are unions of levels, hence invariant under relabeling
        dist = [abs(2 * m.bit_count() - n) for m in self.order]
        self.boundaries = [i for i in range(1, size) if dist[i] != dist[i - 1]] + [size]
        self.standard = {k: (1 << k) - 1 for k in range(n + 1)}
        self.perm_pos = []
        for p in permutations(range(n)):
            if list(p) == list(range(n)):
                continue
            self.perm_pos.append([self.pos[permute_mask(m, p)] for m in self.order])

    def to_family(self, bits: int) -> SetFamily:
        masks = []
        x = bits
        while x:
            low = x & -x
            masks.append(self.order[low.bit_length() - 1])
            x ^= low
        return SetFamily.of(self.n, masks)

    def kill_after_include(self, t: int, fam: int, rest: int) -> int:
        """Drop from ``rest`` every set that would complete an image with ``fam``."""
        for e in self.edges_of[t]:
            r = e & ~fam
            if r & (r - 1) == 0:
                rest &= ~r
        return rest

    def addable(self, fam: int, t: int) -> bool:
        for e in self.edges_of[t]:
            if (e & ~fam) == (1 << t):
                return False
        return True


@lru_cache(maxsize=32)
def _space(n: int, pattern: PosetPattern) -> _Space:
    return _Space(n, pattern)


def _pattern_cap(pattern: PosetPattern) -> int:
    # P sits inside the chain on |P| elements, so a P-free family has height < |P|
    return max(pattern.element_count - 1, 0)


@dataclass
class _Node:
    fam: int
    rest: int
    value: int
    lub: int
    checked: int


class _Searcher:
    def __init__(self, space: _Space, objective: str, config: SearchConfig, *, ties: bool,
                 target: int | None = None, deadline: float | None = None):
        self.s = space
        self.objective = objective
        self.cfg = config
        self.ties = ties
        self.target = target
        n = space.n
        self.weights = space.weight_lubell if objective == "lubell" else [1] * space.size
        self.height_cap = _pattern_cap(space.pattern) if config.prune_height else n + 1
        self.best = -1
        self.found: list[int] = []
        self.nodes = 0
        self.deadline = deadline

    # bounds --------------------------------------------------------------
    def _lubell_ceiling(self, fam: int, rest: int) -> int:
        """Upper bound on the final Lubell value, in 1/L units."""
        s = self.s
        if self.cfg.prune_lubell:
            cap = self.height_cap
            total = 0
            both = fam | rest
            for c in s.chains:
                k = (both & c).bit_count()
                total += k if k < cap else cap
            return total * s.L // s.chain_count
        return sum(s.level_weight[k] * (rest & s.level_mask[k]).bit_count() for k in range(s.n + 1)) + \
            sum(s.level_weight[k] * (fam & s.level_mask[k]).bit_count() for k in range(s.n + 1))

    def bound(self, node: _Node) -> int:
        s = self.s
        if self.objective == "lubell":
            if self.cfg.prune_lubell or self.cfg.prune_height:
                return min(self._lubell_ceiling(node.fam, node.rest), self.height_cap * s.L)
            return node.value + sum(self.weights[i] for i in _bits(node.rest))
        free = node.rest.bit_count()
        if not (self.cfg.prune_lubell or self.cfg.prune_height):
            return node.value + free
        ceiling = self.height_cap * s.L
        if self.cfg.prune_lubell:
            ceiling = min(ceiling, self._lubell_ceiling(node.fam, node.rest))
        budget = ceiling - node.lub
        count = 0
        for k in s.levels_cheap_first:
            c = (node.rest & s.level_mask[k]).bit_count()
            if not c:
                continue
            w = s.level_weight[k]
            take = budget // w
            if take >= c:
                count += c
                budget -= c * w
            else:
                count += take
                break
        return node.value + min(count, free)

    # symmetry ------------------------------------------------------------
    def _not_leader(self, fam: int, prefix: int) -> bool:
        """True if some relabeling makes fam lexicographically larger on the first ``prefix`` positions."""
        head = fam & ((1 << prefix) - 1)
        members = list(_bits(head))
        for pp in self.s.perm_pos:
            img = 0
            for i in members:
                img |= 1 << pp[i]
            diff = img ^ head
            if diff and img & (diff & -diff):
                return True
        return False

    # search --------------------------------------------------------------
    def _tick(self):
        self.nodes += 1
        if self.cfg.node_limit is not None and self.nodes > self.cfg.node_limit:
            raise _Stop
        if self.deadline is not None and self.nodes & 255 == 0 and time.monotonic() > self.deadline:
            raise _Stop

    def _record(self, node: _Node):
        if node.value > self.best:
            self.best = node.value
            self.found = [node.fam]
        elif node.value == self.best and self.ties:
            self.found.append(node.fam)
        if self.target is not None and node.value >= self.target:
            raise _Found(node.fam)

    def _pruned(self, node: _Node) -> bool:
        b = self.bound(node)
        if self.target is not None:
            return b < self.target
        return b < self.best or (b == self.best and not self.ties)

    def children(self, node: _Node) -> list[_Node]:
        """Include child first, then exclude child."""
        s = self.s
        low = node.rest & -node.rest
        t = low.bit_length() - 1
        out = []
        skip_include = False
        if self.cfg.use_symmetry and not node.fam & (low - 1):
            # the first member of a lex-leader is the least mask of its size
            if s.order[t] != s.standard[s.order[t].bit_count()]:
                skip_include = True
        if not skip_include:
            fam = node.fam | low
            rest = s.kill_after_include(t, fam, node.rest & ~low)
            out.append(_Node(fam, rest, node.value + self.weights[t], node.lub + s.weight_lubell[t], node.checked))
        out.append(_Node(node.fam, node.rest & ~low, node.value, node.lub, node.checked))
        return out

    def _symmetry_prune(self, node: _Node) -> bool:
        if not self.cfg.use_symmetry:
            return False
        cur = (node.rest & -node.rest).bit_length() - 1 if node.rest else self.s.size
        done = max((b for b in self.s.boundaries if b <= cur), default=0)
        if done > node.checked:
            node.checked = done
            return self._not_leader(node.fam, done)
        return False

    def dfs(self, node: _Node):
        self._tick()
        if self._symmetry_prune(node):
            return
        if not node.rest:
            self._record(node)
            return
        if self._pruned(node):
            return
        for child in self.children(node):
            self.dfs(child)

    def frontier(self, node: _Node, depth: int, out: list[_Node]):
        """Expand without incumbent pruning to a fixed depth (deterministic split)."""
        if self._symmetry_prune(node):
            return
        if depth == 0 or not node.rest:
            out.append(node)
            return
        for child in self.children(node):
            self.frontier(child, depth - 1, out)


class _Found(Exception):
    def __init__(self, fam: int):
        self.fam = fam


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _root(space: _Space, required: list[int], forbidden: list[int], weights: list[int]) -> _Node | None:
    fam = 0
    value = lub = 0
    rest = (1 << space.size) - 1
    for m in forbidden:
        rest &= ~(1 << space.pos[m])
    for m in required:
        t = space.pos[m]
        if not (rest >> t & 1):
            return None
        fam |= 1 << t
        rest &= ~(1 << t)
        rest = space.kill_after_include(t, fam, rest)
        value += weights[t]
        lub += space.weight_lubell[t]
    for e in space.images:
        if e & fam == e:
            return None
    return _Node(fam, rest, value, lub, 0)


SPLIT_DEPTH = 6


def _run_subtrees(args):
    n, pattern, objective, cfg, ties, target, nodes, start_best, deadline = args
    space = _space(n, pattern)
    sr = _Searcher(space, objective, cfg, ties=ties, target=target, deadline=deadline)
    sr.best = start_best
    completed = True
    hit = None
    try:
        for node in nodes:
            sr.dfs(node)
    except _Stop:
        completed = False
    except _Found as f:
        hit = f.fam
    return sr.best, sr.found, sr.nodes, completed, hit


def _search(n: int, pattern: PosetPattern, objective: str, config: SearchConfig, *,
            required=(), ties=False, target=None):
    if n < 1 or n > MAX_SEARCH_N:
        raise SearchError(f"complete searches need 1 <= n <= {MAX_SEARCH_N}, got {n}")
    space = _space(n, pattern)
    weights = space.weight_lubell if objective == "lubell" else [1] * space.size
    forbidden = [(1 << n) - 1] if config.exclude_full_set else []
    root = _root(space, list(required), forbidden, weights)
    deadline = None if config.time_limit is None else time.monotonic() + config.time_limit
    probe = _Searcher(space, objective, config, ties=ties, target=target)
    if root is None:
        return space, None, [], 0, True, None
    front: list[_Node] = []
    probe.frontier(root, SPLIT_DEPTH, front)
    workers = min(config.thread_budget, len(front))
    # contiguous chunks keep global DFS order = (job order, order within job), so the
    # first witness found matches the single-threaded run
    workers = max(workers, 1)
    step = -(-len(front) // workers)
    jobs = [front[i:i + step] for i in range(0, len(front), step)] or [[]]
    args = [(n, pattern, objective, config, ties, target, j, -1, deadline) for j in jobs]
    if len(args) == 1:
        results = [_run_subtrees(args[0])]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(len(args)) as ex:
            results = list(ex.map(_run_subtrees, args))
    best = max(r[0] for r in results)
    nodes = sum(r[2] for r in results) + len(front)
    completed = all(r[3] for r in results)
    hit = next((r[4] for r in results if r[4] is not None), None)
    found: list[int] = []
    for r in results:
        if r[0] == best:
            found.extend(r[1])
            if not ties:
                break
    if best < 0:
        return space, None, [], nodes, completed, hit
    return space, best, found, nodes, completed, hit


def _witness_forms(space: _Space, found: list[int], pattern: PosetPattern, required, all_classes: bool) -> list[SetFamily]:
    fams = [space.to_family(b) for b in found]
    for f in fams:
        # soundness: re-check with the embedding search, independent of the image hypergraph
        if not is_pattern_free(f, pattern) or any(m not in f for m in required):
            raise AssertionError(f"unsound witness {f}")
    if space.n > MAX_CANON_N:
        return fams
    forms = sorted({canonical_form(f) for f in fams})
    if not all_classes:
        forms = forms[:1]
    return [c.family() for c in forms]


def la_exact(n: int, pattern: PosetPattern, config: SearchConfig | None = None, *, all_witnesses: bool = False) -> SearchOutcome:
    """La(n, P): the largest size of a P-free family in 2^[n]."""
    cfg = config or SearchConfig()
    space, best, found, nodes, completed, _ = _search(n, pattern, "cardinality", cfg, ties=all_witnesses)
    opt = None if best is None else Fraction(best)
    wit = _witness_forms(space, found, pattern, (), all_witnesses) if best is not None else []
    return SearchOutcome("cardinality", opt, wit, nodes, completed, n, str(pattern))


def max_lubell(n: int, pattern: PosetPattern, require_empty_member: bool = False,
               config: SearchConfig | None = None, *, all_witnesses: bool = True) -> SearchOutcome:
    """Largest Lubell value of a P-free family (containing the empty set if required)."""
    cfg = config or SearchConfig()
    required = (0,) if require_empty_member else ()
    space, best, found, nodes, completed, _ = _search(n, pattern, "lubell", cfg, required=required, ties=all_witnesses)
    opt = None if best is None else Fraction(best, space.L)
    wit = _witness_forms(space, found, pattern, required, all_witnesses) if best is not None else []
    return SearchOutcome("lubell", opt, wit, nodes, completed, n, str(pattern))


@dataclass(frozen=True)
class SizeSearchResult:
    family: SetFamily | None
    completed: bool
    nodes_explored: int

    @property
    def found(self) -> bool:
        return self.family is not None


def find_family_of_size(n: int, pattern: PosetPattern, target: int, config: SearchConfig | None = None) -> SizeSearchResult:
    """A P-free family of exactly ``target`` sets; absence is conclusive only when completed."""
    cfg = config or SearchConfig()
    # relabeling preserves freeness, so symmetry pruning is sound here too
    space, best, found, nodes, completed, hit = _search(n, pattern, "cardinality", cfg, target=target)
    if hit is None:
        return SizeSearchResult(None, completed, nodes)
    fam = space.to_family(hit)
    # any subfamily of a P-free family is P-free
    fam = SetFamily(n, fam.members[:target]) if len(fam) > target else fam
    if not is_pattern_free(fam, pattern):
        raise AssertionError("unsound size witness")
    return SizeSearchResult(fam, True, nodes)


def enumerate_maximal_pfree(n: int, pattern: PosetPattern, require_empty_member: bool = False,
                            node_limit: int | None = None) -> list[tuple[CanonicalForm, Fraction]]:
    """Every inclusion-maximal P-free family up to relabeling, with its Lubell value."""
    from .family import lubell

    if n > 5:
        raise SearchError("maximal-family enumeration capped at n=5")
    space = _space(n, pattern)
    required = [0] if require_empty_member else []
    root = _root(space, required, [], [1] * space.size)
    if root is None:
        return []
    classes: set[CanonicalForm] = set()
    nodes = 0
    all_sets = (1 << space.size) - 1

    def rec(fam: int, rest: int):
        nonlocal nodes
        nodes += 1
        if node_limit is not None and nodes > node_limit:
            raise SearchError("node limit exceeded during enumeration")
        if not rest:
            # maximal iff nothing outside fam can be added
            outside = all_sets & ~fam
            for t in _bits(outside):
                if space.addable(fam, t):
                    return
            classes.add(canonical_form(space.to_family(fam)))
            return
        low = rest & -rest
        t = low.bit_length() - 1
        f2 = fam | low
        rec(f2, space.kill_after_include(t, f2, rest & ~low))
        # excluding t only makes sense if something can still block it
        rest2 = rest & ~low
        pool = fam | rest2
        if any((e & ~pool) == low for e in space.edges_of[t]):
            rec(fam, rest2)

    rec(root.fam, root.rest)
    out = [(c, lubell(c.family())) for c in classes]
    out.sort(key=lambda cv: (-cv[1], cv[0]))
    return out


def middle_level_forms(n: int, m: int) -> set[CanonicalForm]:
    m = min(m, n + 1)
    return {canonical_form(middle_levels(n, m, v)) for v in ("low", "high")}


def verify_extremal_uniqueness(n: int, pattern: PosetPattern, expected_m: int,
                               config: SearchConfig | None = None) -> bool | None:
    """Whether every extremal P-free family is a middle-levels family B(n, m).

    None when the search did not complete.
    """
    out = la_exact(n, pattern, config, all_witnesses=True)
    if not out.completed:
        return None
    allowed = middle_level_forms(n, expected_m)
    return all(canonical_form(w) in allowed for w in out.witnesses)
