"""The verification suite: recompute every claim in the expected-value table."""

from __future__ import annotations

import json
import random
import time
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable

from . import family as fam
from .chains import lubell_via_chains
from .family import (SetFamily, construction, construction_lubell, delta_lower, diamond_free_fast, dk_bounds,
                     fmt_rational, is_pattern_free, lubell, lubell_size_bound)
from .poset import butterfly, chain, diamond, harp, j_poset
from .search import (SearchConfig, canonical_form, enumerate_maximal_pfree, find_family_of_size, la_exact,
                     max_lubell, middle_level_forms)

ORACLE_SEED = 20110828


@dataclass
class ClaimResult:
    claim_id: str
    description: str
    expected: str
    computed: str
    status: str  # pass | fail | skipped | partial

    def line(self) -> str:
        mark = self.status.upper()
        text = f"{mark:7} {self.claim_id}: {self.description}"
        if self.status == "fail":
            text += f"\n        expected: {self.expected}\n        computed: {self.computed}"
        elif self.status in ("pass", "partial"):
            text += f" [{self.computed}]"
        return text

    def json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


class Incomplete(Exception):
    """A search hit its time limit before finishing."""


def load_table(path=None) -> list[dict]:
    if path is None:
        text = resources.files("lubell").joinpath("data/claims.json").read_text()
    else:
        text = Path(path).read_text()
    return json.loads(text)["claims"]


def random_families(count: int = 200, seed: int = ORACLE_SEED, max_n: int = 7) -> list[SetFamily]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(1, max_n)
        p = rng.random()
        out.append(SetFamily(n, tuple(m for m in range(1 << n) if rng.random() < p)))
    return out


def all_constructions(max_n: int) -> list[SetFamily]:
    return [construction(i, s, n) for n in range(2, max_n + 1) for s in range(1, n) for i in (1, 2, 3)]


# --- claim bodies ---------------------------------------------------------------
# each takes a time limit (seconds) and returns the computed value as text

def _done(out):
    if not out.completed:
        raise Incomplete
    return out


def _la(n, p, limit, **kw):
    return _done(la_exact(n, p, SearchConfig(time_limit=limit), **kw))


def _unique_text(n, p, m, limit):
    out = _la(n, p, limit, all_witnesses=True)
    allowed = middle_level_forms(n, m)
    unique = all(canonical_form(w) in allowed for w in out.witnesses)
    return f"{out.optimum.numerator},{'unique' if unique else 'not-unique'}"


def c_lubell_oracle(limit):
    fams = random_families() + all_constructions(7)
    return str(sum(1 for f in fams if lubell_via_chains(f) != lubell(f)))


def c_d(n):
    return lambda limit: fmt_rational(_done(max_lubell(n, diamond(2), False, SearchConfig(time_limit=limit))).optimum)


def c_delta(n):
    return lambda limit: fmt_rational(_done(max_lubell(n, diamond(2), True, SearchConfig(time_limit=limit))).optimum)


def c_delta4_classes(limit):
    out = _done(max_lubell(4, diamond(2), True, SearchConfig(time_limit=limit)))
    names = {canonical_form(construction(1, 2, 4)): "C1(2,2)", canonical_form(construction(2, 2, 4)): "C2(2,2)",
             canonical_form(construction(3, 2, 4)): "C3(2,2)"}
    got = [names.get(canonical_form(w), "other") for w in out.witnesses]
    return ",".join(sorted(got))


@lru_cache(maxsize=1)
def _enum4():
    return enumerate_maximal_pfree(4, diamond(2), True)


def c_enum4_top(limit):
    return fmt_rational(max(v for _, v in _enum4()))


def c_enum4_rest(limit):
    vals = [v for _, v in _enum4()]
    top = max(vals)
    return fmt_rational(max(v for v in vals if v < top))


def c_enum4_count(limit):
    return str(len(_enum4()))


def c_erdos(limit):
    parts = []
    for n in range(1, 6):
        for k in range(2, 5):
            if n >= k - 1:
                parts.append(f"{n}:{k}={_la(n, chain(k), limit).optimum.numerator}")
    return " ".join(parts)


def c_la(n, p):
    return lambda limit: str(_la(n, p, limit).optimum.numerator)


def exceptional_butterfly_family() -> SetFamily:
    return SetFamily.from_sets(4, [[1], [2], [1, 3, 4], [2, 3, 4]] + [list(c) for c in _pairs(4)])


def _pairs(n):
    from itertools import combinations

    return combinations(range(1, n + 1), 2)


def c_butterfly_family(limit):
    f = exceptional_butterfly_family()
    return f"{'free' if is_pattern_free(f, butterfly()) else 'contains'},{len(f)}"


def c_butterfly_unique(n):
    def body(limit):
        text = _unique_text(n, butterfly(), 2, limit)
        return "true" if text.endswith(",unique") else "false"
    return body


def c_unique(n, p, m):
    return lambda limit: _unique_text(n, p, m, limit)


def c_dk_consistency(limit):
    bad = 0
    for n in (3, 4):
        for k in (2, 3, 4):
            out = _la(n, diamond(k), limit)
            coarse, refined = lubell_size_bound(n, dk_bounds(k).upper)
            cap = refined if refined is not None else coarse
            if out.optimum > cap:
                bad += 1
    return str(bad)


def c_constructions(limit):
    bad = 0
    for n in range(4, 13):
        for s in range(1, n):
            for i in (1, 2, 3):
                if lubell(construction(i, s, n)) != construction_lubell(s, n):
                    bad += 1
    return str(bad)


def c_claim1(limit):
    return str(sum(1 for n in range(4, 13) if not fam.claim1_holds(n)))


def c_dk(limit):
    return ",".join(fmt_rational(dk_bounds(k).upper) for k in (2, 3, 6))


def c_delta_lower(limit):
    bad = 0
    for n in range(4, 13):
        f = construction(1, n // 2, n)
        if lubell(f) != delta_lower(n) or not diamond_free_fast(f, 2):
            bad += 1
    return str(bad)


def c_size36(limit):
    res = find_family_of_size(6, diamond(2), 36, SearchConfig(time_limit=limit))
    if res.family is None:
        if res.completed:
            return "not-found"
        raise Incomplete
    f = res.family
    ok = len(f) == 36 and diamond_free_fast(f, 2) and is_pattern_free(f, diamond(2))
    return "found" if ok else "invalid"


CLAIMS: dict[str, Callable[[float | None], str]] = {
    "lubell-oracle": c_lubell_oracle,
    "d2": c_d(2), "d3": c_d(3), "d4": c_d(4),
    "delta4": c_delta(4), "delta4-classes": c_delta4_classes, "delta5": c_delta(5), "delta6": c_delta(6),
    "enum4-top": c_enum4_top, "enum4-rest": c_enum4_rest, "enum4-count": c_enum4_count,
    "erdos": c_erdos,
    "butterfly-n3": c_la(3, butterfly()), "butterfly-n4": c_la(4, butterfly()), "butterfly-n5": c_la(5, butterfly()),
    "butterfly-n4-family": c_butterfly_family,
    "butterfly-unique-n4": c_butterfly_unique(4), "butterfly-unique-n5": c_butterfly_unique(5),
    "diamond3-n4": c_unique(4, diamond(3), 3), "diamond4-n4": c_unique(4, diamond(4), 3),
    "diamond3-n5": c_unique(5, diamond(3), 3),
    "dk-bound-consistency": c_dk_consistency,
    "harp43-n4": c_unique(4, harp([4, 3]), 3),
    "formula-constructions": c_constructions, "formula-claim1": c_claim1, "formula-dk": c_dk,
    "formula-delta-lower": c_delta_lower,
    "jposet-n3": c_la(3, j_poset()), "jposet-n4": c_la(4, j_poset()),
    "size36-n6": c_size36,
}


def run_claim(entry: dict, limit: float | None) -> ClaimResult:
    cid = entry["id"]
    body = CLAIMS.get(cid)
    expected = entry["expected"]
    desc = entry["description"]
    if body is None:
        return ClaimResult(cid, desc, expected, "unknown claim id", "fail")
    try:
        computed = body(limit)
    except Incomplete:
        return ClaimResult(cid, desc, expected, "search incomplete", "partial")
    status = "pass" if computed == expected else "fail"
    return ClaimResult(cid, desc, expected, computed, status)


def verify_all(time_budget: float | None = 900.0, table=None, only: list[str] | None = None,
               echo: Callable[[ClaimResult], None] | None = None) -> list[ClaimResult]:
    """Run every claim; searches share ``time_budget`` seconds (None = unlimited)."""
    entries = load_table(table)
    if only:
        entries = [e for e in entries if e["id"] in only]
    start = time.monotonic()
    results = []
    for e in entries:
        limit = None
        if e["kind"] != "formula" and time_budget is not None:
            remaining = time_budget - (time.monotonic() - start)
            if remaining <= 0:
                r = ClaimResult(e["id"], e["description"], e["expected"], "no time budget left", "skipped")
                results.append(r)
                if echo:
                    echo(r)
                continue
            limit = remaining
        r = run_claim(e, limit)
        results.append(r)
        if echo:
            echo(r)
    return results


def exit_code(results: list[ClaimResult]) -> int:
    if any(r.status == "fail" for r in results):
        return 1
    if any(r.status == "partial" for r in results):
        return 3
    return 0

