import json
import subprocess
import sys

import pytest

from lubell.cli import main
from lubell.claims import load_table


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def c1_file(tmp_path, capsys):
    path = tmp_path / "c1.fam"
    code, out, _ = run(capsys, "family", "c1:s=2,n=4")
    assert code == 0
    path.write_text(out)
    return path


def test_lubell_command(capsys, c1_file, tmp_path):
    assert run(capsys, "lubell", str(c1_file))[:2] == (0, "lubell=7/3 size=8 height=3\n")
    empty = tmp_path / "e.fam"
    empty.write_text("family 3\n")
    assert run(capsys, "lubell", str(empty))[:2] == (0, "lubell=0/1 size=0 height=0\n")
    bad = tmp_path / "bad.fam"
    bad.write_text("family 3\n1,2\n1,,2\n")
    code, _, err = run(capsys, "lubell", str(bad))
    assert code == 2 and "line 3" in err
    code, _, err = run(capsys, "lubell", str(tmp_path / "missing.fam"))
    assert code == 2


def test_search_commands(capsys):
    code, out, _ = run(capsys, "search", "la", "--n", "4", "--pattern", "chain:3")
    assert code == 0 and "optimum=10/1 completed=true" in out.splitlines()[0]
    code, out, _ = run(capsys, "search", "maxlubell", "--n", "4", "--pattern", "diamond:2", "--require-empty",
                       "--all-witnesses")
    assert code == 0 and "optimum=7/3" in out
    assert out.count("family 4") == 2
    code, out, _ = run(capsys, "search", "size", "--n", "4", "--pattern", "diamond:2", "--target", "12")
    assert code == 0 and "result=none completed=true" in out


def test_search_partial_and_usage_errors(capsys):
    code, out, _ = run(capsys, "search", "size", "--n", "6", "--pattern", "diamond:2", "--target", "36",
                       "--time-limit", "0.5")
    assert code == 3 and "result=unknown completed=false" in out
    code, out, _ = run(capsys, "search", "la", "--n", "5", "--pattern", "diamond:3", "--node-limit", "50")
    assert code == 3 and "completed=false" in out
    assert run(capsys, "search", "la", "--n", "9", "--pattern", "chain:2")[0] == 2
    assert run(capsys, "search", "la", "--n", "3", "--pattern", "hexagon")[0] == 2
    assert run(capsys, "search", "size", "--n", "3", "--pattern", "chain:2")[0] == 2
    assert run(capsys, "search", "la", "--n", "3", "--pattern", "chain:2", "--threads", "0")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_verify_zero_budget_skips_searches(capsys):
    code, out, _ = run(capsys, "verify", "--time-budget", "0")
    assert code == 0
    table = {e["id"]: e for e in load_table()}
    lines = [ln for ln in out.splitlines() if ln[:7].strip() in ("PASS", "FAIL", "SKIPPED", "PARTIAL")]
    assert len(lines) == len(table)
    for ln in lines:
        cid = ln.split()[1].rstrip(":")
        expected = "PASS" if table[cid]["kind"] == "formula" else "SKIPPED"
        assert ln.startswith(expected), ln


def test_verify_subset_json(capsys):
    code, out, _ = run(capsys, "verify", "--only", "d2", "d3", "formula-dk", "--json")
    assert code == 0
    records = [json.loads(ln) for ln in out.splitlines()]
    assert [r["claim_id"] for r in records] == ["d2", "d3", "formula-dk"]
    assert all(r["status"] == "pass" and r["expected"] == r["computed"] for r in records)


def test_verify_corrupted_table_reports_diff(capsys, tmp_path):
    data = {"version": 1, "claims": [e for e in load_table() if e["id"] in ("d2", "formula-dk")]}
    data["claims"][0] = dict(data["claims"][0], expected="7/3")
    path = tmp_path / "claims.json"
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", "--claims", str(path))
    assert code == 1
    assert "FAIL    d2" in out
    assert "expected: 7/3" in out and "computed: 5/2" in out
    assert "PASS    formula-dk" in out
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    assert run(capsys, "verify", "--claims", str(bad))[0] == 2


def test_probe(capsys):
    code, out, _ = run(capsys, "probe", "--n", "2")
    assert code == 0 and out.startswith("probe n=2 max=5/2 conjectured=5/2 completed=true")
    code, out, _ = run(capsys, "probe", "--n", "4")
    head = out.splitlines()[0]
    assert code == 0 and "max=7/3 conjectured=7/3" in head and "all_constructions=true" in head
    assert "class C1(2,2)" in out and "class C2(2,2)" in out
    code, out, _ = run(capsys, "probe", "--n", "5", "--node-limit", "10")
    assert code == 3 and "completed=false" in out


def test_chains_command(capsys, c1_file):
    code, out, _ = run(capsys, "chains", str(c1_file), "--partition", "min")
    assert code == 0 and out.splitlines()[0] == "block min:{} chains=24 avg=7/3"
    code, out, _ = run(capsys, "chains", str(c1_file), "--partition", "deleted")
    assert len(out.splitlines()) == 4 and all("chains=6" in ln for ln in out.splitlines())
    code, out, _ = run(capsys, "chains", str(c1_file), "--partition", "minmax")
    assert code == 0 and out.splitlines()[-1].startswith("block empty")
    a = run(capsys, "chains", str(c1_file), "--samples", "2000", "--seed", "4")
    b = run(capsys, "chains", str(c1_file), "--samples", "2000", "--seed", "4", "--threads", "2")
    assert a == b and a[1].startswith("montecarlo samples=2000 seed=4 mean=")


def test_pattern_family_bounds_commands(capsys):
    code, out, _ = run(capsys, "pattern", "diamond:2")
    assert code == 0 and out.splitlines()[0] == "poset diamond:2 4" and "height=3" in out
    assert "e_lower(n<=6)=2" in out
    code, out, _ = run(capsys, "family", "middle:n=4,k=2,variant=high")
    assert code == 0 and out.splitlines()[0] == "family 4" and len(out.splitlines()) == 11
    assert run(capsys, "family", "c4:s=1,n=3")[0] == 2
    assert run(capsys, "family", "c1:s=1")[0] == 2
    assert run(capsys, "bounds", "--k", "6")[1] == "k=6 m=3 case=case2 lower=3/1 upper=11/3\n"
    assert run(capsys, "bounds", "--k", "1")[0] == 2


def test_module_entry_point_is_reproducible(c1_file):
    cmd = [sys.executable, "-m", "lubell", "chains", str(c1_file), "--samples", "1500", "--seed", "7"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first.startswith(b"montecarlo")


def test_time_limited_claim_is_partial():
    from lubell.claims import exit_code, run_claim

    entry = {e["id"]: e for e in load_table()}["delta6"]
    r = run_claim(entry, 0.2)
    assert r.status == "partial" and r.computed == "search incomplete"
    assert exit_code([r]) == 3
