import subprocess
import sys

import numpy as np
import pytest

from mopls.archive import load_points
from mopls.cli import main, parse_seeds
from mopls.harness import (
    CSV_COLUMNS,
    VARIANTS,
    BudgetRule,
    TradeoffSpec,
    compare,
    final_values,
    format_csv,
    parse_csv,
    pool_width,
    report,
    run_tradeoff,
    run_variant_matrix,
    variant,
)
from mopls.problems import generate_mtsp, generate_mtspwp, read_instance
from mopls.search import FirstDominating, FirstNonDominated, FixedRandomMoves, FullNeighborhood, Selection

RULE = BudgetRule("iters", iters=2_000)


@pytest.fixture(scope="module")
def matrix():
    insts = [generate_mtsp(20, 3, 0), generate_mtspwp(20, 1, 2, 1)]
    return run_variant_matrix(insts, ["MPLS-100", "pls-list", "MPLS-100-Random"], [0, 1], RULE, phase1_runs=6)


def test_variant_table():
    assert len(VARIANTS) == 9
    triples = {(v.algorithm, v.selection, repr(v.exploration), v.backend) for v in VARIANTS.values()}
    assert len(triples) == 9
    assert variant("mpls-100") is VARIANTS["MPLS-100"]
    assert variant("pls-list").backend == "list"
    assert variant("mpls-random").selection is Selection.UNIFORM_RANDOM
    assert variant("MPLS-1").exploration == FixedRandomMoves(1)
    assert isinstance(variant("MPLS-full").exploration, FullNeighborhood)
    assert isinstance(variant("MPLS-1nd").exploration, FirstNonDominated)
    assert isinstance(variant("MPLS-1dom").exploration, FirstDominating)
    with pytest.raises(KeyError):
        variant("MPLS-7")


def test_budget_rule():
    assert BudgetRule("iters", 500).budget(3.0).limit == 500
    assert BudgetRule("time", scale=2.0).budget(3.0).limit == 6.0
    with pytest.raises(ValueError):
        BudgetRule("steps")


def test_record_count_and_shared_seeding(matrix):
    assert len(matrix) == 12
    cells = {}
    for r in matrix:
        cells.setdefault((r.instance_id, r.seed), []).append(r)
    for rs in cells.values():
        first = rs[0].checkpoints[0]
        for r in rs[1:]:
            assert r.checkpoints[0] == first


def test_traces(matrix):
    for r in matrix:
        assert len(r.checkpoints) == 11
        assert r.checkpoints[0].hv_normalized == 1.0
        times = [c.elapsed for c in r.checkpoints]
        hv = [c.hypervolume for c in r.checkpoints]
        assert times == sorted(times)
        assert all(b >= a for a, b in zip(hv, hv[1:]))


def test_csv_round_trip(matrix):
    text = format_csv(matrix[:1])
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 12
    full = format_csv(matrix)
    back = parse_csv(full)
    assert format_csv(back) == full
    assert [c for r in back for c in r.checkpoints] == [c for r in matrix for c in r.checkpoints]
    with pytest.raises(ValueError):
        format_csv([])


def test_compare_and_report(matrix):
    vals = final_values(matrix, "MPLS-100", "hv_normalized")
    assert len(vals) == 4
    res = compare(matrix, "MPLS-100", "StandardPLS-List")
    assert 0 <= res.p_value <= 1
    text = report(matrix)
    assert "MPLS-100-Random" in text and len(text.splitlines()) == 2 + 6


def test_pool_width(monkeypatch):
    monkeypatch.setenv("MOPLS_THREADS", "3")
    assert pool_width() == 3 and pool_width(1) == 1
    monkeypatch.setenv("MOPLS_THREADS", "x")
    assert pool_width() == 1


def test_parallel_matches_serial():
    insts = [generate_mtsp(15, 2, 4)]
    kw = dict(phase1_runs=4)
    a = run_variant_matrix(insts, ["MPLS-100"], [0, 1], RULE, workers=1, **kw)
    b = run_variant_matrix(insts, ["MPLS-100"], [0, 1], RULE, workers=2, **kw)
    assert format_csv(a) == format_csv(b)


def test_tradeoff_spec():
    with pytest.raises(ValueError):
        TradeoffSpec(10, (0.5, 1.0))
    with pytest.raises(ValueError):
        TradeoffSpec(10, (1.0, 0.0))
    assert TradeoffSpec(10).runs(0.1) == 1 and TradeoffSpec(10).runs(1.0) == 10


def test_tradeoff_iters_boundary():
    inst = generate_mtsp(20, 3, 2)
    recs = run_tradeoff(inst, TradeoffSpec(10, (1.0, 0.5)), "MPLS-100", [0], RULE)
    full, half = recs
    assert full.variant == "MPLS-100@1" and half.variant == "MPLS-100@0.5"
    # nothing left for the search at fraction 1
    assert full.final.elapsed == 0.0 and len({c.archive_size for c in full.checkpoints}) == 1
    assert all(c.hv_normalized == 1.0 for c in full.checkpoints)
    assert 0 < half.final.elapsed < RULE.iters


def test_tradeoff_time_totals():
    inst = generate_mtsp(30, 3, 3)
    recs = run_tradeoff(inst, TradeoffSpec(30, (1.0, 0.6, 0.2)), "MPLS-100", [0], BudgetRule("time"))
    totals = [r.phase1_time + r.search_time for r in recs]
    assert max(totals) <= 1.05 * min(totals) + 0.01
    assert recs[0].final.elapsed == pytest.approx(recs[0].phase1_time)


def test_parse_seeds():
    assert parse_seeds("0..3") == [0, 1, 2, 3]
    assert parse_seeds("1,5") == [1, 5]


def test_cli_commands(tmp_path, capsys):
    inst_path = tmp_path / "i.txt"
    assert main(["gen", "--problem", "mtsp", "--n", "20", "--d", "3", "--seed", "7", "--out", str(inst_path)]) == 0
    inst = read_instance(inst_path)
    assert inst.n == 20 and inst.d == 3
    assert np.array_equal(inst.coords, generate_mtsp(20, 3, 7).coords)

    dump = tmp_path / "a.dump"
    assert main(["seed", "--instance", str(inst_path), "--runs", "5", "--out", str(dump)]) == 0
    assert load_points(dump).shape[1] == 3

    assert main(["eval", "--archive", str(dump), "--ref-from", str(inst_path)]) == 0
    out = capsys.readouterr().out
    assert "hypervolume" in out and "r_indicator" in out

    csv_path = tmp_path / "r.csv"
    assert main(["run", "--instance", str(inst_path), "--variants", "mpls-100,pls-list", "--seeds", "0..2",
                 "--runs", "4", "--iters", "1000", "--out", str(csv_path)]) == 0
    assert main(["compare", "--csv", str(csv_path), "--a", "MPLS-100", "--b", "StandardPLS-List"]) == 0
    assert "p=" in capsys.readouterr().out
    assert main(["report", "--csv", str(csv_path)]) == 0
    assert "StandardPLS-List" in capsys.readouterr().out

    tr = tmp_path / "t.csv"
    assert main(["tradeoff", "--problem", "mtsp", "--n", "15", "--d", "2", "--runs", "4", "--iters", "500",
                 "--fractions", "1,0.5", "--out", str(tr)]) == 0
    assert "MPLS-100@0.5" in tr.read_text()


def test_cli_errors(tmp_path, capsys):
    assert main(["eval", "--archive", str(tmp_path / "none"), "--ref-from", str(tmp_path / "none")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--variants", "MPLS-100"])
    assert exc.value.code
    with pytest.raises(SystemExit):
        main(["bogus"])


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "mopls.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "tradeoff" in out.stdout
