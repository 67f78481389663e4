import itertools
from statistics import median

import numpy as np
import pytest

from mopls.archive import ListArchive, NDTreeArchive, make_archive
from mopls.domain import draw_weight_vector
from mopls.harness import BOUNDS_SEED, Measure
from mopls.indicators import hypervolume_engine
from mopls.problems import MTSPInstance, generate_mtsp, generate_mtspwp
from mopls.search import (
    Budget,
    CombinedChebycheffLinear,
    FirstDominating,
    FirstNonDominated,
    FixedRandomMoves,
    FullNeighborhood,
    SearchConfig,
    Selection,
    WeightedSum,
    mpls,
    run_record_checkpoint,
    seed_archive,
    seed_runs,
    selection_function,
    standard_pls,
    steepest_local_search,
)
from oracles import all_tours, cycle_edges, naive_dominates, two_opt_neighbors_by_edges


def evals(n, **kw):
    return SearchConfig(Budget.evaluations(n), **kw)


def global_front(inst):
    A = ListArchive(inst.d)
    for t in all_tours(inst.n):
        A.update(inst.evaluate(t), t)
    return A


def is_pareto_local_optimum_set(inst, archive):
    """No neighbor (brute-force edge oracle) of any member is accepted by the archive."""
    pts = archive.point_set()
    by_edges = {cycle_edges(t): t for t in all_tours(inst.n)}
    for e in archive.entries():
        for edges in two_opt_neighbors_by_edges(e.payload):
            y = tuple(inst.evaluate(by_edges[edges]))
            if y not in pts and not any(q == y or naive_dominates(q, y) for q in pts):
                return False
    return True


def test_budget_and_config_validation():
    with pytest.raises(ValueError):
        Budget("steps", 10)
    with pytest.raises(ValueError):
        FixedRandomMoves(0)
    with pytest.raises(ValueError):
        SearchConfig(Budget.seconds(1), checkpoint_fraction=0)
    with pytest.raises(ValueError):
        mpls(generate_mtsp(10, 2, 0), NDTreeArchive(2), evals(10))


def test_scalarizers():
    Y = np.array([[-1.0, -2.0], [-3.0, 0.0]])
    assert WeightedSum(np.array([0.5, 0.5]))(Y).tolist() == [1.5, 1.5]
    f = CombinedChebycheffLinear(np.array([1.0, 2.0]), np.zeros(2))
    assert f(Y).tolist() == [4 + 0.5 * 5, 3 + 0.5 * 3]


def test_pls_fixpoint_on_global_front():
    inst = generate_mtsp(8, 2, 0, candidates=7)
    front = global_front(inst)
    before = [(e.y, tuple(e.payload)) for e in front.entries()]
    res = standard_pls(inst, front, evals(10**7))
    assert res.converged and res.iterations == 1
    assert [(e.y, tuple(e.payload)) for e in front.entries()] == before


def test_pls_reaches_pareto_local_optimum_set():
    inst = generate_mtsp(8, 2, 3, candidates=7)
    rng = np.random.default_rng(3)
    for backend in ("list", "nd-tree"):
        a = make_archive(backend, 2)
        x = inst.random_solution(rng)
        a.update(inst.evaluate(x), x)
        assert standard_pls(inst, a, evals(10**7)).converged
        assert is_pareto_local_optimum_set(inst, a)


def test_pls_identical_planes_acts_as_scalar_descent():
    base = generate_mtsp(9, 2, 4, candidates=8)
    inst = MTSPInstance(np.stack([base.coords[0]] * 3), candidates=8)
    rng = np.random.default_rng(0)
    x = inst.random_solution(rng)
    a = NDTreeArchive(3)
    a.update(inst.evaluate(x), x)
    res = standard_pls(inst, a, evals(10**7))
    assert all(c.archive_size == 1 for c in res.checkpoints)
    (e,) = a.entries()
    assert e.y[0] >= inst.evaluate(x)[0]
    # no 2-edge exchange improves the final tour
    assert np.all(inst.deltas(e.payload, inst.neighborhood(e.payload))[:, 0] <= 0)


def test_pls_list_and_tree_identical():
    inst = generate_mtsp(20, 3, 1)
    seeded = seed_archive(inst, 20, np.random.default_rng(1))
    for budget in (5_000, 60_000):
        arch = {}
        for backend in ("list", "nd-tree"):
            a = seeded.build_archive(backend)
            standard_pls(inst, a, evals(budget, archive_backend=backend))
            arch[backend] = [(e.y, tuple(e.payload)) for e in a.entries()]
        assert arch["list"] == arch["nd-tree"]


def test_zero_budget_leaves_archive_unchanged():
    inst = generate_mtsp(20, 3, 2)
    seeded = seed_archive(inst, 10, np.random.default_rng(2))
    for algo in (mpls, standard_pls):
        a = seeded.build_archive()
        before = a.objectives()
        res = algo(inst, a, evals(0))
        assert np.array_equal(a.objectives(), before) and res.evaluations == 0
        assert len(res.checkpoints) == 11


def test_checkpoints_evaluation_mode():
    inst = generate_mtsp(20, 3, 2)
    a = seed_archive(inst, 10, np.random.default_rng(2)).build_archive()
    res = mpls(inst, a, evals(10_000))
    assert [c.evaluations for c in res.checkpoints] == list(range(0, 10_001, 1000))
    assert all(c.archive_size >= 1 for c in res.checkpoints)
    sizes = [c.archive_size for c in res.checkpoints]
    assert res.evaluations == 10_000 and sizes[-1] == len(a)


def test_checkpoints_time_mode():
    inst = generate_mtsp(20, 3, 2)
    a = seed_archive(inst, 10, np.random.default_rng(2)).build_archive()
    res = mpls(inst, a, SearchConfig(Budget.seconds(0.5)))
    times = [c.elapsed for c in res.checkpoints]
    assert len(times) == 11 and times[0] == 0
    assert all(t1 > t0 for t0, t1 in zip(times, times[1:]))
    assert times[-1] == pytest.approx(0.5)
    # standard PLS converging early still reports every checkpoint
    tiny = generate_mtsp(8, 2, 0, candidates=7)
    b = seed_archive(tiny, 3, np.random.default_rng(0)).build_archive()
    res = standard_pls(tiny, b, SearchConfig(Budget.seconds(2.0)))
    times = [c.elapsed for c in res.checkpoints]
    assert res.converged and len(times) == 11 and all(t1 > t0 for t0, t1 in zip(times, times[1:]))


def test_run_record_checkpoint():
    a = NDTreeArchive(2)
    a.update((1, 2))
    cps = run_record_checkpoint([], 0.0, a)
    run_record_checkpoint(cps, 1.0, a, 10)
    assert [c.elapsed for c in cps] == [0.0, 1.0] and cps[1].archive_size == 1
    with pytest.raises(ValueError):
        run_record_checkpoint(cps, 0.5, a)


@pytest.mark.parametrize("policy", [FixedRandomMoves(100), FixedRandomMoves(7, replacement=False), FullNeighborhood(),
                                    FirstNonDominated(), FirstDominating()])
@pytest.mark.parametrize("selection", list(Selection))
def test_mpls_determinism_and_monotone_quality(policy, selection):
    inst = generate_mtspwp(20, 2, 1, 3)
    seeded = seed_archive(inst, 15, np.random.default_rng(3))
    runs = []
    for _ in range(2):
        a = seeded.build_archive()
        res = mpls(inst, a, evals(8_000, exploration=policy, selection=selection, rng_seed=5))
        runs.append(([(e.y, tuple(e.payload)) for e in a.entries()], res))
    assert runs[0][0] == runs[1][0]
    res = runs[0][1]
    ref = np.min(np.vstack([c.objectives for c in res.checkpoints]), axis=0) - 1
    hv = [hypervolume_engine(c.objectives, ref) for c in res.checkpoints]
    assert all(h1 >= h0 for h0, h1 in zip(hv, hv[1:]))
    rng = np.random.default_rng(0)
    for _ in range(20):
        w, y0 = draw_weight_vector(3, rng), np.max(res.checkpoints[-1].objectives, axis=0) + 1
        best = [np.min(np.max(w * (y0 - c.objectives), axis=1)) for c in res.checkpoints]
        assert all(b1 <= b0 for b0, b1 in zip(best, best[1:]))


class RecordingArchive(NDTreeArchive):
    """Checks the guard: nothing weakly dominated by the selected solution is offered."""

    current = None
    offers = 0

    def update(self, y, payload=None):
        if self.current is not None:
            cur = self.current
            assert any(a > b for a, b in zip(y, cur)), "offered neighbor is not better anywhere"
            self.offers += 1
        return super().update(y, payload)


def test_filter_soundness():
    inst = generate_mtsp(25, 3, 6)
    seeded = seed_archive(inst, 10, np.random.default_rng(6))
    a = RecordingArchive(3)
    for y, p in seeded.entries:
        a.update(y, p)

    def on_select(entry):
        a.current = entry.y

    mpls(inst, a, evals(20_000), on_select=on_select)
    assert a.offers > 0


def test_chebycheff_selection_prefers_supported_points():
    a = NDTreeArchive(2)
    pts = {"a": (1.0, 0.2), "b": (0.2, 1.0), "c": (0.56, 0.54), "d": (0.55, 0.55), "e": (0.54, 0.56)}
    for k, p in pts.items():
        a.update(p, k)
    rng = np.random.default_rng(0)
    counts = dict.fromkeys(pts, 0)
    for _ in range(10_000):
        e, _ = a.minimize_chebycheff(selection_function(a, rng))
        counts[e.payload] += 1
    assert min(counts["a"], counts["b"]) > max(counts["c"], counts["d"], counts["e"])


def test_steepest_local_search_n7_enumeration():
    inst = generate_mtsp(7, 2, 1, candidates=6)
    rng = np.random.default_rng(1)
    spec = WeightedSum(np.array([1.0, 0.0]))
    start = inst.random_solution(rng)
    res = steepest_local_search(inst, spec, start)
    assert -res.objectives[0] <= -inst.evaluate(start)[0]
    by_edges = {cycle_edges(t): t for t in all_tours(7)}
    for edges in two_opt_neighbors_by_edges(res.solution):
        assert inst.evaluate(by_edges[edges])[0] <= res.objectives[0] + 1e-9
    again = steepest_local_search(inst, spec, res.solution)
    assert again.iterations == 0 and np.array_equal(again.solution, res.solution)


class Recorder:
    def __init__(self, inst, spec):
        self.inst, self.spec, self.values = inst, spec, []

    def __getattr__(self, name):
        return getattr(self.inst, name)

    def evaluate(self, sol):
        y = self.inst.evaluate(sol)
        self.values.append(float(self.spec(y)))
        return y


def test_steepest_local_search_strictly_decreases():
    for inst in (generate_mtsp(30, 3, 2), generate_mtspwp(30, 2, 2, 2)):
        rng = np.random.default_rng(2)
        w = draw_weight_vector(inst.d, rng)
        spec = WeightedSum(w) if inst.kind == "MTSP" else CombinedChebycheffLinear(w / inst.objective_scales(), inst.utopia())
        rec = Recorder(inst, spec)
        res = steepest_local_search(rec, spec, inst.random_solution(rng))
        assert res.iterations == len(rec.values) - 1 > 0
        assert all(b < a for a, b in zip(rec.values, rec.values[1:]))


def test_seed_runs_feed_the_archive():
    inst = generate_mtspwp(15, 1, 2, 4)
    for run, archive in seed_runs(inst, 8, np.random.default_rng(4)):
        y = inst.evaluate(run.result.solution)
        assert np.array_equal(y, run.result.objectives)
        assert any(all(p >= q for p, q in zip(e.y, y)) for e in archive.entries())
    seeded = seed_archive(generate_mtsp(12, 3, 0), 1, np.random.default_rng(0))
    assert len(seeded.entries) == 1


def test_seed_local_optimality_by_enumeration():
    inst = generate_mtsp(12, 3, 5)
    rng = np.random.default_rng(5)
    for run, _ in seed_runs(inst, 10, rng):
        spec = WeightedSum(run.weights)
        x = run.result.solution
        around = spec(inst.evaluate(x) + inst.deltas(x, inst.neighborhood(x)))
        assert np.all(around >= run.result.value - 1e-9 * max(1, abs(run.result.value)))


def test_more_seeding_runs_increase_hypervolume():
    gains = []
    for seed in range(5):
        inst = generate_mtsp(50, 3, seed)
        snaps = {}
        for k, (run, archive) in enumerate(seed_runs(inst, 200, np.random.default_rng(seed)), start=1):
            if k in (10, 200):
                snaps[k] = archive.objectives()
        ref = snaps[10].min(axis=0) * 1.5
        gains.append(hypervolume_engine(snaps[200], ref) - hypervolume_engine(snaps[10], ref))
    assert median(gains) > 0


@pytest.mark.slow
def test_mpls_more_moves_beats_single_move():
    # equal wall time: with M=1 every evaluated neighbor pays for a selection query
    hv = {1: [], 100: []}
    for seed in range(10):
        inst = generate_mtsp(50, 3, seed)
        m = Measure.for_instance(inst, BOUNDS_SEED)
        seeded = seed_archive(inst, 300, np.random.default_rng(seed))
        for k in hv:
            a = seeded.build_archive()
            mpls(inst, a, SearchConfig(Budget.seconds(2.0), exploration=FixedRandomMoves(k), rng_seed=seed))
            hv[k].append(m.hypervolume(a.objectives()))
    assert median(hv[100]) >= median(hv[1])
