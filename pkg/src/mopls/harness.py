"""Experiment orchestration: variant matrix, seeding/search tradeoff, CSV traces and reports."""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import median
from typing import Iterable, Sequence

import numpy as np

from mopls.archive import make_archive
from mopls.indicators import (
    ObjectiveBounds,
    RIndicatorConfig,
    approximate_bounds,
    clip_to_reference,
    hypervolume_engine,
    r_indicator,
)
from mopls.problems.io import read_instance
from mopls.search import (
    Budget,
    Checkpoint,
    FirstDominating,
    FirstNonDominated,
    FixedRandomMoves,
    FullNeighborhood,
    SearchConfig,
    SeedResult,
    Selection,
    mpls,
    seed_runs,
    standard_pls,
)
from mopls.stats import mann_whitney_u

CSV_COLUMNS = ["run_id", "variant", "instance", "seed", "elapsed_s", "hypervolume", "hv_normalized", "r_indicator", "archive_size"]
BOUNDS_SEED = 20_000
HV_SCALE = 1.5


# -- variants ------------------------------------------------------------------


@dataclass(frozen=True)
class VariantSpec:
    name: str
    algorithm: str  # "mpls" or "pls"
    selection: Selection = Selection.CHEBYCHEFF_DRAW
    exploration: object = FixedRandomMoves(100)
    backend: str = "nd-tree"

    def config(self, budget: Budget, seed: int, checkpoint_fraction: float = 0.1) -> SearchConfig:
        return SearchConfig(budget, self.exploration, self.selection, self.backend, seed, checkpoint_fraction)

    def run(self, inst, archive, config: SearchConfig):
        return (standard_pls if self.algorithm == "pls" else mpls)(inst, archive, config)


VARIANTS = {
    v.name: v
    for v in [
        VariantSpec("MPLS-100", "mpls"),
        VariantSpec("MPLS-full", "mpls", exploration=FullNeighborhood()),
        VariantSpec("MPLS-1", "mpls", exploration=FixedRandomMoves(1)),
        VariantSpec("MPLS-100-Random", "mpls", selection=Selection.UNIFORM_RANDOM),
        VariantSpec("MPLS-100-List", "mpls", backend="list"),
        VariantSpec("StandardPLS-Tree", "pls", exploration=FullNeighborhood()),
        VariantSpec("StandardPLS-List", "pls", exploration=FullNeighborhood(), backend="list"),
        VariantSpec("MPLS-1nd", "mpls", exploration=FirstNonDominated()),
        VariantSpec("MPLS-1dom", "mpls", exploration=FirstDominating()),
    ]
}

_ALIASES = {
    "pls-tree": "StandardPLS-Tree",
    "pls-list": "StandardPLS-List",
    "mpls-random": "MPLS-100-Random",
    "mpls-list": "MPLS-100-List",
}


def variant(name: str) -> VariantSpec:
    key = name.strip().lower()
    for full in VARIANTS:
        if full.lower() == key:
            return VARIANTS[full]
    if key in _ALIASES:
        return VARIANTS[_ALIASES[key]]
    raise KeyError(f"unknown variant {name!r}; choose from {', '.join(VARIANTS)}")


# -- records -------------------------------------------------------------------


@dataclass
class TracePoint:
    elapsed: float
    hypervolume: float
    hv_normalized: float
    r_indicator: float
    archive_size: int


@dataclass
class RunRecord:
    run_id: str
    variant: str
    instance_id: str
    seed: int
    phase1_time: float
    checkpoints: list[TracePoint] = field(default_factory=list)
    search_time: float = 0.0

    @property
    def final(self) -> TracePoint:
        return self.checkpoints[-1]


@dataclass(frozen=True)
class BudgetRule:
    """``time``: search gets ``scale`` times the measured seeding time.  ``iters``: a fixed neighbor-evaluation count."""

    mode: str = "iters"
    iters: int = 100_000
    scale: float = 1.0

    def __post_init__(self):
        if self.mode not in ("time", "iters"):
            raise ValueError(f"unknown budget mode {self.mode!r}")

    def budget(self, phase1_time: float, share: float = 1.0) -> Budget:
        if self.mode == "time":
            return Budget.seconds(max(0.0, self.scale * phase1_time * share))
        return Budget.evaluations(max(0, round(self.iters * share)))


@dataclass
class Measure:
    """Per-instance indicator frame shared by every run on that instance."""

    bounds: ObjectiveBounds
    hv_scale: float = HV_SCALE

    @classmethod
    def for_instance(cls, inst, seed: int = BOUNDS_SEED) -> Measure:
        return cls(approximate_bounds(inst, np.random.default_rng(seed)))

    @property
    def hv_reference(self) -> np.ndarray:
        return self.bounds.hypervolume_reference(self.hv_scale)

    def hypervolume(self, Y: np.ndarray) -> float:
        ref = self.hv_reference
        return hypervolume_engine(clip_to_reference(Y, ref), ref)

    def r(self, Y: np.ndarray) -> float:
        return r_indicator(Y, RIndicatorConfig(self.bounds.r_reference(), self.bounds.ranges))


def _trace(checkpoints: list[Checkpoint], measure: Measure, offset: float, mode: str) -> list[TracePoint]:
    out = []
    base = None
    for c in checkpoints:
        hv = measure.hypervolume(c.objectives)
        if base is None:
            base = hv
        elapsed = offset + c.elapsed if mode == "time" else float(c.evaluations)
        norm = hv / base if base > 0 else math.nan
        out.append(TracePoint(elapsed, hv, norm, measure.r(c.objectives), c.archive_size))
    return out


# -- variant matrix ------------------------------------------------------------


def _load(instance):
    if isinstance(instance, (str, Path)):
        return read_instance(instance)
    return instance


def _phase_one(inst, seed: int, runs: int, snapshots: Sequence[int] = ()) -> tuple[SeedResult, dict]:
    rng = np.random.default_rng([seed, 1])
    want = set(snapshots)
    taken = {}
    all_runs = []
    archive = None
    for k, (run, archive) in enumerate(seed_runs(inst, runs, rng), start=1):
        all_runs.append(run)
        if k in want:
            taken[k] = ([(np.array(e.y), e.payload) for e in archive.entries()], run.elapsed, run.evaluations)
    entries = [(np.array(e.y), e.payload) for e in archive.entries()]
    return SeedResult(entries, all_runs, all_runs[-1].elapsed, all_runs[-1].evaluations), taken


def _cell(inst, names: Sequence[str], seed: int, rule: BudgetRule, phase1_runs: int | None, fraction: float) -> list[RunRecord]:
    inst = _load(inst)
    measure = Measure.for_instance(inst)
    seeded, _ = _phase_one(inst, seed, phase1_runs or 100 * inst.d)
    records = []
    for name in names:
        spec = variant(name)
        archive = seeded.build_archive(spec.backend, inst.d)
        cfg = spec.config(rule.budget(seeded.elapsed), seed, fraction)
        t0 = time.perf_counter()
        res = spec.run(inst, archive, cfg)
        search_time = time.perf_counter() - t0
        rec = RunRecord(f"{inst.name}/{spec.name}/{seed}", spec.name, inst.name, seed, seeded.elapsed,
                        _trace(res.checkpoints, measure, seeded.elapsed, rule.mode), search_time)
        records.append(rec)
    return records


def pool_width(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, workers)
    try:
        return max(1, int(os.environ.get("MOPLS_THREADS", "1")))
    except ValueError:
        return 1


def run_variant_matrix(instances: Iterable, variants: Sequence[str], seeds: Sequence[int], rule: BudgetRule,
                       phase1_runs: int | None = None, checkpoint_fraction: float = 0.1,
                       workers: int | None = None) -> list[RunRecord]:
    """One record per (instance, variant, seed); variants of a cell share its seeding archive."""
    instances = list(instances)
    names = [variant(v).name for v in variants]
    jobs = [(inst, names, s, rule, phase1_runs, checkpoint_fraction) for inst in instances for s in seeds]
    width = pool_width(workers)
    if width > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(width) as pool:
            parts = list(pool.map(_cell_star, jobs))
    else:
        parts = [_cell(*job) for job in jobs]
    return [r for part in parts for r in part]


def _cell_star(job):
    return _cell(*job)


# -- seeding/search tradeoff -------------------------------------------------------


@dataclass(frozen=True)
class TradeoffSpec:
    max_phase1_runs: int
    fractions: tuple[float, ...] = (1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1)

    def __post_init__(self):
        if self.max_phase1_runs < 1:
            raise ValueError("max_phase1_runs must be positive")
        fr = tuple(self.fractions)
        if not fr or any(not 0 < f <= 1 for f in fr) or list(fr) != sorted(fr, reverse=True):
            raise ValueError("fractions must lie in (0, 1] and be sorted descending")

    def runs(self, fraction: float) -> int:
        return max(1, round(fraction * self.max_phase1_runs))


def run_tradeoff(inst, spec: TradeoffSpec, variant_name: str, seeds: Sequence[int], rule: BudgetRule,
                 checkpoint_fraction: float = 0.1) -> list[RunRecord]:
    """Shift effort from seeding to search at a fixed total budget.

    The total is the cost of the full seeding phase.  A fraction ``f`` keeps
    the first ``f`` share of seeding runs and hands the rest of the budget to
    the search: the remaining wall time, or in ``iters`` mode ``rule.iters``
    scaled by the share of seeding evaluations that were skipped.
    """
    inst = _load(inst)
    vs = variant(variant_name)
    measure = Measure.for_instance(inst)
    records = []
    for seed in seeds:
        prefixes = sorted({spec.runs(f) for f in spec.fractions})
        full, taken = _phase_one(inst, seed, spec.max_phase1_runs, prefixes)
        total_t, total_e = full.elapsed, full.evaluations
        for f in spec.fractions:
            entries, t_k, e_k = taken[spec.runs(f)]
            archive = make_archive(vs.backend, inst.d)
            for y, payload in entries:
                archive.update(y, payload)
            if rule.mode == "time":
                budget = Budget.seconds(max(0.0, total_t - t_k))
            else:
                budget = Budget.evaluations(round(rule.iters * (1 - e_k / total_e)))
            t0 = time.perf_counter()
            res = vs.run(inst, archive, vs.config(budget, seed, checkpoint_fraction))
            search_time = time.perf_counter() - t0
            name = f"{vs.name}@{f:g}"
            records.append(RunRecord(f"{inst.name}/{name}/{seed}", name, inst.name, seed, t_k,
                                     _trace(res.checkpoints, measure, t_k, rule.mode), search_time))
    return records


# -- CSV -------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def format_csv(records: Sequence[RunRecord]) -> str:
    if not records:
        raise ValueError("no records to write")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        for c in r.checkpoints:
            w.writerow([r.run_id, r.variant, r.instance_id, r.seed, _fmt(c.elapsed), _fmt(c.hypervolume),
                        _fmt(c.hv_normalized), _fmt(c.r_indicator), c.archive_size])
    return buf.getvalue()


def emit_csv(records: Sequence[RunRecord], path: str | Path) -> None:
    Path(path).write_text(format_csv(records))


def parse_csv(text: str) -> list[RunRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    records: dict[str, RunRecord] = {}
    for row in rows:
        rid = row["run_id"]
        rec = records.get(rid)
        point = TracePoint(float(row["elapsed_s"]), float(row["hypervolume"]), float(row["hv_normalized"]),
                           float(row["r_indicator"]), int(row["archive_size"]))
        if rec is None:
            rec = records[rid] = RunRecord(rid, row["variant"], row["instance"], int(row["seed"]), point.elapsed)
        rec.checkpoints.append(point)
    return list(records.values())


def read_csv(path: str | Path) -> list[RunRecord]:
    return parse_csv(Path(path).read_text())


# -- summaries ---------------------------------------------------------------------

COLUMN_GETTERS = {
    "hypervolume": lambda p: p.hypervolume,
    "hv_normalized": lambda p: p.hv_normalized,
    "r_indicator": lambda p: p.r_indicator,
    "archive_size": lambda p: float(p.archive_size),
}


def final_values(records: Sequence[RunRecord], variant_name: str, column: str = "hypervolume",
                 instance: str | None = None) -> list[float]:
    get = COLUMN_GETTERS[column]
    return [get(r.final) for r in records
            if r.variant == variant_name and (instance is None or r.instance_id == instance)]


def compare(records: Sequence[RunRecord], a: str, b: str, column: str = "hypervolume",
            instance: str | None = None):
    """Mann-Whitney test on final values of ``column`` for variants ``a`` and ``b``."""
    return mann_whitney_u(final_values(records, a, column, instance), final_values(records, b, column, instance))


def report(records: Sequence[RunRecord]) -> str:
    """Median final indicators per (instance, variant)."""
    groups: dict[tuple[str, str], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.instance_id, r.variant), []).append(r)
    head = f"{'instance':<28} {'variant':<22} {'runs':>4} {'hv_norm':>9} {'hypervolume':>14} {'r_ind':>10} {'size':>8}"
    lines = [head, "-" * len(head)]
    for (inst, var), rs in groups.items():
        f = [r.final for r in rs]
        lines.append(
            f"{inst:<28} {var:<22} {len(rs):>4} {median(p.hv_normalized for p in f):>9.5f} "
            f"{median(p.hypervolume for p in f):>14.6g} {median(p.r_indicator for p in f):>10.5g} "
            f"{median(p.archive_size for p in f):>8g}"
        )
    return "\n".join(lines)
