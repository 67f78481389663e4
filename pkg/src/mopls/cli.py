"""Command line entry point: ``mopls <command> ...``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from mopls.archive import load_points
from mopls.harness import (
    BOUNDS_SEED,
    COLUMN_GETTERS,
    VARIANTS,
    BudgetRule,
    Measure,
    TradeoffSpec,
    compare,
    final_values,
    format_csv,
    read_csv,
    report,
    run_tradeoff,
    run_variant_matrix,
)
from mopls.problems import generate_mtsp, generate_mtspwp, read_instance, write_instance
from mopls.problems.io import format_instance
from mopls.search import seed_archive


def parse_seeds(text: str) -> list[int]:
    """``"0..9"`` (inclusive) or a comma separated list."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"no seeds in {text!r}")
    return out


def parse_fractions(text: str) -> tuple[float, ...]:
    return tuple(float(f) for f in text.split(",") if f.strip())


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _generate(args, seed: int):
    if args.problem == "mtsp":
        return generate_mtsp(args.n, args.d, seed, args.candidates)
    d1 = args.d1 if args.d1 is not None else 2
    d2 = args.d2 if args.d2 is not None else max(1, args.d - d1)
    return generate_mtspwp(args.n, d1, d2, seed, args.candidates)


def _instances(args) -> list:
    if args.instance:
        return [read_instance(p, args.candidates) for p in args.instance]
    if args.problem is None:
        raise SystemExit("error: give --instance files or --problem/--n/--d to generate instances")
    base = args.instance_seed
    return [_generate(args, base + i) for i in range(args.instances)]


def _rule(args) -> BudgetRule:
    return BudgetRule(args.budget_mode, args.iters, args.budget_scale)


# -- commands -----------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.problem is None:
        raise SystemExit("error: gen needs --problem")
    inst = _generate(args, args.seed)
    if args.out:
        write_instance(inst, args.out)
    else:
        sys.stdout.write(format_instance(inst))
    return 0


def cmd_seed(args) -> int:
    inst = _instances(args)[0]
    runs = args.runs or 100 * inst.d
    res = seed_archive(inst, runs, np.random.default_rng([args.seed, 1]))
    archive = res.build_archive("nd-tree", inst.d)
    _emit(archive.dumps(), args.out)
    print(f"{runs} runs, {len(archive)} points, {res.elapsed:.2f}s", file=sys.stderr)
    return 0


def cmd_run(args) -> int:
    records = run_variant_matrix(_instances(args), args.variants, args.seeds, _rule(args), args.runs,
                                 args.checkpoint_fraction, args.workers)
    _emit(format_csv(records), args.out)
    return 0


def cmd_tradeoff(args) -> int:
    records = []
    for inst in _instances(args):
        spec = TradeoffSpec(args.runs or 100 * inst.d, args.fractions)
        records += run_tradeoff(inst, spec, args.variant, args.seeds, _rule(args), args.checkpoint_fraction)
    _emit(format_csv(records), args.out)
    return 0


def cmd_eval(args) -> int:
    Y = load_points(args.archive)
    inst = read_instance(args.ref_from)
    if Y.shape[1] != inst.d:
        raise SystemExit(f"error: archive has {Y.shape[1]} objectives, instance has {inst.d}")
    m = Measure.for_instance(inst, args.seed)
    lines = [
        f"points       {len(Y)}",
        f"hypervolume  {m.hypervolume(Y)!r}",
        f"r_indicator  {m.r(Y)!r}",
        "reference    " + " ".join(repr(float(v)) for v in m.hv_reference),
    ]
    _emit("\n".join(lines), args.out)
    return 0


def cmd_compare(args) -> int:
    records = read_csv(args.csv)
    a = final_values(records, args.a, args.column, args.instance_id)
    b = final_values(records, args.b, args.column, args.instance_id)
    if len(a) < 3 or len(b) < 3:
        raise SystemExit(f"error: need at least 3 runs per variant (got {len(a)} and {len(b)})")
    res = compare(records, args.a, args.b, args.column, args.instance_id)
    verdict = "significant" if res.p_value < args.alpha else "not significant"
    text = (f"{args.column}: {args.a} median {np.median(a):.6g} (n={len(a)}) vs {args.b} median "
            f"{np.median(b):.6g} (n={len(b)})\nU={res.u:g} p={res.p_value:.4g} "
            f"({'exact' if res.exact else 'normal approx.'}) {verdict} at {args.alpha:g}")
    _emit(text, args.out)
    return 0


def cmd_report(args) -> int:
    _emit(report(read_csv(args.csv)), args.out)
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--budget-mode", choices=["time", "iters"], default="iters",
                        help="search budget: seeding wall time or a fixed evaluation count")
    common.add_argument("--iters", type=int, default=100_000, help="neighbor evaluations per search run in iters mode")
    common.add_argument("--out", help="output file (default stdout)")

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--instance", nargs="+", help="instance file(s)")
    problem.add_argument("--problem", choices=["mtsp", "mtspwp"])
    problem.add_argument("--n", type=int, default=50)
    problem.add_argument("--d", type=int, default=3, help="objective count (MTSPWP: total unless --d1/--d2)")
    problem.add_argument("--d1", type=int)
    problem.add_argument("--d2", type=int)
    problem.add_argument("--candidates", type=int, default=8, help="nearest neighbors per plane")
    problem.add_argument("--instances", type=int, default=1, help="generated instances")
    problem.add_argument("--instance-seed", type=int, default=0, help="seed of the first generated instance")

    experiment = argparse.ArgumentParser(add_help=False)
    experiment.add_argument("--seeds", type=parse_seeds, default=[0], help='e.g. "0..9" or "1,2,5"')
    experiment.add_argument("--runs", type=int, help="seeding local-search runs (default 100*d)")
    experiment.add_argument("--budget-scale", type=float, default=1.0, help="time mode: search time / seeding time")
    experiment.add_argument("--checkpoint-fraction", type=float, default=0.1)

    p = argparse.ArgumentParser(prog="mopls", description="Many-objective Pareto local search benchmarks")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", parents=[common, problem], help="write a random instance")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("seed", parents=[common, problem], help="dump a seeding-phase archive")
    s.add_argument("--runs", type=int)
    s.set_defaults(func=cmd_seed)

    s = sub.add_parser("run", parents=[common, problem, experiment], help="run the variant matrix, write CSV")
    s.add_argument("--variants", type=lambda t: [v for v in t.split(",") if v], default=["MPLS-100"],
                   help=f"comma separated, from {', '.join(VARIANTS)}")
    s.add_argument("--workers", type=int, help="process pool width (default $MOPLS_THREADS or 1)")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("tradeoff", parents=[common, problem, experiment], help="seeding/search budget split")
    s.add_argument("--variant", default="MPLS-100")
    s.add_argument("--fractions", type=parse_fractions, default=TradeoffSpec(1).fractions)
    s.set_defaults(func=cmd_tradeoff)

    s = sub.add_parser("eval", parents=[common], help="indicators of an archive dump")
    s.add_argument("--archive", required=True)
    s.add_argument("--ref-from", required=True, help="instance file defining the reference points")
    s.set_defaults(func=cmd_eval, seed=BOUNDS_SEED)

    s = sub.add_parser("compare", parents=[common], help="Mann-Whitney test between two variants")
    s.add_argument("--csv", required=True)
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--column", choices=sorted(COLUMN_GETTERS), default="hypervolume")
    s.add_argument("--instance-id", help="restrict to one instance")
    s.add_argument("--alpha", type=float, default=0.05)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("report", parents=[common], help="median final indicators per variant")
    s.add_argument("--csv", required=True)
    s.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
