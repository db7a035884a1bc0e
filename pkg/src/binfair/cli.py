"""Command-line entry point.

Exit codes: 0 ok, 1 parse error, 2 zero optimal NSW (solve without
``--pad-dummies``), 3 valuation class unsupported by ALG, 4 invalid
allocation, 5 oracle budget exceeded, 6 an audit check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

from . import formats
from .audit import audit, run_corpus
from .core import DimensionError, InvalidAllocation, from_mask, value_profile, nsw_of_profile
from .formats import FormatError
from .generators import (
    CubicGraph,
    distinguish_probe,
    gen_apx_reduction,
    gen_envy_gap,
    gen_lower_bound_pair,
    gen_random_xos,
    gen_spectrum,
    independent_set_witness,
    k4,
    lower_bound_params,
    max_independent_set,
    petersen,
    planted_allocation,
)
from .nsw_alg import SolveTrace, maximum_matching, pad_with_dummies, solve
from .oracles import (
    BudgetExceeded,
    MaximinQuery,
    brute_force_nsw_opt,
    brute_force_sw_opt,
    gmms_threshold,
    maximin_share,
)
from .valuations import UnsupportedValuation

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_ZERO_NSW = 2
EXIT_UNSUPPORTED = 3
EXIT_INVALID_ALLOCATION = 4
EXIT_BUDGET = 5
EXIT_AUDIT_FAILED = 6


def _emit(obj: Any, out: str | None) -> None:
    text = formats.dumps(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fail(code: int, message: str, **extra: Any) -> int:
    payload = {"error": message, **extra}
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def cmd_solve(args: argparse.Namespace) -> int:
    inst = formats.load_instance(args.instance)
    padded_from = None
    if args.pad_dummies and any(g is None for g in maximum_matching(inst)):
        padded_from = inst.m
        inst = pad_with_dummies(inst)
    result = solve(inst)
    profile = value_profile(inst, result.allocation)
    payload = {
        "status": result.status,
        "n": inst.n,
        "m": inst.m,
        "bundles": result.allocation.as_lists(),
        "unassigned": sorted(result.allocation.unassigned(inst.m)),
        "completed_bundles": result.completed_allocation.as_lists(),
        "unassigned_policy": "max_bundle",
        "values": list(profile),
        "nsw": nsw_of_profile(profile),
        "sw": sum(profile),
        "query_count": result.trace.total_value_queries,
    }
    if padded_from is not None:
        payload["padded_from_m"] = padded_from
        payload["dummy_goods"] = list(range(padded_from, inst.m))
    _emit(payload, args.out)
    if args.trace:
        formats.write_json(args.trace, result.trace.to_json())
    if args.plot:
        from .plots import plot_trajectory

        plot_trajectory(result.trace, args.plot)
    return EXIT_ZERO_NSW if result.status == "zero_nsw" else EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    inst = formats.load_instance(args.instance)
    alloc = formats.load_allocation(args.allocation)
    trace = SolveTrace.from_json(formats.read_json(args.trace)) if args.trace else None
    report = audit(inst, alloc, trace, budget=args.oracle_budget)
    _emit(report.to_json(), args.out)
    return EXIT_OK if report.passed else EXIT_AUDIT_FAILED


def _graph(name: str) -> CubicGraph:
    if name == "petersen":
        return petersen()
    if name == "k4":
        return k4()
    return CubicGraph.from_json(formats.read_json(name))


def cmd_generate(args: argparse.Namespace) -> int:
    files: dict[str, Any] = {}
    fam = args.family
    if fam == "apx":
        graph = _graph(args.graph)
        tau = args.tau
        inst = gen_apx_reduction(graph, tau)
        files["instance"] = formats.instance_to_json(inst)
        indep = max_independent_set(graph)
        if len(indep) >= tau:
            files["witness"] = formats.allocation_to_json(independent_set_witness(graph, tau, indep))
    elif fam == "envy_gap":
        inst, envy_free, high = gen_envy_gap(args.k)
        files["instance"] = formats.instance_to_json(inst)
        files["P"] = formats.allocation_to_json(envy_free)
        files["N"] = formats.allocation_to_json(high)
    elif fam == "lower_bound":
        p, q = args.p, args.q
        if args.delta is not None:
            p, q = lower_bound_params(args.n, args.delta)
        if p is None or q is None:
            raise FormatError("lower_bound needs --p and --q, or --delta")
        identical, planted = gen_lower_bound_pair(args.n, p, q, args.seed)
        primary = "planted" if args.variant == "planted" else "identical_f"
        files[primary] = formats.instance_to_json(planted if primary == "planted" else identical)
        other = "identical_f" if primary == "planted" else "planted"
        files[other] = formats.instance_to_json(identical if primary == "planted" else planted)
        files["planted_allocation"] = formats.allocation_to_json(planted_allocation(planted))
    elif fam == "random":
        max_set = args.max_set_size if args.max_set_size is not None else args.m
        inst = gen_random_xos(args.n, args.m, args.family_size, max_set, args.seed, args.min_set_size)
        files["instance"] = formats.instance_to_json(inst)
    else:
        files["instance"] = formats.instance_to_json(gen_spectrum(args.n, args.m, args.delta))

    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, obj in files.items():
            path = out / f"{name}.json"
            formats.write_json(path, obj)
            written.append(str(path))
        _emit({"written": written}, None)
    else:
        _emit(next(iter(files.values())), None)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    inst = formats.load_instance(args.instance)
    budget = args.budget
    obj = args.objective
    if obj == "nsw":
        alloc, value = brute_force_nsw_opt(inst, budget)
        payload = {"objective": obj, "bundles": alloc.as_lists(),
                   "values": list(value_profile(inst, alloc)), "nsw": value}
    elif obj == "sw":
        alloc, value = brute_force_sw_opt(inst, budget)
        payload = {"objective": obj, "bundles": alloc.as_lists(),
                   "values": list(value_profile(inst, alloc)), "sw": value}
    elif obj == "mms":
        goods = (
            frozenset(int(g) for g in args.goods.split(",") if g != "")
            if args.goods is not None
            else from_mask((1 << inst.m) - 1)
        )
        parts = args.parts if args.parts is not None else inst.n
        value = maximin_share(inst, MaximinQuery(args.agent, parts, goods), budget)
        payload = {"objective": obj, "agent": args.agent, "parts": parts,
                   "goods": sorted(goods), "value": value}
    else:
        if not args.allocation:
            raise FormatError("--objective gmms needs --allocation")
        alloc = formats.load_allocation(args.allocation)
        agents = [args.agent] if args.agent is not None else list(range(inst.n))
        thresholds = {str(i): gmms_threshold(inst, alloc, i, budget) for i in agents}
        payload = {"objective": obj, "thresholds": thresholds}
    _emit(payload, args.out)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    from .plots import plot_corpus, plot_probe

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = run_corpus(args.count, args.seed)
    fields = [k for k in asdict(rows[0]) if k != "nsw_trajectory"]
    with open(out / "corpus.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for r in rows:
            writer.writerow(asdict(r))
    probe = distinguish_probe(args.probe_n, args.probe_p, args.probe_q, args.seed, args.probe_queries)
    with open(out / "probe.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["cardinality", "band", "queries", "mismatches"])
        writer.writeheader()
        writer.writerows(probe.rows)
    summary = {
        "instances": len(rows),
        "min_nsw_ratio": min(r.nsw_ratio for r in rows),
        "min_sw_ratio": min(r.sw_ratio for r in rows),
        "all_nsw_bounds": all(r.nsw_bound_ok for r in rows),
        "all_sw_bounds": all(r.sw_bound_ok for r in rows),
        "all_counting_bound": all(r.counting_bound_ok for r in rows),
        "all_growth": all(r.growth_ok and r.iteration_bound_ok for r in rows),
        "all_gmms": all(r.gmms_ok for r in rows if r.gmms_ok is not None),
        "gmms_checked": sum(r.gmms_ok is not None for r in rows),
        "probe_bands": probe.band_summary(),
    }
    formats.write_json(out / "summary.json", summary)
    plot_corpus(rows, out / "ratios.png")
    plot_probe(probe, out / "probe.png")
    _emit(summary, None)
    ok = all(v for k, v in summary.items() if k.startswith("all_"))
    return EXIT_OK if ok else EXIT_AUDIT_FAILED


class _Parser(argparse.ArgumentParser):
    # argparse's own status 2 would collide with the zero-NSW exit code
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="binfair", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run ALG on an instance")
    p.add_argument("instance")
    p.add_argument("--pad-dummies", action="store_true",
                   help="add dummy goods when no perfect matching exists")
    p.add_argument("--trace", help="write the per-iteration trace JSON here")
    p.add_argument("--plot", help="write an NSW trajectory PNG here")
    p.add_argument("--out", help="allocation JSON path (default stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="audit an allocation")
    p.add_argument("instance")
    p.add_argument("allocation")
    p.add_argument("--trace", help="solve trace to check growth and iteration bounds")
    p.add_argument("--oracle-budget", type=int, default=None,
                   help="enumeration budget for brute-force checks (0 disables them)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="emit an instance family")
    p.add_argument("family", choices=["apx", "envy_gap", "lower_bound", "random", "spectrum"])
    p.add_argument("--graph", default="petersen", help="petersen, k4 or a graph JSON path")
    p.add_argument("--tau", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--delta", type=float, default=None,
                   help="lower_bound: derive p, q from n; spectrum: window width (integer)")
    p.add_argument("--variant", choices=["planted", "identical"], default="planted")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--family-size", type=int, default=3)
    p.add_argument("--max-set-size", type=int)
    p.add_argument("--min-set-size", type=int, default=1)
    p.add_argument("--out-dir", help="write instance and companion allocations here")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("oracle", help="brute-force optimum or fairness threshold")
    p.add_argument("instance")
    p.add_argument("--objective", choices=["nsw", "sw", "mms", "gmms"], required=True)
    p.add_argument("--agent", type=int)
    p.add_argument("--parts", type=int)
    p.add_argument("--goods", help="comma-separated good indices (default: all)")
    p.add_argument("--allocation")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("report", help="desk-scale study: CSV tables plus figures")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--probe-n", type=int, default=8)
    p.add_argument("--probe-p", type=int, default=2)
    p.add_argument("--probe-q", type=int, default=9)
    p.add_argument("--probe-queries", type=int, default=6400)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "generate" and args.family == "spectrum":
        args.delta = 3 if args.delta is None else int(args.delta)
    if args.command == "oracle" and args.objective == "mms" and args.agent is None:
        args.agent = 0
    try:
        return args.func(args)
    except FormatError as exc:
        return _fail(EXIT_PARSE, str(exc))
    except UnsupportedValuation as exc:
        return _fail(EXIT_UNSUPPORTED, str(exc))
    except (InvalidAllocation, DimensionError) as exc:
        return _fail(EXIT_INVALID_ALLOCATION, str(exc))
    except BudgetExceeded as exc:
        return _fail(EXIT_BUDGET, str(exc), required=exc.required, budget=exc.budget)
    except ValueError as exc:
        return _fail(EXIT_PARSE, str(exc))


if __name__ == "__main__":
    sys.exit(main())
