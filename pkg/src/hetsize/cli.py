"""Command-line front end: file ingestion, subcommands, JSON reports.

Subcommands: check | cstar | size | critval | fixtures | audit.  Every
command emits one machine-readable JSON report on standard output (compact,
key-sorted, hence byte-identical across reruns with the same seed); --pretty
renders a human summary instead.  Wall-clock timings are only included with
--timings so that default reports stay reproducible byte for byte.

Exit codes: 0 success / size-controllable; 2 not size-controllable;
3 identifying assumption violated; 64 usage error; 65 unusable input data;
70 internal consistency breach.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time

import numpy as np

from . import __version__
from .conditions import (
    HetModel,
    check_equivalent_forms,
    check_group_conditions,
    decide_size_controllability,
)
from .critval import smallest_critical_value, verify_size_control
from .errors import (
    DecompositionFailure,
    EquivalenceBreach,
    HetsizeError,
    InvarianceBreach,
    NotControllable,
    ParseError,
    RaggedRows,
)
from .fixtures import design_families, fixture
from .model import WeightScheme, hat_diagnostics, validate_problem
from .random_problems import random_partition, random_problem
from .size_oracle import McConfig, alpha_star, rejection_probability, worst_case_size
from .statistic import c_star, c_star_reduced, invariance_audit, make_context
from .subspaces import analyze_subspaces, orthogonal_decomposition_check
from .tolerances import active_tolerances

SCHEMA_VERSION = "hetsize-report/1"

EXIT_OK = 0
EXIT_NOT_CONTROLLABLE = 2
EXIT_ASSUMPTION = 3
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_BREACH = 70


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want 64
        raise _UsageError(message)


# ------------------------------------------------------------------ ingestion


def load_design(path: str) -> np.ndarray:
    """Load a headerless numeric CSV as an n x k design matrix.

    Raises ParseError with the 1-based row/column of the first bad token and
    RaggedRows when line lengths differ.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise RaggedRows(
                f"{path}: row {lineno} has {len(cells)} cells, expected {width}",
                row=lineno,
            )
        parsed = []
        for col, cell in enumerate(cells, start=1):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise ParseError(
                    f"{path}: row {lineno}, column {col}: not a number: {cell!r}",
                    row=lineno,
                    column=col,
                ) from None
        rows.append(parsed)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def parse_restriction(text: str) -> np.ndarray:
    try:
        return np.asarray([float(c) for c in text.split(",")], dtype=np.float64)
    except ValueError:
        raise ParseError(f"restriction must be a comma-separated number list, got {text!r}") from None


def parse_partition(text: str) -> HetModel:
    try:
        sizes = tuple(int(c) for c in text.split(","))
    except ValueError:
        raise ParseError(f"partition must be comma-separated integers, got {text!r}") from None
    return HetModel(sizes)


def parse_weights_flag(flag: str) -> WeightScheme:
    """Parse hc0|hc1|hc2|hc3|hc4|custom:<path>."""
    flag = flag.strip()
    if flag.lower().startswith("custom:"):
        vec = load_design(flag.split(":", 1)[1]).reshape(-1)
        return WeightScheme("custom", vec)
    return WeightScheme(flag)


# -------------------------------------------------------------- serialization


def to_jsonable(obj):
    """Recursively convert dataclasses/arrays/sets to JSON-ready structures."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, (frozenset, set)):
        return sorted(obj)
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


@dataclasses.dataclass
class RunReport:
    """Envelope around one command's result; serializes losslessly."""

    command: str
    inputs: dict
    seed: int | None
    result: dict
    timings: dict | None = None

    def to_dict(self, include_timings: bool = False) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": "hetsize", "version": __version__},
            "command": self.command,
            "inputs": to_jsonable(self.inputs),
            "seed": self.seed,
            "tolerances": active_tolerances(),
            "result": to_jsonable(self.result),
        }
        if include_timings and self.timings is not None:
            out["timings"] = to_jsonable(self.timings)
        return out


def _render_pretty(d: dict, indent: int = 0) -> str:
    lines = []
    pad = "  " * indent
    for key, val in d.items():
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_render_pretty(val, indent + 1))
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            lines.append(f"{pad}{key}:")
            for item in val:
                lines.append(_render_pretty(item, indent + 1))
        else:
            lines.append(f"{pad}{key}: {val}")
    return "\n".join(lines)


def _emit(report: RunReport, args) -> None:
    payload = report.to_dict(include_timings=getattr(args, "timings", False))
    if getattr(args, "pretty", False):
        print(_render_pretty(payload))
    else:
        print(json.dumps(payload, sort_keys=True, separators=(",", ":")))


# ------------------------------------------------------------------ plumbing


def _add_problem_args(sub, with_weights=False):
    sub.add_argument("--design", help="path to headerless numeric CSV design matrix")
    sub.add_argument("--restriction", help="restriction row, e.g. '1,1'")
    sub.add_argument("--r", type=float, default=0.0, help="right-hand side of R beta = r")
    sub.add_argument("--fixture", help="use a named built-in design instead of files")
    if with_weights:
        sub.add_argument("--weights", default="hc0", help="hc0|hc1|hc2|hc3|hc4|custom:<path>")


def _add_mc_args(sub):
    sub.add_argument("--partition", help="group sizes, e.g. '1,1,1,1' (default: one per observation)")
    sub.add_argument("--samples", type=int, default=McConfig.n_samples)
    sub.add_argument("--restarts", type=int, default=McConfig.n_restarts)
    sub.add_argument("--seed", type=int, default=0)


def _resolve_problem(args):
    if args.fixture:
        if args.design or args.restriction:
            raise _UsageError("--fixture excludes --design/--restriction")
        fx = fixture(args.fixture)
        return fx.problem, {"fixture": fx.name}
    if not args.design or not args.restriction:
        raise _UsageError("need --design and --restriction (or --fixture)")
    X = load_design(args.design)
    R = parse_restriction(args.restriction)
    problem = validate_problem(X, R, args.r)
    return problem, {"design": args.design, "restriction": args.restriction, "r": args.r}


def _resolve_model(args, n: int) -> HetModel:
    model = parse_partition(args.partition) if args.partition else HetModel.per_observation(n)
    model.validate_for(n)
    return model


def _mc_from_args(args) -> McConfig:
    return McConfig(n_samples=args.samples, n_restarts=args.restarts, seed=args.seed)


def _subspace_section(problem) -> dict:
    bundle = analyze_subspaces(problem)
    diag = hat_diagnostics(problem)
    dec = orthogonal_decomposition_check(problem)
    return {
        "n": problem.n,
        "k": problem.k,
        "leverages": diag.h,
        "in_span": diag.in_span,
        "v_weights": bundle.v,
        "index_sets": bundle.index,
        "dims": {
            "span_x": bundle.span_x.dim,
            "m0lin": bundle.m0lin.dim,
            "b": bundle.b.dim,
            "v_sharp": bundle.v_sharp.dim,
            "l_sharp": bundle.l_sharp.dim,
            "b_residual_part": dec.residual_part.dim,
        },
        "standard_basis_in_b": [
            i for i in range(1, problem.n + 1) if bundle.b.contains_basis_vector(i)
        ],
    }


# ---------------------------------------------------------------- subcommands


def _cmd_check(args) -> int:
    t0 = time.perf_counter()
    problem, inputs = _resolve_problem(args)
    model = _resolve_model(args, problem.n) if getattr(args, "partition", None) else None
    report = decide_size_controllability(problem, model)
    result = {
        "conditions": report,
        "subspaces": _subspace_section(problem),
    }
    run = RunReport(
        command="check",
        inputs=inputs | ({"partition": args.partition} if args.partition else {}),
        seed=None,
        result=result,
        timings={"total_s": time.perf_counter() - t0},
    )
    _emit(run, args)
    if report.status == "assumption-violated":
        return EXIT_ASSUMPTION
    return EXIT_OK if report.size_controllable else EXIT_NOT_CONTROLLABLE


def _cmd_cstar(args) -> int:
    t0 = time.perf_counter()
    problem, inputs = _resolve_problem(args)
    scheme = parse_weights_flag(args.weights)
    ctx = make_context(problem, scheme)
    cs = c_star(ctx)
    try:
        reduced = c_star_reduced(ctx)
        reduced_note = None
    except HetsizeError as exc:
        reduced, reduced_note = None, str(exc)
    result = {
        "c_star": cs.value,
        "achieved_at": list(cs.achieved_at),
        "c_star_reduced": reduced,
        "reduced_note": reduced_note,
        "weights": scheme.kind,
    }
    run = RunReport(
        command="cstar",
        inputs=inputs | {"weights": args.weights},
        seed=None,
        result=result,
        timings={"total_s": time.perf_counter() - t0},
    )
    _emit(run, args)
    return EXIT_OK


def _cmd_size(args) -> int:
    t0 = time.perf_counter()
    problem, inputs = _resolve_problem(args)
    scheme = parse_weights_flag(args.weights)
    ctx = make_context(problem, scheme)
    model = _resolve_model(args, problem.n)
    mc = _mc_from_args(args)
    if args.tau_sq:
        tau = np.asarray([float(c) for c in args.tau_sq.split(",")])
        est = rejection_probability(ctx, model, tau, args.crit, mc)
        result = {"rejection_probability": est, "crit": args.crit, "tau_sq": tau}
    else:
        est = worst_case_size(ctx, model, args.crit, mc)
        result = {"size_estimate": est, "crit": args.crit, "partition": model.sizes}
    run = RunReport(
        command="size",
        inputs=inputs
        | {
            "weights": args.weights,
            "crit": args.crit,
            "partition": args.partition,
            "samples": args.samples,
            "restarts": args.restarts,
        },
        seed=args.seed,
        result=result,
        timings={"total_s": time.perf_counter() - t0},
    )
    _emit(run, args)
    return EXIT_OK


def _cmd_critval(args) -> int:
    t0 = time.perf_counter()
    problem, inputs = _resolve_problem(args)
    scheme = parse_weights_flag(args.weights)
    ctx = make_context(problem, scheme)
    model = _resolve_model(args, problem.n)
    mc = _mc_from_args(args)
    try:
        res = smallest_critical_value(ctx, model, args.alpha, mc)
    except NotControllable as exc:
        run = RunReport(
            command="critval",
            inputs=inputs | {"alpha": args.alpha, "partition": args.partition},
            seed=args.seed,
            result={"status": exc.reason, "detail": str(exc)},
            timings={"total_s": time.perf_counter() - t0},
        )
        _emit(run, args)
        return EXIT_ASSUMPTION if exc.reason == "assumption-violated" else EXIT_NOT_CONTROLLABLE
    result: dict = {"critical_value": res}
    if args.verify:
        result["verification"] = verify_size_control(ctx, model, res.c_diamond, args.alpha, mc)
    run = RunReport(
        command="critval",
        inputs=inputs
        | {
            "weights": args.weights,
            "alpha": args.alpha,
            "partition": args.partition,
            "samples": args.samples,
            "restarts": args.restarts,
        },
        seed=args.seed,
        result=result,
        timings={"total_s": time.perf_counter() - t0},
    )
    _emit(run, args)
    return EXIT_OK


def _cmd_fixtures(args) -> int:
    if args.list:
        result = {"designs": design_families()}
    else:
        if not args.name:
            raise _UsageError("fixtures requires --list or --name NAME")
        fx = fixture(args.name)
        result = {
            "name": fx.name,
            "family": fx.family,
            "description": fx.description,
            "X": fx.problem.X,
            "R": fx.problem.R,
            "r": fx.problem.r,
            "expected": fx.expected,
            "live": {
                "conditions": decide_size_controllability(fx.problem),
                "subspaces": _subspace_section(fx.problem),
            },
        }
    run = RunReport(command="fixtures", inputs={"list": args.list, "name": args.name},
                    seed=None, result=result)
    _emit(run, args)
    return EXIT_OK


def _cmd_audit(args) -> int:
    t0 = time.perf_counter()
    if args.fixture:
        problem = fixture(args.fixture).problem
        inputs = {"fixture": args.fixture}
    else:
        rng = np.random.default_rng(args.seed)
        problem = random_problem(rng)
        inputs = {"random_seed": args.seed}
    ctx = make_context(problem)
    rng = np.random.default_rng(args.seed + 1)
    reports = []
    for trial in range(3):
        y = ctx.mu0 + rng.standard_normal(problem.n) * float(rng.uniform(0.5, 2.0))
        reports.append(invariance_audit(ctx, y, trials=args.trials, seed=args.seed + trial))
    forms = check_equivalent_forms(problem)
    group_checks = 0
    for _ in range(5):
        model = random_partition(rng, problem.n)
        g = check_group_conditions(problem, model)
        if g.cond_group.holds != g.cond_group_uncorr.holds:
            raise EquivalenceBreach(
                f"group condition forms disagree for partition {model.sizes}"
            )
        group_checks += 1
    dec = orthogonal_decomposition_check(problem)
    result = {
        "n": problem.n,
        "k": problem.k,
        "invariance": reports,
        "equivalent_forms": forms,
        "group_partitions_checked": group_checks,
        "decomposition": {
            "dim_b": dec.dim_b,
            "residual_dim": dec.residual_part.dim,
            "max_cross_inner": dec.max_cross_inner,
        },
    }
    run = RunReport(command="audit", inputs=inputs, seed=args.seed, result=result,
                    timings={"total_s": time.perf_counter() - t0})
    _emit(run, args)
    return EXIT_OK


# --------------------------------------------------------------------- entry


def _build_parser() -> _Parser:
    parser = _Parser(prog="hetsize", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human summary instead of JSON")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings")
    subs = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def add_parser(name, **kw):
        return subs.add_parser(name, parents=[common], **kw)

    p = add_parser("check", help="size-controllability verdicts and subspace diagnostics")
    _add_problem_args(p)
    p.add_argument("--partition", help="group sizes for the group-heteroskedasticity model")
    p.set_defaults(func=_cmd_check)

    p = add_parser("cstar", help="critical-value lower bound C*")
    _add_problem_args(p, with_weights=True)
    p.set_defaults(func=_cmd_cstar)

    p = add_parser("size", help="worst-case size estimate at a critical value")
    _add_problem_args(p, with_weights=True)
    p.add_argument("--crit", type=float, required=True)
    p.add_argument("--tau-sq", dest="tau_sq",
                   help="evaluate one variance pattern instead of maximizing")
    _add_mc_args(p)
    p.set_defaults(func=_cmd_size)

    p = add_parser("critval", help="smallest size-controlling critical value")
    _add_problem_args(p, with_weights=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--verify", action="store_true",
                   help="re-check the result with an independent seed")
    _add_mc_args(p)
    p.set_defaults(func=_cmd_critval)

    p = add_parser("fixtures", help="built-in worked designs")
    p.add_argument("--list", action="store_true", help="list the design families")
    p.add_argument("--name", help="emit one instance with expected and live diagnostics")
    p.set_defaults(func=_cmd_fixtures)

    p = add_parser("audit", help="invariance and equivalence property suites")
    p.add_argument("--fixture", help="audit a named fixture")
    p.add_argument("--seed", type=int, default=0, help="random problem / transform seed")
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=_cmd_audit)
    return parser


def run_subcommand(argv) -> int:
    """Run one CLI invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EquivalenceBreach, InvarianceBreach, DecompositionFailure) as exc:
        print(f"consistency breach: {exc}", file=sys.stderr)
        return EXIT_BREACH
    except HetsizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run_subcommand(sys.argv[1:]))


if __name__ == "__main__":
    main()
