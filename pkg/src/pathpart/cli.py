"""Command-line entry point: check, solve, oracle, verify, sharpness, reg and gen."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import Graph6Error, PathPartitionError, PreconditionNotMet
from .graphcore import Graph, bits, to_mask
from .instances import PartitionInstance, check_condition, validate_instance
from .outcome import BUDGET, FAILED, FOUND, INFEASIBLE, SolveOutcome

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILS = 2
EXIT_BUDGET = 3
EXIT_FAILED = 4

TAG_EXIT = {FOUND: EXIT_OK, INFEASIBLE: EXIT_FAILS, BUDGET: EXIT_BUDGET, FAILED: EXIT_FAILED}
ROUTES = ("degree", "connectivity", "independent", "spine", "oracle")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as "fails" here
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    k: Optional[int] = None
    eps: Fraction = Fraction(1, 20)
    delta: Fraction = Fraction(1, 10)
    budget: Optional[int] = None
    seed: int = 0
    fmt: str = "json"
    route: Optional[str] = None

    def __post_init__(self):
        if not 0 < self.eps < 1 or not 0 < self.delta < 1:
            raise UsageError("eps and delta must lie strictly between 0 and 1")
        if self.budget is not None and self.budget < 0:
            raise UsageError("budget must be non-negative")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load_graph(path: str) -> Graph:
    text = _read(path).strip().splitlines()
    if not text:
        raise UsageError(f"{path}: empty graph file")
    return Graph.from_graph6(text[0].strip())


def _load_instance(args) -> PartitionInstance:
    """From --instance JSON, or from --graph plus --k/--starts/--sizes."""
    if getattr(args, "instance", None):
        data = json.loads(_read(args.instance))
        return PartitionInstance.from_json(data.get("instance", data))
    if not getattr(args, "graph", None):
        raise UsageError("give --instance or --graph")
    g = _load_graph(args.graph)
    if args.starts is None or args.sizes is None:
        raise UsageError("--graph needs --starts and --sizes")
    k = args.k if args.k is not None else len(args.starts)
    return PartitionInstance(g, k, tuple(args.starts), tuple(args.sizes))


def _emit(payload: dict, fmt: str, text_lines: Sequence[str]) -> None:
    if fmt == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _outcome_lines(out: SolveOutcome) -> list[str]:
    lines = [f"outcome: {out.tag}" + (f" via {out.route}" if out.route else "")]
    if out.partition is not None:
        lines += [f"P{i}: {' '.join(map(str, p))}" for i, p in enumerate(out.partition.paths)]
    if out.step:
        lines.append(f"step: {out.step}")
    if out.detail:
        lines.append(f"detail: {out.detail}")
    if out.certificate:
        lines.append(f"certificate: {out.certificate}")
    return lines


# subcommands ------------------------------------------------------------------


def cmd_check(args, cfg: RunConfig) -> int:
    inst = _load_instance(args)
    problems = validate_instance(inst)
    if problems:
        _emit({"valid": False, "violations": problems}, cfg.fmt, ["invalid instance"] + problems)
        return EXIT_USAGE
    cond = check_condition(inst)
    sig = cond.sigma2 if cond.sigma2 != float("inf") else None
    payload = {"valid": True, "violations": [], "sigma2": sig, "threshold": cond.threshold,
               "margin": None if sig is None else cond.margin, "holds": cond.holds}
    _emit(payload, cfg.fmt, [f"sigma2 = {cond.sigma2}, n + k - 1 = {cond.threshold}, "
                             f"condition {'holds' if cond.holds else 'fails'}"])
    return EXIT_OK if cond.holds else EXIT_FAILS


def _route_solve(inst: PartitionInstance, args, cfg: RunConfig) -> SolveOutcome:
    from .oracle import solve_exact
    from .regkit import ClusterDecomposition, heuristic_partition
    from .spine import DispatchConfig, _small_cut, dispatch_solve, solve_spine
    from .xconnect import solve_low_connectivity
    from .xdegree import solve_low_degree
    from .xindep import solve_large_independent

    decomp = None
    if args.decomposition:
        data = json.loads(_read(args.decomposition))
        decomp = ClusterDecomposition.from_json(data.get("decomposition", data), inst.graph)
    route = cfg.route
    if route is None:
        dc = DispatchConfig(eps=cfg.eps, delta=cfg.delta, decomposition=decomp,
                            fallback_threshold=args.fallback_threshold, oracle_budget=cfg.budget)
        return dispatch_solve(inst, dc)
    try:
        if route == "oracle":
            out = solve_exact(inst, cfg.budget)
        elif route == "degree":
            out = solve_low_degree(inst)
        elif route == "independent":
            out = solve_large_independent(inst, eps=cfg.eps)
        elif route == "connectivity":
            cut = to_mask(args.cut) if args.cut else _small_cut(inst.graph, inst.k, cfg.eps)
            out = solve_low_connectivity(inst, cut)
        else:
            if decomp is None:
                decomp = heuristic_partition(inst.graph, cfg.eps, 6, cfg.delta, seed=cfg.seed)
            out = solve_spine(inst, decomp)
    except PathPartitionError as exc:
        out = SolveOutcome.failed("precondition", str(exc))
    out.route = route
    return out


def cmd_solve(args, cfg: RunConfig) -> int:
    inst = _load_instance(args)
    problems = validate_instance(inst)
    if problems:
        _emit({"valid": False, "violations": problems}, cfg.fmt, ["invalid instance"] + problems)
        return EXIT_USAGE
    out = _route_solve(inst, args, cfg)
    payload = out.route_log() if args.log else out.to_json() | {"route": out.route}
    _emit(payload, cfg.fmt, _outcome_lines(out))
    return TAG_EXIT[out.tag]


def cmd_oracle(args, cfg: RunConfig) -> int:
    from .oracle import solve_exact
    inst = _load_instance(args)
    problems = validate_instance(inst)
    if problems:
        _emit({"valid": False, "violations": problems}, cfg.fmt, ["invalid instance"] + problems)
        return EXIT_USAGE
    out = solve_exact(inst, cfg.budget)
    out.route = "oracle"
    _emit(out.to_json(), cfg.fmt, _outcome_lines(out))
    return TAG_EXIT[out.tag]


def cmd_verify(args, cfg: RunConfig) -> int:
    from .oracle import BatchPolicy, verify_batch
    if cfg.k is None:
        raise UsageError("verify needs --k")
    lines = _read(args.input).splitlines()
    policy = BatchPolicy(budget=cfg.budget, workers=args.workers, require_connected=args.connected)
    report = verify_batch(lines, cfg.k, policy)
    _emit(report.to_json(), cfg.fmt, [
        f"graphs: {report.graphs} ({report.checked_graphs} meet the condition)",
        f"instances: {report.instances}, found {report.found}",
        f"counterexamples: {len(report.counterexamples)}, undecided: {len(report.undecided)}",
        f"parse errors: {len(report.parse_errors)}"])
    if report.counterexamples:
        return EXIT_FAILS
    if report.undecided:
        return EXIT_BUDGET
    return EXIT_OK


def cmd_sharpness(args, cfg: RunConfig) -> int:
    from .oracle import find_sharpness_witness
    k = cfg.k if cfg.k is not None else 3
    try:
        inst = find_sharpness_witness(args.n, k, cfg.budget)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if inst is None:
        _emit({"witness": None}, cfg.fmt, ["no witness found"])
        return EXIT_FAILS
    _emit({"witness": inst.to_json()}, cfg.fmt,
          [f"witness: {inst.graph.to_graph6()} starts {list(inst.starts)} sizes {list(inst.sizes)}"])
    return EXIT_OK


def cmd_reg(args, cfg: RunConfig) -> int:
    from .regkit import Pair, check_eps_regular, check_super_regular, density
    g = _load_graph(args.graph)
    pair = Pair(to_mask(args.left), to_mask(args.right))
    reg = check_eps_regular(g, pair, cfg.eps, mode=args.mode, seed=cfg.seed)
    sup = check_super_regular(g, pair, cfg.eps, cfg.delta, mode=args.mode, seed=cfg.seed)
    d = density(g, pair)
    payload = {"density": [d.numerator, d.denominator], "regular": reg.regular,
               "super_regular": sup.holds, "exact": reg.exact, "mode": args.mode}
    if reg.witness is not None:
        payload["witness"] = [sorted(bits(m)) for m in reg.witness]
    _emit(payload, cfg.fmt, [f"density {float(d):.4f}", f"eps-regular: {reg.regular}",
                             f"super-regular: {sup.holds}" + (f" ({sup.reason})" if sup.reason else "")])
    return EXIT_OK if reg.regular else EXIT_FAILS


def cmd_gen(args, cfg: RunConfig) -> int:
    from . import families
    k = cfg.k if cfg.k is not None else 3
    payload: dict = {}
    try:
        if args.family == "cycle":
            inst, decomp = families.cycle_blowup(args.n, k, cfg.seed, length=args.length,
                                                 eps=cfg.eps, delta=cfg.delta)
            payload["decomposition"] = decomp.to_json()
        elif args.family == "pendant":
            inst = families.pendant_clique(args.n, k, cfg.seed)
        elif args.family == "split":
            inst = families.split_graph(args.n, k, cfg.seed)
        else:
            inst, cut = families.two_cliques_cut(args.n, k, cfg.seed)
            payload["cut"] = sorted(bits(cut))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    payload["instance"] = inst.to_json()
    _emit(payload, cfg.fmt, [inst.graph.to_graph6(), f"starts {list(inst.starts)}", f"sizes {list(inst.sizes)}"])
    return EXIT_OK


# parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--k", type=int)
    common.add_argument("--eps", type=_fraction, default=Fraction(1, 20))
    common.add_argument("--delta", type=_fraction, default=Fraction(1, 10))
    common.add_argument("--budget", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    inst = _Parser(add_help=False)
    inst.add_argument("--graph", help="file holding one graph6 line, or - for stdin")
    inst.add_argument("--instance", help="instance JSON file")
    inst.add_argument("--starts", type=_int_list)
    inst.add_argument("--sizes", type=_int_list)

    parser = _Parser(prog="pathpart", description="Path partitions under a degree-sum condition.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("check", parents=[common, inst], help="validate an instance and report the condition margin")
    p = sub.add_parser("solve", parents=[common, inst], help="route to a construction and print the partition")
    p.add_argument("--route", choices=ROUTES)
    p.add_argument("--decomposition", help="cluster decomposition JSON (as written by gen)")
    p.add_argument("--cut", type=_int_list, help="vertex cut for the connectivity route")
    p.add_argument("--fallback-threshold", type=int, default=12)
    p.add_argument("--log", action="store_true", help="print the full route log")
    sub.add_parser("oracle", parents=[common, inst], help="exact search only")
    p = sub.add_parser("verify", parents=[common], help="sweep a graph6 stream exhaustively")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--connected", action="store_true", help="skip disconnected graphs")
    p = sub.add_parser("sharpness", parents=[common], help="search for a tightness witness")
    p.add_argument("--n", type=int, required=True)
    p = sub.add_parser("reg", parents=[common], help="density and regularity of a vertex pair")
    p.add_argument("--graph", required=True)
    p.add_argument("--left", type=_int_list, required=True)
    p.add_argument("--right", type=_int_list, required=True)
    p.add_argument("--mode", choices=("exact", "witness"), default="exact")
    p = sub.add_parser("gen", parents=[common], help="seeded instance families")
    p.add_argument("--family", choices=("cycle", "pendant", "split", "cut"), default="cycle")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--length", type=int, default=6, help="cycle length for the cycle family")
    return parser


COMMANDS = {"check": cmd_check, "solve": cmd_solve, "oracle": cmd_oracle, "verify": cmd_verify,
            "sharpness": cmd_sharpness, "reg": cmd_reg, "gen": cmd_gen}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig(args.command, k=args.k, eps=args.eps, delta=args.delta, budget=args.budget,
                        seed=args.seed, fmt=args.format, route=getattr(args, "route", None))
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"pathpart: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, KeyError, Graph6Error, PreconditionNotMet, ValueError) as exc:
        print(f"pathpart: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
