"""Command-line front end.

Exit status: 0 on success, 1 when a checked property fails (an unstable
profile for ``check-ne``, a lemma violation or oracle bound failure for
``verify-lemma``), 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .bounds import DomainError, bounds_table
from .enumeration import (
    DEDUPE_LIMIT,
    GRAPH,
    PROFILE,
    WORKERS_ENV,
    EnumerationSpec,
    default_workers,
    find_equilibria_multi,
)
from .game import (
    DEFAULT_EXACT_CAP,
    EXACT,
    MODES,
    SINGLE_MOVE,
    CapExceeded,
    agent_cost,
    best_response,
    best_response_dynamics,
    format_alpha,
    is_equilibrium,
    parse_alpha,
    social_cost,
    stability_interval,
)
from .graph import INF, NetworkError, biconnected_components, build_network, centroids
from .harness import LEMMAS, VIOLATED, UnknownLemma, counterexample_search, tree_shape, verify_lemma
from .netio import parse_network_file, write_network_file
from .structure import NotFound, cool_path_witness, critical_pairs, min_cycle_through_edge

SCHEMA = 1
COMMANDS = ("analyze", "check-ne", "best-response", "dynamics", "enumerate", "verify-lemma", "search", "bounds")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    inputs: list[str] = field(default_factory=list)
    n: int | None = None
    alphas: tuple[Fraction, ...] = ()
    mode: str | None = None
    seed: int = 0
    workers: int = 1
    fmt: str = "json"
    lemma: str | None = None
    agent: int | None = None
    route: str | None = None
    dedupe: bool | None = None
    trees_only: bool = False
    budget: int = 100
    schedule: str = "round-robin"
    max_rounds: int = 100
    repro_dir: str | None = None

    def __post_init__(self):
        if self.subcommand not in COMMANDS:
            raise UsageError(f"unknown subcommand {self.subcommand!r}")
        if self.workers < 1:
            raise UsageError("--workers must be at least 1")
        if self.mode is not None and self.mode not in MODES:
            raise UsageError(f"--mode must be one of {', '.join(MODES)}")

    @property
    def alpha(self) -> Fraction:
        if len(self.alphas) != 1:
            raise UsageError(f"{self.subcommand} needs exactly one --alpha")
        return self.alphas[0]

    def need_n(self) -> int:
        if self.n is None or self.n < 1:
            raise UsageError(f"{self.subcommand} needs --n >= 1")
        return self.n


def _plain(obj):
    """JSON-ready copy: exact rationals as strings, infinity as ``"inf"``."""
    if obj is INF:
        return "inf"
    if isinstance(obj, Fraction):
        return format_alpha(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _network_json(net) -> dict:
    return {"n": net.n, "bought": [list(e) for e in net.bought_edges]}


def _auto_mode(cfg: RunConfig, n: int) -> str:
    return cfg.mode or (EXACT if n <= DEFAULT_EXACT_CAP else SINGLE_MOVE)


def _interval_json(iv):
    return None if iv is None else [iv[0], iv[1]]


def _load(cfg: RunConfig):
    if len(cfg.inputs) != 1:
        raise UsageError(f"{cfg.subcommand} needs exactly one network file")
    return parse_network_file(cfg.inputs[0])


def cmd_analyze(cfg: RunConfig):
    net = _load(cfg)
    alpha = cfg.alpha
    mode = _auto_mode(cfg, net.n)
    costs = []
    for u in range(net.n):
        c = agent_cost(net, alpha, u)
        costs.append({"agent": u, "creation": c.creation, "distance": c.distance, "total": c.total})
    blocks = []
    for b in biconnected_components(net):
        cycles = [min_cycle_through_edge(net, e, b).as_dict() for e in sorted(b.edges)]
        blocks.append({"vertices": sorted(b.vertices), "edges": [list(e) for e in sorted(b.edges)],
                       "is_cycle": b.is_cycle(), "min_cycles": cycles})
    report = {
        "network": _network_json(net),
        "alpha": alpha,
        "connected": net.is_connected,
        "tree": net.is_tree,
        "costs": costs,
        "social_cost": social_cost(net, alpha),
        "certificate": is_equilibrium(net, alpha, mode).as_dict(),
        "stable_for": _interval_json(stability_interval(net, mode)),
        "biconnected_components": blocks,
        "critical_pairs": [p.as_dict() for p in critical_pairs(net)] if net.is_connected else [],
    }
    if net.is_tree:
        report["centroids"] = list(centroids(net).centroids)
        report["tree_shape"] = tree_shape(net)
    elif blocks and net.is_connected:
        try:
            report["cool_path"] = cool_path_witness(net).as_dict()
        except NotFound as exc:
            report["cool_path"] = {"not_found": exc.step, "detail": exc.detail}
    return 0, report


def cmd_check_ne(cfg: RunConfig):
    net = _load(cfg)
    mode = _auto_mode(cfg, net.n)
    cert = is_equilibrium(net, cfg.alpha, mode)
    report = {"network": _network_json(net), "alpha": cfg.alpha, **cert.as_dict()}
    return (0 if cert.stable else 1), report


def cmd_best_response(cfg: RunConfig):
    net = _load(cfg)
    mode = _auto_mode(cfg, net.n)
    agents = range(net.n) if cfg.agent is None else [cfg.agent]
    out = []
    for u in agents:
        if not 0 <= u < net.n:
            raise UsageError(f"--agent must lie in 0..{net.n - 1}")
        s, c = best_response(net, cfg.alpha, u, mode)
        out.append({"agent": u, "current": sorted(net.strategies[u]), "best": sorted(s),
                    "current_cost": agent_cost(net, cfg.alpha, u).total, "best_cost": c})
    return 0, {"network": _network_json(net), "alpha": cfg.alpha, "mode": mode, "responses": out}


def cmd_dynamics(cfg: RunConfig):
    net = _load(cfg)
    mode = _auto_mode(cfg, net.n)
    traj = best_response_dynamics(net, cfg.alpha, cfg.schedule, cfg.max_rounds, cfg.seed, mode)
    return 0, {
        "start": _network_json(traj.start),
        "final": _network_json(traj.final),
        "alpha": cfg.alpha,
        "mode": mode,
        "schedule": cfg.schedule,
        "seed": cfg.seed,
        "converged": traj.converged,
        "rounds": traj.rounds,
        "steps": [{**s.deviation.as_dict(), "social_cost": s.social_cost} for s in traj.steps],
        "final_social_cost": social_cost(traj.final, cfg.alpha),
    }


def cmd_enumerate(cfg: RunConfig):
    n = cfg.need_n()
    if not cfg.alphas:
        raise UsageError("enumerate needs --alpha")
    mode = cfg.mode or EXACT
    route = cfg.route or (PROFILE if n <= 4 else GRAPH)
    dedupe = cfg.dedupe if cfg.dedupe is not None else (route == GRAPH and n <= DEDUPE_LIMIT)
    spec = EnumerationSpec(n, cfg.alphas, mode, route, dedupe=dedupe, trees_only=cfg.trees_only)
    found = find_equilibria_multi(spec, cfg.workers)
    results = []
    for alpha in spec.alphas:
        recs = found[alpha]
        results.append({
            "alpha": alpha,
            "equilibria": len(recs),
            "non_tree": sum(not r.is_tree for r in recs),
            "profiles": [r.as_dict() for r in recs],
        })
    return 0, {"n": n, "mode": mode, "route": route, "dedupe": dedupe, "trees_only": cfg.trees_only,
               "results": results}


def _slug(alpha: Fraction) -> str:
    return format_alpha(alpha).replace("/", "_")


def cmd_verify_lemma(cfg: RunConfig):
    n = cfg.need_n()
    if not cfg.alphas:
        raise UsageError("verify-lemma needs --alpha")
    mode = cfg.mode or EXACT
    reports = verify_lemma(cfg.lemma, n, cfg.alphas, mode, cfg.route, cfg.dedupe, cfg.workers)
    failed = False
    for rep in reports:
        bad_oracles = [o for o in rep.oracle_outcomes if o.get("bound_holds") is False]
        if rep.status == VIOLATED or bad_oracles:
            failed = True
        if cfg.repro_dir:
            _write_repro(cfg.repro_dir, rep, rep.violations + bad_oracles)
    lemma = LEMMAS[cfg.lemma]
    return (1 if failed else 0), {
        "lemma": cfg.lemma,
        "statement": lemma.statement,
        "n": n,
        "threshold": lemma.threshold_value(n),
        "reports": [r.as_dict() for r in reports],
    }


def _write_repro(directory: str, rep, records: list[dict]) -> None:
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    for i, rec in enumerate(records):
        net = build_network(rep.n, [tuple(e) for e in rec["bought"]])
        target = path / f"{rep.lemma}-n{rep.n}-a{_slug(rep.alpha)}-{i}.net"
        write_network_file(target, net)
        extra = json.dumps(_plain({k: v for k, v in rec.items() if k != "bought"}), sort_keys=True)
        with open(target, "a") as fh:
            fh.write(f"# lemma {rep.lemma} alpha {format_alpha(rep.alpha)}\n# {extra}\n")


def cmd_search(cfg: RunConfig):
    n = cfg.need_n()
    res = counterexample_search(n, cfg.alpha, cfg.budget, cfg.mode or SINGLE_MOVE, cfg.seed, cfg.max_rounds)
    return 0, res.as_dict()


def cmd_bounds(cfg: RunConfig):
    return 0, bounds_table(cfg.need_n(), cfg.alpha).as_dict()


HANDLERS = {
    "analyze": cmd_analyze,
    "check-ne": cmd_check_ne,
    "best-response": cmd_best_response,
    "dynamics": cmd_dynamics,
    "enumerate": cmd_enumerate,
    "verify-lemma": cmd_verify_lemma,
    "search": cmd_search,
    "bounds": cmd_bounds,
}


def run(cfg: RunConfig) -> tuple[int, dict]:
    status, report = HANDLERS[cfg.subcommand](cfg)
    return status, {"schema": SCHEMA, "command": cfg.subcommand, **_plain(report)}


def render_text(obj, indent: int = 0) -> str:
    """Aligned ``key: value`` lines; nested objects are indented."""
    pad = " " * indent
    lines = []
    if isinstance(obj, dict):
        width = max((len(k) for k in obj), default=0)
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.append(render_text(v, indent + 2))
            else:
                lines.append(f"{pad}{k.ljust(width)}  {_scalar(v)}")
    elif isinstance(obj, list):
        for item in obj:
            if isinstance(item, (dict, list)) and not _flat(item):
                lines.append(f"{pad}-")
                lines.append(render_text(item, indent + 2))
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    else:
        lines.append(pad + _scalar(obj))
    return "\n".join(lines)


def _flat(v) -> bool:
    if isinstance(v, list):
        return all(_flat(x) if isinstance(x, list) else
                   not isinstance(x, dict) and not (isinstance(x, str) and " " in x) for x in v)
    return False


def _scalar(v) -> str:
    if isinstance(v, list):
        return " ".join(_scalar(x) if not isinstance(x, list) else "(" + " ".join(map(str, x)) + ")" for x in v) or "-"
    if isinstance(v, dict):
        return "{}"
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def _alpha_list(text: str) -> list[Fraction]:
    try:
        return [parse_alpha(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=_alpha_list, action="append", default=[],
                        help="edge price as p/q or a decimal; comma lists and repeats allowed")
    common.add_argument("--n", type=int, help="number of agents")
    common.add_argument("--mode", choices=MODES, help="deviation space (default: exact when feasible)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=None,
                        help=f"parallel workers (default from ${WORKERS_ENV}, else 1)")
    common.add_argument("--format", dest="fmt", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(prog="ncgame", description="Exact analysis of the sum network creation game.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in ("analyze", "check-ne"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("network")
    p = sub.add_parser("best-response", parents=[common])
    p.add_argument("network")
    p.add_argument("--agent", type=int)
    p = sub.add_parser("dynamics", parents=[common])
    p.add_argument("network")
    p.add_argument("--schedule", choices=("round-robin", "seeded-random"), default="round-robin")
    p.add_argument("--max-rounds", type=int, default=100)
    p = sub.add_parser("enumerate", parents=[common])
    p.add_argument("--route", choices=(PROFILE, GRAPH))
    p.add_argument("--no-dedupe", dest="dedupe", action="store_false", default=None)
    p.add_argument("--trees-only", action="store_true")
    p = sub.add_parser("verify-lemma", parents=[common])
    p.add_argument("lemma", choices=sorted(LEMMAS))
    p.add_argument("--route", choices=(PROFILE, GRAPH))
    p.add_argument("--no-dedupe", dest="dedupe", action="store_false", default=None)
    p.add_argument("--repro-dir", help="write violating profiles here as network files")
    p = sub.add_parser("search", parents=[common])
    p.add_argument("--budget", type=int, default=100)
    p.add_argument("--max-rounds", type=int, default=50)
    sub.add_parser("bounds", parents=[common])
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    alphas = tuple(a for group in ns.alpha for a in group)
    kwargs = dict(
        subcommand=ns.subcommand,
        inputs=[ns.network] if getattr(ns, "network", None) else [],
        n=ns.n,
        alphas=alphas,
        mode=ns.mode,
        seed=ns.seed,
        workers=ns.workers if ns.workers is not None else default_workers(),
        fmt=ns.fmt,
    )
    for key in ("lemma", "agent", "route", "dedupe", "trees_only", "budget", "schedule", "max_rounds", "repro_dir"):
        if hasattr(ns, key):
            kwargs[key] = getattr(ns, key)
    return RunConfig(**kwargs)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        if cfg.subcommand == "search" and cfg.budget < 0:
            raise UsageError("--budget must be non-negative")
        status, report = run(cfg)
    except (UsageError, NetworkError, CapExceeded, DomainError, UnknownLemma, ValueError, OSError) as exc:
        print(f"ncgame {ns.subcommand}: error: {exc}", file=sys.stderr)
        return 2
    if cfg.fmt == "json":
        print(json.dumps(report, indent=2))
    else:
        print(render_text(report))
    return status


if __name__ == "__main__":
    sys.exit(main())
