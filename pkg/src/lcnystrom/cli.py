"""Command line interface: solve, converge, invariants, moments."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import (DEFAULTS, config_kernels, config_problem, config_surface,
                     levels_from, load_config)
from .convergence import run_convergence
from .correction import write_moment_diagnostics
from .errors import LcnError
from .estimator import build_components
from .invariants import report_table, run_invariants, write_report_csv
from .mesh import write_nodes_csv
from .solver import assemble, p0_fast_path, solve, write_solution_csv


def _common_flags(sub):
    sub.add_argument("--config", type=Path, help="flat key = value file")
    sub.add_argument("--out", type=Path, default=Path("."),
                     help="output directory")
    sub.add_argument("--seed", type=int, help="RNG seed override")
    sub.add_argument("--levels", type=str,
                     help="refinement range a..b (converge only)")
    sub.add_argument("--p", type=int, help="correction degree override")
    sub.add_argument("--q", type=int, help="Gauss points per direction")


def _load(args):
    cfg = load_config(args.config) if args.config else dict(DEFAULTS)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.p is not None:
        cfg["correction.p"] = args.p
    if args.q is not None:
        cfg["quad.q"] = args.q
    if args.levels is not None:
        a, b = args.levels.split("..", 1)
        cfg["levels"] = tuple(range(int(a), int(b) + 1))
    return cfg


def cmd_solve(args):
    cfg = _load(args)
    surface = config_surface(cfg)
    kernels = config_kernels(cfg)
    problem = config_problem(cfg, surface, kernels)
    mesh, nodes, pou, corrector = build_components(
        surface, cfg["mesh.level"], cfg["quad.q"], cfg["correction.p"],
        kernels, theta=cfg["pou.theta"], kappa_scale=cfg["pou.kappa_scale"],
        ramp=cfg["pou.ramp"], moment_accuracy=cfg["moments.accuracy"],
        analytic_flux=cfg["moments.analytic_dl"],
        max_level=cfg["mesh.max_level"])
    if cfg["solver.path"] == "p0_fast":
        system = p0_fast_path(
            surface, mesh, nodes, kernels, problem.f,
            gamma_mode="analytic" if cfg["moments.analytic_dl"] else "numeric")
    else:
        system = assemble(surface, mesh, nodes, pou, kernels, corrector,
                          problem.f)
    solution = solve(system)
    args.out.mkdir(parents=True, exist_ok=True)
    write_solution_csv(solution, args.out / "solution.csv")
    write_nodes_csv(nodes, args.out / "nodes.csv")
    print(f"solved n={nodes.n} level={cfg['mesh.level']} "
          f"p={cfg['correction.p']} q={cfg['quad.q']}")
    print(f"wrote {args.out / 'solution.csv'}")
    return 0


def cmd_converge(args):
    cfg = _load(args)
    problem = config_problem(cfg)
    report = run_convergence(
        problem, levels_from(cfg), p=cfg["correction.p"], q=cfg["quad.q"],
        seed=cfg["seed"], path=cfg["solver.path"], theta=cfg["pou.theta"],
        kappa_scale=cfg["pou.kappa_scale"], ramp=cfg["pou.ramp"],
        moment_accuracy=cfg["moments.accuracy"],
        analytic_flux=cfg["moments.analytic_dl"],
        max_level=cfg["mesh.max_level"])
    args.out.mkdir(parents=True, exist_ok=True)
    report.to_csv(args.out / "convergence.csv")
    print(report.table())
    print(f"wrote {args.out / 'convergence.csv'}")
    return 0


def cmd_invariants(args):
    cfg = _load(args)
    records = run_invariants(cfg, seed=cfg["seed"])
    args.out.mkdir(parents=True, exist_ok=True)
    write_report_csv(records, args.out / "invariants.csv")
    print(report_table(records))
    failed = [r for r in records if not r.passed]
    print(f"{len(records) - len(failed)}/{len(records)} invariants passed")
    return 1 if failed else 0


def cmd_moments(args):
    cfg = _load(args)
    surface = config_surface(cfg)
    kernels = config_kernels(cfg)
    _, nodes, _, corrector = build_components(
        surface, cfg["mesh.level"], cfg["quad.q"], cfg["correction.p"],
        kernels, theta=cfg["pou.theta"], kappa_scale=cfg["pou.kappa_scale"],
        ramp=cfg["pou.ramp"], moment_accuracy=cfg["moments.accuracy"],
        analytic_flux=cfg["moments.analytic_dl"],
        max_level=cfg["mesh.max_level"])
    args.out.mkdir(parents=True, exist_ok=True)
    write_moment_diagnostics(corrector, args.out / "moments.csv")
    print(f"wrote per-node diagnostics for n={nodes.n} nodes to "
          f"{args.out / 'moments.csv'}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="lcnystrom",
        description="Locally corrected Nystrom solver for weakly singular "
                    "surface integral equations")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, fn in [("solve", cmd_solve), ("converge", cmd_converge),
                     ("invariants", cmd_invariants), ("moments", cmd_moments)]:
        sub = subs.add_parser(name)
        _common_flags(sub)
        sub.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except LcnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
