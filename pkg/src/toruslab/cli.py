"""Command line interface.

    toruslab zoo list
    toruslab analyze --surface clifford --ambient 4 --grid 64x64 --out r.json
    toruslab spectrum --surface bimr --num-eigs 40
    toruslab verify --surface bimr --suite sections
    toruslab variation --surface nonisotropic --direction omega2 --step 1e-3

Exit codes: 0 pass, 2 invariant failure, 3 solver failure, 4 usage error.
"""

from __future__ import annotations

import argparse
import sys

from . import jacobi as jac
from . import report, suites, variation, zoo
from .config import ConfigError, load_config
from .geometry import GeometryError, NotNormalError, evaluate_geometry
from .sections import SectionError

EXIT_PASS, EXIT_INVARIANT, EXIT_SOLVER, EXIT_USAGE = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        shape = tuple(int(p) for p in parts)
    except ValueError:
        raise UsageError(f"invalid grid {text!r}; expected N1xN2") from None
    if len(shape) == 1:
        shape = shape * 2
    if len(shape) != 2 or any(n <= 0 or n % 2 for n in shape):
        raise UsageError(f"invalid grid {text!r}; need two positive even sizes")
    return shape


def _surface_args(p):
    p.add_argument("--surface", required=True, help="zoo surface name (see 'zoo list')")
    p.add_argument("--params", default=None, help="parameter string 'key=value;key=value'")
    p.add_argument("--ambient", type=int, default=None, help="ambient sphere dimension n")
    p.add_argument("--grid", default="64x64", help="grid shape N1xN2 (even)")
    p.add_argument("--config", default=None, help="key = value configuration file")
    p.add_argument("--seed", type=int, default=None, help="override the configured seed")
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.add_argument("--csv", default=None, help="write the check table as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="toruslab", description="Minimal tori in spheres: structure checks, Jacobi spectra, variations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    z = sub.add_parser("zoo", help="list the available surfaces")
    z.add_argument("action", choices=["list"])

    a = sub.add_parser("analyze", help="all suites plus the spectrum")
    _surface_args(a)
    a.add_argument("--representation", choices=["auto", "frame", "penalty"], default="auto")
    a.add_argument("--num-eigs", type=int, default=None)

    s = sub.add_parser("spectrum", help="lowest stability eigenvalues, index and nullity")
    _surface_args(s)
    s.add_argument("--representation", choices=["auto", "frame", "penalty"], default="auto")
    s.add_argument("--num-eigs", type=int, default=None)
    s.add_argument("--export", default=None, help="write (K, M) in the triplet text format")

    v = sub.add_parser("verify", help="run one verification suite")
    _surface_args(v)
    v.add_argument("--suite", choices=list(suites.SUITES) + ["all"], default="all")

    w = sub.add_parser("variation", help="finite-difference second variation along one direction")
    _surface_args(w)
    w.add_argument("--direction", choices=["omega1", "omega2", "zperp", "random"], default="random")
    w.add_argument("--step", type=float, default=None)
    return parser


def _setup(args):
    overrides = {"seed": args.seed} if args.seed is not None else {}
    cfg = load_config(args.config, overrides)
    shape = parse_grid(args.grid)
    imm = zoo.build(args.surface, args.params, args.ambient)
    g = suites.normalized_geometry(imm, shape)
    desc = {
        "name": args.surface,
        "params": args.params or "",
        "ambient": imm.ambient,
        "family": imm.family,
        "hopf_constant_raw": suites._plain(evaluate_geometry(imm, shape=shape).a),
        "coordinate_scale": suites._plain(complex(g.immersion.scale)),
    }
    return cfg, shape, g, desc


def _emit(args, doc):
    if args.out:
        report.write_json(doc, args.out)
    if args.csv:
        report.write_checks_csv(doc, args.csv)


def _print_suites(results):
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}")
        for c in r.checks:
            mark = "ok " if c.passed else "BAD"
            print(f"    {mark} {c.name}: {c.value} {c.relation} {c.limit}")


def cli_run(argv=None) -> tuple[int, dict | None]:
    """Run the CLI; returns the exit code and the report document (if any)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), None
    try:
        return _dispatch(args)
    except (UsageError, zoo.ZooError, ConfigError, variation.VariationError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE, None
    except (jac.SolverError, jac.FrameError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER, None
    except (GeometryError, NotNormalError, SectionError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT, None


def _dispatch(args) -> tuple[int, dict | None]:
    if args.command == "zoo":
        for name, (_, n, text) in zoo.SURFACES.items():
            print(f"{name:14s} S^{n if n else '2m-1'}  {text}")
        return EXIT_PASS, None

    cfg, shape, g, desc = _setup(args)
    if args.command == "spectrum":
        asm = jac.assemble(g, args.representation, sigma=cfg["sigma"], degeneracy_tol=cfg["frame_tol"])
        res = jac.spectrum_auto(
            asm, k=args.num_eigs or cfg["num_eigs"], null_tol=cfg["null_tol"], dense_max_dim=cfg["dense_max_dim"],
            seed=cfg["seed"], iter_tol=cfg["iter_tol"], maxiter=cfg["maxiter"], keep_vectors=False,
        )
        if args.export:
            jac.export_triplets(asm, args.export)
        summ = res.summary()
        doc = report.build_report(desc, shape, cfg, [], summ)
        print(f"index {res.index}  nullity {res.nullity}  lambda1 {res.lambda1:.12g}  ({res.solver}, {res.representation})")
        for value, mult in res.multiplicities:
            print(f"  {value:+.10f} x{mult}")
        _emit(args, doc)
        return EXIT_PASS, doc

    if args.command == "variation":
        V = variation.named_direction(g, args.direction, cfg["seed"])
        rep = variation.second_variation_fd(g, V, args.step or cfg["fd_step"], args.direction)
        res = suites.SuiteResult("variation")
        res.below(f"FD vs -Q along {args.direction}", rep.mismatch, cfg["fd_tol"])
        res.equal("Richardson shrinks mismatch", rep.monotone, True)
        res.info = rep.to_dict()
        doc = report.build_report(desc, shape, cfg, [res], extra={"variation": rep.to_dict()})
        print(f"A''(0) = {rep.fd:.12g}   -Q(V,V) = {rep.prediction:.12g}   mismatch {rep.mismatch:.2e}")
        _emit(args, doc)
        return (EXIT_PASS if res.passed else EXIT_INVARIANT), doc

    if args.command == "verify":
        results = suites.run_suites(g, [args.suite] if args.suite != "all" else "all", cfg)
        spec = None
    else:  # analyze
        results = suites.run_suites(g, "all", cfg, representation=args.representation, num_eigs=args.num_eigs)
    jac_info = next((r.info for r in results if r.name == "jacobi"), None)
    spec = jac_info if jac_info and "index" in jac_info else None
    doc = report.build_report(desc, shape, cfg, results, spec)
    _print_suites(results)
    if spec is not None:
        print(f"index {spec['index']}  nullity {spec['nullity']}  lambda1 {spec['lambda1']:.12g}")
    _emit(args, doc)
    return (EXIT_PASS if doc["passed"] else EXIT_INVARIANT), doc


def main(argv=None) -> int:
    code, _ = cli_run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
