"""Command line front end.

    multinorms compute --instance F --norm hilbert [--restarts R --seed S --tol T] [--json]
    multinorms verify --suite axioms [--seed S --tol T --restarts R --cases C] [--json]
    multinorms report --out F --format json|csv [--input F]   (reads stdin by default)
    multinorms search-gap [--dim 3 --n 4 --trials 50 --seed S]

Exit codes: 0 success, 1 a property was violated, 2 bad input, 3 unsupported combination.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import norms as N
from .instances import InstanceError, load_instance
from .optimize import OptimizerConfig
from .report import from_json, to_csv, to_json
from .suites import SUITES, SuiteOptions, search_gap

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_UNSUPPORTED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multinorms", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="evaluate one norm on an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--norm", required=True, choices=sorted(N.NORMS))
    p.add_argument("--restarts", type=_positive_int)
    p.add_argument("--seed", type=_nonneg_int)
    p.add_argument("--tol", type=_positive_float, help="objective convergence tolerance")
    p.add_argument("--json", action="store_true", help="print the result document instead of text")

    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("--suite", required=True, choices=sorted(SUITES))
    v.add_argument("--seed", type=_nonneg_int, default=0)
    v.add_argument("--tol", type=_positive_float, help="relative tolerance for optimizer comparisons")
    v.add_argument("--restarts", type=_positive_int)
    v.add_argument("--cases", type=_nonneg_int)
    v.add_argument("--json", action="store_true")

    r = sub.add_parser("report", help="serialize a result document read from stdin or --input")
    r.add_argument("--out", required=True)
    r.add_argument("--format", choices=["json", "csv"], default="json")
    r.add_argument("--input", help="result document (defaults to stdin)")

    g = sub.add_parser("search-gap", help="look for tuples where the (2,2) multi-norm exceeds the Hilbert one")
    g.add_argument("--dim", type=_positive_int, default=3)
    g.add_argument("--n", type=_positive_int, default=4)
    g.add_argument("--trials", type=_positive_int, default=50)
    g.add_argument("--seed", type=_nonneg_int, default=0)
    g.add_argument("--restarts", type=_positive_int)
    g.add_argument("--json", action="store_true")
    return parser


def _cfg(args, base: OptimizerConfig) -> OptimizerConfig:
    changes = {}
    if getattr(args, "restarts", None):
        changes["restarts"] = args.restarts
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "tol", None):
        changes["obj_tol"] = args.tol
    return base.with_(**changes)


def _certificate_summary(cert) -> str:
    if isinstance(cert, N.SpectralWitness):
        return f"spectral witness in block {cert.block}"
    if isinstance(cert, N.SlotWitness):
        return f"single slot {cert.index}"
    if isinstance(cert, N.ProjectionFamily):
        ranks = [[int(round(b.trace().real)) for b in P.blocks] for P in cert.projections]
        return f"projection family, ranks per block {ranks}"
    if isinstance(cert, N.DualTuple):
        return f"dual tuple of length {len(cert.y)}, mu_star {N.mu_star(cert.y).value:.12g}"
    if isinstance(cert, N.LocalizedFamily):
        ranks = [int(round(P.trace().real)) for P in cert.projections]
        return f"pure state on block {cert.state.block}, localized family ranks {ranks}"
    return type(cert).__name__


def cmd_compute(args) -> int:
    try:
        inst = load_instance(args.instance)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _cfg(args, inst.config())
    try:
        est = N.NORMS[args.norm](inst.tuple, cfg)
    except N.UnsupportedShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    doc = {
        "command": "compute",
        "norm": args.norm,
        "instance": str(args.instance),
        "cfg": cfg.to_dict(),
        "cases": [{"index": 0, **est.summary()}],
    }
    if args.json:
        sys.stdout.write(to_json(doc))
        return EXIT_OK
    print(f"norm:        {args.norm}")
    print(f"value:       {est.value:.12g}")
    print(f"kind:        {est.kind}")
    print(f"bounds:      [{est.lower:.12g}, {est.upper:.12g}]")
    print(f"certificate: {_certificate_summary(est.certificate)}")
    print("effort:      " + (", ".join(f"{k}={v}" for k, v in est.effort.items()) or "none"))
    return EXIT_OK


def cmd_verify(args) -> int:
    opts = SuiteOptions(seed=args.seed, tol=args.tol, restarts=args.restarts, cases=args.cases)
    result = SUITES[args.suite](opts)
    if args.json:
        sys.stdout.write(to_json(result.to_dict()))
    else:
        for case in result.cases:
            status = "PASS" if case.passed else "FAIL"
            print(f"[{status}] case {case.index}: {case.label} ({case.seconds:.2f}s)")
            for c in case.checks:
                if not c.passed:
                    detail = ", ".join(f"{k}={v}" for k, v in c.detail.items())
                    print(f"    violated {c.name}: {detail}")
        print(f"{args.suite}: {sum(c.passed for c in result.cases)}/{len(result.cases)} cases passed")
    return EXIT_OK if result.passed else EXIT_VIOLATION


def cmd_report(args) -> int:
    try:
        text = Path(args.input).read_text() if args.input else sys.stdin.read()
        doc = from_json(text)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read result document: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not isinstance(doc, dict) or "cases" not in doc:
        print("error: result document must be an object with a 'cases' list", file=sys.stderr)
        return EXIT_INPUT
    body = to_json(doc) if args.format == "json" else to_csv(doc)
    try:
        Path(args.out).write_text(body)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def cmd_search_gap(args) -> int:
    cfg = OptimizerConfig(seed=args.seed)
    if args.restarts:
        cfg = cfg.with_(restarts=args.restarts)
    doc = search_gap(args.dim, args.n, args.trials, args.seed, cfg)
    if args.json:
        sys.stdout.write(to_json(doc))
    else:
        best = doc["best"]
        print(f"best relative gap over {args.trials} trials in C^{args.dim}, n={args.n}: {best['gap']:.6g}")
        print(f"  trial {best['trial']}: hilbert {best['hilbert']:.12g}, two-two {best['two_two']:.12g}")
    return EXIT_OK


COMMANDS = {"compute": cmd_compute, "verify": cmd_verify, "report": cmd_report, "search-gap": cmd_search_gap}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
