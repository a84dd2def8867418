"""Command-line interface.

Exit codes: 0 success / REDUCIBLE, 1 usage or parse error, 2 NOT_FOUND,
3 verification failure, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass

from . import __version__
from .census import CSV_HEADER, CSV_HEADER_NO_TIMING, METHODS, BudgetExceeded, count_commuting_nilpotent
from .certify import (
    FORMAT_VERSION,
    REDUCIBLE,
    CertificateError,
    bounds_ledger,
    certify,
    formula_dims,
    verify_certificate,
)
from .exactfield import DEFAULT_PRIME, FieldSpec, Mat
from .geomdim import commuting_tangent_dim, nilpotent_commuting_tangent_dim
from .nilcore import MatTuple, algebra_closure, centralizer, simultaneous_centralizer
from .witnesses import SeedExhausted, sample_regular_tuple, witness_json

EXIT_OK, EXIT_USAGE, EXIT_NOT_FOUND, EXIT_VERIFY, EXIT_BUDGET = 0, 1, 2, 3, 4

log = logging.getLogger("commvar")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    subcommand: str
    field: FieldSpec
    seed: int
    budget: int | None
    out: str | None
    verbosity: int


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _config(args) -> RunConfig:
    try:
        field = FieldSpec.rationals() if getattr(args, "exact", False) else FieldSpec.parse(args.field)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return RunConfig(args.cmd, field, args.seed, args.budget, args.out, args.verbose)


def _emit(cfg: RunConfig, text: str):
    if not text.endswith("\n"):
        text += "\n"
    if cfg.out and cfg.out != "-":
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


def _read_json(path: str) -> dict:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _header(cfg: RunConfig, field: FieldSpec | None = None) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "seed": cfg.seed,
        "budget": cfg.budget,
        "field": (field or cfg.field).to_json(),
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_dims(args, cfg: RunConfig) -> int:
    if args.n < 1 or args.r < 1:
        raise UsageError("n and r must be >= 1")
    _emit(cfg, _dump({**_header(cfg), **formula_dims(args.n, args.r).to_json()}))
    return EXIT_OK


def cmd_bounds(args, cfg: RunConfig) -> int:
    _emit(cfg, _dump({**_header(cfg), "bounds": bounds_ledger()}))
    return EXIT_OK


def cmd_certify(args, cfg: RunConfig) -> int:
    if args.n < 2 or args.r < 2:
        raise UsageError("certify needs n, r >= 2")
    budget = cfg.budget if cfg.budget is not None else 16
    cert = certify(args.n, args.r, cfg.field, cfg.seed, budget, exact=args.exact)
    _emit(cfg, _dump(cert.to_json()))
    log.info("%s %s: %s > %s ? -> %s", cert.kind, (args.n, args.r), cert.quantity, cert.threshold, cert.verdict)
    return EXIT_OK if cert.verdict == REDUCIBLE else EXIT_NOT_FOUND


def cmd_verify(args, cfg: RunConfig) -> int:
    obj = _read_json(args.path)
    try:
        ok, message = verify_certificate(obj)
    except CertificateError as exc:
        raise UsageError(str(exc)) from exc
    sys.stderr.write(("verified: " if ok else "verification FAILED: ") + message + "\n")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_count(args, cfg: RunConfig) -> int:
    res = count_commuting_nilpotent(args.n, args.r, args.q, method=args.method, budget=cfg.budget)
    header = CSV_HEADER if args.timing else CSV_HEADER_NO_TIMING
    meta = f"# format_version={FORMAT_VERSION} seed={cfg.seed} field={cfg.field} budget={cfg.budget}"
    _emit(cfg, "\n".join([meta, header, res.csv_row(timing=args.timing)]))
    return EXIT_OK


def cmd_sample(args, cfg: RunConfig) -> int:
    t = sample_regular_tuple(args.n, args.r, cfg.field, cfg.seed)
    params = {"n": args.n, "r": args.r, "seed": cfg.seed, "field": cfg.field.to_json()}
    _emit(cfg, _dump({**_header(cfg), **witness_json("regular-component", params, t)}))
    return EXIT_OK


def _load_tuple(path: str) -> MatTuple:
    obj = _read_json(path)
    try:
        if "mats" in obj:
            return MatTuple.from_json(obj)
        return MatTuple.of(Mat.from_json(obj))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad matrix/tuple JSON: {exc}") from exc


def cmd_centralizer(args, cfg: RunConfig) -> int:
    t = _load_tuple(args.path)
    basis, dim = centralizer(t[0]) if t.r == 1 else simultaneous_centralizer(t)
    _emit(cfg, _dump({
        **_header(cfg, t.field),
        "n": t.n,
        "dim": dim,
        "basis": [m.encoded_entries() for m in basis],
    }))
    return EXIT_OK


def cmd_algebra_dim(args, cfg: RunConfig) -> int:
    t = _load_tuple(args.path)
    alg = algebra_closure(t)
    _emit(cfg, _dump({
        **_header(cfg, t.field),
        "n": t.n,
        "r": t.r,
        "dim": alg.dim,
        "generations": alg.generations,
        "basis": [m.encoded_entries() for m in alg.basis],
    }))
    return EXIT_OK


def cmd_tangent(args, cfg: RunConfig) -> int:
    t = _load_tuple(args.path)
    try:
        dim = nilpotent_commuting_tangent_dim(t) if args.nilpotent else commuting_tangent_dim(t)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(cfg, _dump({
        **_header(cfg, t.field),
        "n": t.n,
        "r": t.r,
        "nilpotent_rows": bool(args.nilpotent),
        "tangent_dim": dim,
    }))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0, help="64-bit seed (default 0)")
    common.add_argument("--field", default=f"fp:{DEFAULT_PRIME}", help="q or fp:<p> (default fp:%(default)s)")
    common.add_argument("--budget", type=_positive, default=None, help="iteration / enumeration cap")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--exact", action="store_true", help="compute over Q with exact rank")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = _Parser(prog="commvar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"commvar {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("dims", parents=[common], help="dimension formulas")
    p.add_argument("n", type=int)
    p.add_argument("r", type=int)
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("bounds", parents=[common], help="known ranges for n_r and n'_r")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("certify", parents=[common], help="search for a reducibility certificate")
    p.add_argument("n", type=int)
    p.add_argument("r", type=int)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", parents=[common], help="re-verify a certificate JSON")
    p.add_argument("path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("count", parents=[common], help="count C_r(N_n)(F_q) by brute force")
    p.add_argument("n", type=_positive)
    p.add_argument("r", type=_positive)
    p.add_argument("q", type=int)
    p.add_argument("--method", choices=METHODS, default="centralizer-pruned")
    p.add_argument("--timing", action="store_true", help="add an elapsed_ms column (output no longer reproducible)")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("sample", parents=[common], help="sample a tuple on the regular component")
    p.add_argument("n", type=_positive)
    p.add_argument("r", type=_positive)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("centralizer", parents=[common], help="centralizer of a matrix (or tuple)")
    p.add_argument("path")
    p.set_defaults(func=cmd_centralizer)

    p = sub.add_parser("algebra-dim", parents=[common], help="dimension of the generated algebra")
    p.add_argument("path")
    p.set_defaults(func=cmd_algebra_dim)

    p = sub.add_parser("tangent", parents=[common], help="tangent space dimension of the commuting scheme")
    p.add_argument("path")
    p.add_argument("--nilpotent", action="store_true", help="add trace-power rows for each entry")
    p.set_defaults(func=cmd_tangent)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    start = time.perf_counter()
    try:
        cfg = _config(args)
        code = args.func(args, cfg)
    except UsageError as exc:
        sys.stderr.write(f"commvar: error: {exc}\n")
        return EXIT_USAGE
    except (BudgetExceeded, SeedExhausted) as exc:
        sys.stderr.write(f"commvar: budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except ValueError as exc:
        sys.stderr.write(f"commvar: error: {exc}\n")
        return EXIT_USAGE
    sys.stderr.write(
        f"commvar {args.cmd}: seed={args.seed} field={cfg.field} "
        f"elapsed_ms={(time.perf_counter() - start) * 1000:.1f}\n"
    )
    return code


if __name__ == "__main__":
    sys.exit(main())
