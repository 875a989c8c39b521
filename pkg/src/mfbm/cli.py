"""Command-line interface.

Exit status: 0 on success (including runs that did not converge), 1 for
usage errors, 2 for invalid input, 3 for internal numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from ._indexing import site_tuples
from ._validation import DomainError, NumericalError
from .cbm import exact_moments_classical, log_partition_classical
from .cbm_meanfield import e_project_classical
from .harness import reports_to_csv, reports_to_doc, run_compare, run_sweep
from .modelfile import emit_model, gen_random_model, parse_model
from .qbm import exact_moments_quantum, log_partition_quantum
from .qbm_meanfield import e_project_quantum
from .solver import SolverConfig

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _add_model_source(sp):
    sp.add_argument("--model", help="model file; if omitted a random model is generated")
    sp.add_argument("--kind", choices=("classical", "quantum"), default=None)
    sp.add_argument("--n", type=int, help="site count for generated models")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--scale-h", type=float, default=1.0)
    sp.add_argument("--scale-w", type=float, default=0.1)
    sp.add_argument("--scale-v", type=float, default=0.1)


def _add_solver(sp):
    sp.add_argument("--damping", type=float, default=0.5)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iter", type=int, default=10000)
    sp.add_argument("--restarts", type=int, default=0)


def _add_output(sp):
    sp.add_argument("--format", choices=("csv", "doc"), default="csv")
    sp.add_argument("--out", help="output path (default: stdout)")
    sp.add_argument("--timing", action="store_true", help="include wall time (output no longer reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mfbm", description="Exact and naive mean-field quantities for third-order Boltzmann machines.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="write a seeded random model file")
    gen.add_argument("--kind", choices=("classical", "quantum"), default="classical")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--scale-h", type=float, default=1.0)
    gen.add_argument("--scale-w", type=float, default=0.1)
    gen.add_argument("--scale-v", type=float, default=0.1)
    gen.add_argument("--out")

    for name, help_ in (
        ("exact", "exact log-partition and expectation coordinates"),
        ("meanfield", "naive mean-field (e-projection) solution"),
        ("compare", "exact vs mean-field magnetizations"),
    ):
        sp = sub.add_parser(name, help=help_)
        _add_model_source(sp)
        if name != "exact":
            _add_solver(sp)
        _add_output(sp)

    sw = sub.add_parser("sweep", help="compare across a grid of coupling scales")
    _add_model_source(sw)
    _add_solver(sw)
    sw.add_argument("--grid", required=True, help="comma-separated ascending coupling scales")
    _add_output(sw)
    return parser


def _load(args):
    if args.model:
        if args.kind is not None:
            model = parse_model(args.model)
            if model.kind != args.kind:
                raise DomainError(f"--kind {args.kind} does not match model file kind {model.kind}")
            return model
        return parse_model(args.model)
    if args.n is None:
        raise _UsageError("either --model or --n is required")
    return gen_random_model(args.kind or "classical", args.n, (args.scale_h, args.scale_w, args.scale_v), args.seed)


def _config(args) -> SolverConfig:
    return SolverConfig(
        damping=args.damping, tol=args.tol, max_iter=args.max_iter, restarts=args.restarts, seed=args.seed
    )


def _write(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _g(x) -> str:
    return format(float(x), ".17g")


def _exact_table(model):
    p = model.params
    rows = []
    if model.kind == "classical":
        psi = log_partition_classical(p)
        mom = exact_moments_classical(p)
        rows.append(("psi", "", "", psi))
        for name, order, arr in (("m", 1, mom.m), ("mu", 2, mom.mu), ("iota", 3, mom.iota)):
            for sites, value in zip(site_tuples(p.n, order), arr):
                rows.append((name, " ".join(str(i + 1) for i in sites), "", value))
    else:
        psi = log_partition_quantum(p)
        mom = exact_moments_quantum(p)
        rows.append(("psi", "", "", psi))
        for name, order, arr in (("m", 1, mom.m), ("mu", 2, mom.mu), ("iota", 3, mom.iota)):
            for sites, block in zip(site_tuples(p.n, order), arr):
                for spins in np.ndindex(*block.shape):
                    rows.append((
                        name,
                        " ".join(str(i + 1) for i in sites),
                        " ".join(str(s + 1) for s in spins),
                        block[spins],
                    ))
    return rows


def _emit_rows(header, rows, fmt):
    if fmt == "doc":
        doc = [dict(zip(header, r)) for r in rows]
        return json.dumps({"rows": doc}, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_g(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _cmd_meanfield(args):
    model = _load(args)
    cfg = _config(args)
    if model.kind == "classical":
        coords, report = e_project_classical(model.params, cfg)
        mbar, hbar = coords.values, coords.hbar
        labels = [(i + 1, "") for i in range(model.n)]
        mvals, hvals = list(mbar), list(hbar)
    else:
        coords, report = e_project_quantum(model.params, cfg)
        labels = [(i + 1, s + 1) for i in range(model.n) for s in range(3)]
        mvals, hvals = list(coords.values.ravel()), list(coords.hbar.ravel())
    header = ("site", "spin", "mbar", "hbar", "converged", "iterations", "residual", "divergence")
    rows = [
        (site, spin, float(m), float(h), "true" if report.converged else "false",
         report.iterations, float(report.residual), float(report.objective))
        for (site, spin), m, h in zip(labels, mvals, hvals)
    ]
    if not report.converged:
        print(f"warning: solver did not converge (residual {report.residual:.3e})", file=sys.stderr)
    return _emit_rows(header, rows, args.format)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gen":
            model = gen_random_model(args.kind, args.n, (args.scale_h, args.scale_w, args.scale_v), args.seed)
            _write(emit_model(model), args.out)
        elif args.command == "exact":
            model = _load(args)
            text = _emit_rows(("quantity", "sites", "spins", "value"), _exact_table(model), args.format)
            _write(text, args.out)
        elif args.command == "meanfield":
            _write(_cmd_meanfield(args), args.out)
        elif args.command == "compare":
            reports = [run_compare(_load(args), _config(args))]
            dump = reports_to_doc if args.format == "doc" else reports_to_csv
            _write(dump(reports, args.timing), args.out)
        elif args.command == "sweep":
            try:
                grid = [float(x) for x in args.grid.split(",") if x.strip()]
            except ValueError:
                raise _UsageError(f"--grid must be comma-separated numbers, got {args.grid!r}") from None
            reports = run_sweep(_load(args), grid, _config(args))
            dump = reports_to_doc if args.format == "doc" else reports_to_csv
            _write(dump(reports, args.timing), args.out)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE
    except (DomainError, OSError) as exc:
        print(f"mfbm: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"mfbm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))
