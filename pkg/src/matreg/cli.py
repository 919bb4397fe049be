"""Command-line front end.

Exit codes: 0 success, 1 failed verification or assertion, 2 invalid
arguments, 3 I/O failure, 4 matrix size below the capacity rule.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import os
import re
import sys
from dataclasses import dataclass, field, fields
from typing import Sequence

from threadpoolctl import threadpool_limits

from .convergence import Thresholds, auto_sizes, counting_checks, remainder_scaling, run_convergence
from .harmonics import harmonic_basis
from .manifolds import MANIFOLDS, UnknownManifoldError
from .matrixify import BRACKET_KINDS, CapacityError, build_matrix_set, required_size
from .verify import DEFAULT_SEED, SUITES, run_suite

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CAPACITY = 4

THREADS_ENV = "MANIFOLD_MATRIX_THREADS"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    manifold: str | None = None
    cutoff: int | None = None
    sizes: tuple[int, ...] | str | None = None
    size: int | None = None
    output: str | None = None
    format: str = "json"
    seed: int = DEFAULT_SEED
    suite: str | None = None
    ns: tuple[int, ...] | None = None
    max_n: int = 12
    kind: str | None = None
    assert_checks: bool = False
    remainder: bool = False
    allow_undersized: bool = False
    tolerances: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {unknown}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.manifold is not None and self.manifold not in MANIFOLDS:
            raise ConfigError(f"unknown manifold {self.manifold!r}; expected one of {sorted(MANIFOLDS)}")
        if self.cutoff is not None and self.cutoff < 1:
            raise ConfigError("cutoff must be a positive integer")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.suite is not None and self.suite not in SUITES + ("all",):
            raise ConfigError(f"unknown suite {self.suite!r}; expected one of {SUITES + ('all',)}")
        if self.kind is not None and self.kind not in BRACKET_KINDS:
            raise ConfigError(f"unknown bracket kind {self.kind!r}")
        if isinstance(self.sizes, tuple):
            if any(s < 1 for s in self.sizes):
                raise ConfigError("sizes must be positive")
            if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
                raise ConfigError("sizes must be strictly increasing")
        if self.ns is not None and min(self.ns) < 2:
            raise ConfigError("Gamma family sizes start at n = 2")
        if self.max_n < 1:
            raise ConfigError("--max-n must be positive")
        allowed = {f.name for f in fields(Thresholds)}
        bad = sorted(set(self.tolerances) - allowed)
        if bad:
            raise ConfigError(f"unknown tolerance names {bad}; expected some of {sorted(allowed)}")


def parse_int_list(text: str) -> tuple[int, ...]:
    """'4,8,16' or '2..16' (inclusive range)."""
    text = text.strip()
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    try:
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise ConfigError(f"empty range {text!r}")
            return tuple(range(lo, hi + 1))
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"expected integers like 4,8,16 or 2..16, got {text!r}") from None


def parse_tolerances(items: Sequence[str]) -> dict:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"tolerance override must be name=value, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"tolerance {name!r} is not a number: {value!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized checks")

    p = argparse.ArgumentParser(prog="matreg", description="Matrix regularization of spheres and S2xS2.")
    sub = p.add_subparsers(dest="command", required=True)

    def manifold_args(sp, cutoff_required=True):
        sp.add_argument("--manifold", required=True, choices=sorted(MANIFOLDS))
        sp.add_argument("--cutoff", type=int, required=cutoff_required)

    b = sub.add_parser("basis", parents=[common], help="write an orthonormal harmonic basis")
    manifold_args(b)

    mx = sub.add_parser("matrixify", parents=[common], help="write unit-norm matrix harmonics")
    manifold_args(mx)
    mx.add_argument("--size", type=int, help="size parameter (default: capacity rule)")
    mx.add_argument("--allow-undersized", action="store_true")

    v = sub.add_parser("verify", parents=[common], help="run an invariant suite")
    v.add_argument("--suite", required=True, help=f"one of {', '.join(SUITES + ('all',))}")
    v.add_argument("--n", dest="ns", default="2..16", help="Gamma sizes, e.g. 2..16 or 2,3,5")
    v.add_argument("--max-n", type=int, default=12, help="largest cutoff for counting checks")

    c = sub.add_parser("converge", parents=[common], help="structure-constant convergence report")
    manifold_args(c)
    c.add_argument("--sizes", default="auto", help="comma list, a..b range, or auto")
    c.add_argument("--kind", choices=BRACKET_KINDS)
    c.add_argument("--assert", dest="assert_checks", action="store_true", help="exit 1 if any check fails")
    c.add_argument("--remainder", action="store_true", help="add Leibniz remainder scaling (s2, s2xs2, s4)")
    c.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="threshold override")

    k = sub.add_parser("counts", parents=[common], help="harmonic counting table")
    k.add_argument("--max-n", type=int, default=12)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    data = {"command": ns.command, "output": ns.output, "format": ns.format, "seed": ns.seed}
    if ns.command in ("basis", "matrixify", "converge"):
        data.update(manifold=ns.manifold, cutoff=ns.cutoff)
    if ns.command == "matrixify":
        data.update(size=ns.size, allow_undersized=ns.allow_undersized)
    if ns.command == "verify":
        data.update(suite=ns.suite, ns=parse_int_list(ns.ns), max_n=ns.max_n)
    if ns.command == "converge":
        sizes = "auto" if ns.sizes.strip() == "auto" else parse_int_list(ns.sizes)
        data.update(
            sizes=sizes,
            kind=ns.kind,
            assert_checks=ns.assert_checks,
            remainder=ns.remainder,
            tolerances=parse_tolerances(ns.tol),
        )
    if ns.command == "counts":
        data.update(max_n=ns.max_n)
    return RunConfig.from_mapping(data)


def _rows_to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, cfg: RunConfig) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_basis(cfg: RunConfig) -> int:
    basis = harmonic_basis(cfg.manifold, cfg.cutoff)
    if cfg.format == "json":
        _emit(basis.dumps(), cfg)
    else:
        rows = []
        for i, md in enumerate(basis.modes):
            deg = "x".join(map(str, md.degree)) if isinstance(md.degree, tuple) else md.degree
            for e, coef in sorted(md.poly.terms.items()):
                rows.append([i, deg, md.label(), " ".join(map(str, e)), repr(coef)])
        _emit(_rows_to_csv(["mode", "degree", "label", "exponents", "coefficient"], rows), cfg)
    return EXIT_OK


def cmd_matrixify(cfg: RunConfig) -> int:
    size = cfg.size or required_size(cfg.manifold, cfg.cutoff)
    mset = build_matrix_set(cfg.manifold, cfg.cutoff, size, extended=False, allow_undersized=cfg.allow_undersized)
    if cfg.format == "json":
        _emit(mset.dumps(), cfg)
    else:
        rows = []
        for i in range(mset.n_in_cutoff):
            mat = mset.matrices[i]
            for r in range(mset.dim):
                for c in range(mset.dim):
                    rows.append([i, mset.modes[i].label(), r, c, repr(float(mat[r, c].real)), repr(float(mat[r, c].imag))])
        _emit(_rows_to_csv(["mode", "label", "row", "col", "real", "imag"], rows), cfg)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    checks = run_suite(cfg.suite, ns=list(cfg.ns or range(2, 17)), seed=cfg.seed, max_n=cfg.max_n)
    failures = [c.to_json() for c in checks if not c.passed]
    if cfg.format == "json":
        payload = {
            "suite": cfg.suite,
            "seed": cfg.seed,
            "passed": not failures,
            "n_checks": len(checks),
            "failures": failures,
            "checks": [c.to_json() for c in checks],
        }
        _emit(json.dumps(payload, indent=1, sort_keys=True), cfg)
    else:
        rows = [[c.suite, c.name, repr(c.value), c.relation, repr(c.tolerance), c.passed] for c in checks]
        _emit(_rows_to_csv(["suite", "check", "value", "relation", "tolerance", "passed"], rows), cfg)
    return EXIT_OK if not failures else EXIT_FAILED


def cmd_converge(cfg: RunConfig) -> int:
    sizes = auto_sizes(cfg.manifold, cfg.cutoff) if cfg.sizes in (None, "auto") else list(cfg.sizes)
    thresholds = Thresholds(**cfg.tolerances)
    report = run_convergence(cfg.manifold, cfg.cutoff, sizes, kind=cfg.kind, thresholds=thresholds)
    payload = report.to_json()
    ok = all(report.checks.values())
    if cfg.remainder and cfg.manifold in ("s2", "s2xs2", "s4"):
        rem = remainder_scaling(cfg.manifold, sizes)
        payload["remainder"] = rem.to_json()
    if cfg.format == "json":
        _emit(json.dumps(payload, indent=1, sort_keys=True), cfg)
    else:
        _emit(report.to_csv(), cfg)
    return EXIT_FAILED if cfg.assert_checks and not ok else EXIT_OK


def cmd_counts(cfg: RunConfig) -> int:
    rows = counting_checks(range(1, cfg.max_n + 1))
    if cfg.format == "json":
        _emit(json.dumps({"rows": rows, "passed": all(r["match"] for r in rows)}, indent=1, sort_keys=True), cfg)
    else:
        _emit(
            _rows_to_csv(
                ["d", "cutoff", "total", "closed_form", "match"],
                [[r["d"], r["cutoff"], r["total"], r["closed_form"], r["match"]] for r in rows],
            ),
            cfg,
        )
    return EXIT_OK if all(r["match"] for r in rows) else EXIT_FAILED


COMMANDS = {
    "basis": cmd_basis,
    "matrixify": cmd_matrixify,
    "verify": cmd_verify,
    "converge": cmd_converge,
    "counts": cmd_counts,
}


def _thread_limit():
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return contextlib.nullcontext()
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return threadpool_limits(limits=n)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = config_from_args(ns)
        with _thread_limit():
            return COMMANDS[cfg.command](cfg)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"minimal admissible size: {exc.required}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ConfigError, UnknownManifoldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
