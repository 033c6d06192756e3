"""levi6 command line.

    levi6 <classify|invariants|check-flat|report> MANIFEST [--tol X] [--seed N]
          [--points N] [--out PATH]

Exit codes: 0 ok (or flat), 1 usage error, 2 degenerate structure, 3 not
flat, 4 numerical failure.  Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .distribution import DEGENERATE, ELLIPTIC, HYPERBOLIC, classify_many, levi_form
from .elliptic import elliptic_invariants
from .hyperbolic import hyperbolic_invariants
from .manifest import ManifestError, build_structure, load_manifest, resolve_points
from .pde_frontend import MalformedSystemError
from .scalar_field import DomainError, InconclusiveError, ParseError, to_text

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE, EXIT_NOT_FLAT, EXIT_NUMERICAL = 0, 1, 2, 3, 4
MIXED = "Mixed"
SCHEMA_ID = "levi6-report/1"
COMMANDS = ("classify", "invariants", "check-flat", "report")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="levi6", description="Classify rank-4 distributions in dimension 6 "
                "and compute their canonical invariants.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("manifest", help="JSON manifest")
    p.add_argument("--tol", type=float, help="relative tolerance (overrides the manifest)")
    p.add_argument("--seed", type=int, help="seed for random sample points")
    p.add_argument("--points", type=int, help="number of random sample points")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


# ---------------------------------------------------------------------------
# report assembly


def _num(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise FloatingPointError("non-finite value in report")
    return 0.0 if x == 0 else x


def _arr(a):
    return np.vectorize(_num, otypes=[float])(np.asarray(a, dtype=float)).tolist()


def _texts(M):
    return [[to_text(e) for e in row] for row in M]


def overall_variant(classes) -> str:
    kinds = {c.variant for c in classes}
    return kinds.pop() if len(kinds) == 1 else MIXED


class Run:
    """The pipeline for one manifest, computed lazily."""

    def __init__(self, manifest, tol=None, seed=None, points=None):
        m = manifest
        if tol is not None:
            if not 0 < tol < 1:
                raise UsageError("--tol must be in (0, 1)")
            m.tol = tol
        if seed is not None:
            if seed < 0:
                raise UsageError("--seed must be non-negative")
            m.seed = seed
        if points is not None:
            if points < 0 or (points == 0 and not m.points):
                raise UsageError("--points must be positive")
            m.random = points
        self.m = m
        self.s = build_structure(m)
        self.points = resolve_points(m, self.s)
        self.L = levi_form(self.s)
        self.classes = classify_many(self.s, self.points, m.tol, self.L)
        self.variant = overall_variant(self.classes)
        self._inv = None

    @property
    def invariants(self):
        if self._inv is None:
            if self.variant == ELLIPTIC:
                self._inv = elliptic_invariants(self.s, self.points, self.m.tol, L=self.L)
            elif self.variant == HYPERBOLIC:
                self._inv = hyperbolic_invariants(self.s, self.points, self.m.tol, L=self.L)
        return self._inv

    def flat(self) -> bool:
        return bool(self.invariants.is_flat())

    # -- JSON -----------------------------------------------------------
    def classification_block(self):
        return [{"index": i, **{k: (_num(v) if k != "variant" else v) for k, v in c.as_dict().items()}}
                for i, c in enumerate(self.classes)]

    def elliptic_block(self):
        inv = self.invariants
        J = inv.J
        chart = self.s.chart
        return {
            "sigma": int(J.sigma),
            "J": {"H": _texts(J.JH), "Q": _texts(J.JQ), "K": _texts(J.K)},
            "J_values": _arr(J.values(chart, self.points)),
            "S": _arr(inv.S_values()),
            "max_S": _num(inv.max_S()),
            "max_N": _num(inv.max_N()),
            "flat": bool(inv.is_flat()),
        }

    def hyperbolic_block(self):
        inv = self.invariants
        sp = inv.split
        S_plus, S_minus = inv.S_values()
        rp, rm = inv.frobenius_residuals()
        mp, mm = inv.max_S()
        return {
            "h_plus": _texts(sp.h_plus),
            "h_minus": _texts(sp.h_minus),
            "q_plus": [to_text(e) for e in sp.q_plus],
            "q_minus": [to_text(e) for e in sp.q_minus],
            "S_plus": _arr(S_plus),
            "S_minus": _arr(S_minus),
            "max_S_plus": _num(mp),
            "max_S_minus": _num(mm),
            "mixed_bracket_residual": _num(inv.mixed_bracket_residual()),
            "frobenius_residual": {"T_plus": _num(rp), "T_minus": _num(rm)},
            "integrable": {"T_plus": bool(rp <= self.m.tol), "T_minus": bool(rm <= self.m.tol)},
            "flat": bool(inv.is_flat()),
        }

    def report(self) -> dict:
        out = {
            "schema": SCHEMA_ID,
            "provenance": {
                "version": __version__,
                "seed": self.m.seed,
                "tol": self.m.tol,
                "random_points": self.m.random,
                "explicit_points": len(self.m.points),
                "manifest": self.m.echo(),
                "frame": self.s.describe(),
            },
            "points": _arr(self.points),
            "classification": self.classification_block(),
            "variant": self.variant,
        }
        if self.variant == ELLIPTIC:
            out["elliptic"] = self.elliptic_block()
        elif self.variant == HYPERBOLIC:
            out["hyperbolic"] = self.hyperbolic_block()
        return out


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# commands


def _variant_exit(run: Run, out) -> int | None:
    if run.variant in (DEGENERATE, MIXED):
        bad = [c.variant for c in run.classes]
        print(f"structure is {run.variant.lower()} on the sample points "
              f"({bad.count(ELLIPTIC)} elliptic, {bad.count(HYPERBOLIC)} hyperbolic, "
              f"{bad.count(DEGENERATE)} degenerate)", file=sys.stderr)
        return EXIT_DEGENERATE
    return None


def cmd_classify(run: Run, out) -> int:
    print(run.variant, file=out)
    for i, c in enumerate(run.classes):
        print(f"  point {i}: {c.variant}  a={c.a:.6g} b={c.b:.6g} c={c.c:.6g} "
              f"disc={c.discriminant:.6g}", file=out)
    code = _variant_exit(run, out)
    return EXIT_OK if code is None else code


def cmd_invariants(run: Run, out) -> int:
    code = _variant_exit(run, out)
    if code is not None:
        print(run.variant, file=out)
        return code
    inv = run.invariants
    print(run.variant, file=out)
    if run.variant == ELLIPTIC:
        J = inv.J
        print(f"  orientation sign sigma = {J.sigma}", file=out)
        print("  J on H (frame e1..e4, column i = J e_i):", file=out)
        for row in _texts(J.JH):
            print("    " + "  ".join(row), file=out)
        print("  J on Q (f1, f2 mod H):", file=out)
        for row in _texts(J.JQ):
            print("    " + "  ".join(row), file=out)
        print("  H-part of J f1, J f2:", file=out)
        for row in _texts(J.K):
            print("    " + "  ".join(row), file=out)
        print(f"  max |S| = {inv.max_S():.6g}", file=out)
        print(f"  max |N| = {inv.max_N():.6g}", file=out)
    else:
        sp = inv.split
        for name, frames in (("H+", sp.h_plus), ("H-", sp.h_minus)):
            print(f"  {name} (frame coefficients):", file=out)
            for v in _texts(frames):
                print("    (" + ", ".join(v) + ")", file=out)
        mp, mm = inv.max_S()
        rp, rm = inv.frobenius_residuals()
        print(f"  max |S+| = {mp:.6g}   max |S-| = {mm:.6g}", file=out)
        print(f"  T+ integrable: {rp <= run.m.tol} (residual {rp:.3g})", file=out)
        print(f"  T- integrable: {rm <= run.m.tol} (residual {rm:.3g})", file=out)
    print(f"  flat: {inv.is_flat()}", file=out)
    return EXIT_OK


def cmd_check_flat(run: Run, out) -> int:
    code = _variant_exit(run, out)
    if code is not None:
        return code
    flat = run.flat()
    print(f"{run.variant}: {'flat' if flat else 'not flat'}", file=out)
    return EXIT_OK if flat else EXIT_NOT_FLAT


def cmd_report(run: Run, out, path=None) -> int:
    text = dumps(run.report())
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return _variant_exit(run, out) or EXIT_OK


NUMERICAL = (np.linalg.LinAlgError, FloatingPointError, DomainError, InconclusiveError,
             ZeroDivisionError, ArithmeticError)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = make_parser().parse_args(argv)
        run = Run(load_manifest(args.manifest), args.tol, args.seed, args.points)
        if args.command == "classify":
            return cmd_classify(run, out)
        if args.command == "invariants":
            return cmd_invariants(run, out)
        if args.command == "check-flat":
            return cmd_check_flat(run, out)
        return cmd_report(run, out, args.out)
    except (UsageError, ManifestError, ParseError, MalformedSystemError) as exc:
        print(f"levi6: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERICAL as exc:
        print(f"levi6: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # the elliptic/hyperbolic pipelines signal conditioning failures as ValueError
        print(f"levi6: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
