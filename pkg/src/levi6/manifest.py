"""JSON manifests: a structure (frame or PDE), sample points and tolerances.

Example::

    {
      "pde": {"v_x": "-u_y", "v_y": "u_x"},
      "orientation": 1,
      "random": 20,
      "seed": 7,
      "tol": 1e-9
    }

A frame manifest replaces ``pde`` with
``"frame": {"h": [[6 strings] x 4], "complement": [[6 strings] x 2]}`` and
must name its coordinates in ``chart``.  Explicit ``points`` (lists of six
numbers) come first, random points are appended after them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distribution import (
    DEFAULT_TOL,
    FrameSingularError,
    Structure6,
    VectorField,
    levi_form,
    quadratic_values,
)
from .pde_frontend import from_equations
from .scalar_field import Chart, InconclusiveError, sample_points

DEFAULT_RANDOM = 20
KEYS = {"chart", "orientation", "frame", "pde", "points", "random", "seed", "tol"}


class ManifestError(ValueError):
    """The manifest is malformed (a usage error, not a numerical one)."""


@dataclass
class Manifest:
    chart: list | None
    orientation: int
    kind: str  # "frame" or "pde"
    data: dict
    points: list = field(default_factory=list)
    random: int = 0
    seed: int = 0
    tol: float = DEFAULT_TOL

    def echo(self) -> dict:
        out = {"kind": self.kind, self.kind: self.data, "orientation": self.orientation}
        if self.chart is not None:
            out["chart"] = list(self.chart)
        return out


def _require(cond, msg):
    if not cond:
        raise ManifestError(msg)


def _string_rows(rows, count, what):
    _require(isinstance(rows, list) and len(rows) == count,
             f"{what} must be a list of {count} vector fields")
    for r in rows:
        _require(isinstance(r, list) and len(r) == 6 and all(isinstance(t, (str, int, float)) for t in r),
                 f"each field in {what} needs 6 component expressions")
    return [[str(t) for t in r] for r in rows]


def parse_manifest(obj: dict) -> Manifest:
    _require(isinstance(obj, dict), "manifest must be a JSON object")
    unknown = set(obj) - KEYS
    _require(not unknown, f"unknown manifest keys {sorted(unknown)}")
    _require(("frame" in obj) != ("pde" in obj), "exactly one of 'frame' or 'pde' is required")

    chart = obj.get("chart")
    if chart is not None:
        _require(isinstance(chart, list) and len(chart) == 6 and all(isinstance(c, str) for c in chart),
                 "chart must list 6 coordinate names")
        _require(len(set(chart)) == 6, "chart coordinate names must be distinct")
    orientation = obj.get("orientation", 1)
    _require(orientation in (1, -1) and not isinstance(orientation, bool), "orientation must be 1 or -1")

    if "frame" in obj:
        fr = obj["frame"]
        _require(chart is not None, "a frame manifest must name its chart")
        _require(isinstance(fr, dict) and set(fr) == {"h", "complement"},
                 "frame must have exactly the keys 'h' and 'complement'")
        kind, data = "frame", {"h": _string_rows(fr["h"], 4, "frame.h"),
                               "complement": _string_rows(fr["complement"], 2, "frame.complement")}
    else:
        pde = obj["pde"]
        _require(isinstance(pde, dict) and len(pde) == 2, "pde must map two jet variables to expressions")
        kind, data = "pde", {str(k): str(v) for k, v in pde.items()}

    points = obj.get("points", [])
    _require(isinstance(points, list), "points must be a list")
    for p in points:
        _require(isinstance(p, list) and len(p) == 6
                 and all(isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) for x in p),
                 "each point must be 6 finite numbers")
    random = obj.get("random", 0 if points else DEFAULT_RANDOM)
    _require(isinstance(random, int) and not isinstance(random, bool) and random >= 0,
             "random must be a non-negative integer")
    seed = obj.get("seed", 0)
    _require(isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0,
             "seed must be a non-negative integer")
    tol = obj.get("tol", DEFAULT_TOL)
    _require(isinstance(tol, (int, float)) and not isinstance(tol, bool) and 0 < tol < 1,
             "tol must be a number in (0, 1)")
    m = Manifest(chart, int(orientation), kind, data, [list(map(float, p)) for p in points],
                 random, seed, float(tol))
    _require(m.points or m.random, "no sample points: give 'points' or 'random' > 0")
    return m


def load_manifest(path) -> Manifest:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
    return parse_manifest(obj)


def build_structure(m: Manifest) -> Structure6:
    """Parse errors propagate as ParseError / MalformedSystemError."""
    if m.kind == "pde":
        return from_equations(m.data, m.chart, m.orientation)
    chart = Chart(tuple(m.chart), m.orientation)
    h = tuple(VectorField.parse(chart, r) for r in m.data["h"])
    comp = tuple(VectorField.parse(chart, r) for r in m.data["complement"])
    return Structure6(chart, h, comp)


def resolve_points(m: Manifest, s: Structure6) -> np.ndarray:
    """Explicit points, then ``m.random`` random points where the frame and
    the Levi quadratic are defined.  Explicit points are never dropped."""
    explicit = np.array(m.points, dtype=float).reshape(-1, 6)
    if len(explicit):
        bad = ~s.check_frame(explicit, m.tol)
        if bad.any():
            i = int(np.argmax(bad))
            raise FrameSingularError(f"frame is singular or undefined at point {i}: {m.points[i]}")
    if not m.random:
        return explicit
    L = levi_form(s)
    kept = []
    draws, round_ = 0, 0
    while len(kept) < m.random:
        if draws >= 10 * m.random:
            raise InconclusiveError(f"could not find {m.random} valid random points")
        cand = sample_points(m.random, seed=m.seed + 1000003 * round_)
        draws += len(cand)
        round_ += 1
        ok = s.check_frame(cand, m.tol) & np.isfinite(quadratic_values(s, cand, L)).all(axis=1)
        kept.extend(cand[ok][: m.random - len(kept)])
    return np.vstack([explicit, np.array(kept)])
