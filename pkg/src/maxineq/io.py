"""Loading of domain, ambient, generator, scenario and cover documents.

Documents are YAML (JSON is accepted, being a subset).  Numbers may be
written as arithmetic expressions in ``pi`` and ``phi``, e.g. ``3*pi``.
"""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .capacity import RatioReport, invariant_C_concave, invariant_C_ellipsoid, invariant_C_table, invariant_C_upper_convex
from .cover_bounds import CoverDescription, CoverSet
from .errors import InputError
from .reeb_domains import (
    SPHERE_KAPPA,
    SPHERE_MIN_CHERN,
    Ellipsoid,
    SphereDisk,
    SpectrumTable,
    ToricProfile,
    concave_toric_surrogates,
    convex_toric_surrogates,
    ellipsoid_orbits,
    explicit_table,
    simplex_inclusion_capacity,
)
from .relative_spectrum import AmbientModel
from .sympath import SymmetricGenerator

_CONSTANTS = {"pi": math.pi, "phi": (1 + math.sqrt(5)) / 2, "e": math.e}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def number(x: Any) -> float:
    """A float from a number or a small arithmetic expression."""
    if isinstance(x, bool):
        raise InputError(f"expected a number, got {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    if not isinstance(x, str):
        raise InputError(f"expected a number, got {x!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _CONSTANTS:
            return _CONSTANTS[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sqrt" \
                and len(node.args) == 1:
            return math.sqrt(ev(node.args[0]))
        raise InputError(f"unsupported expression {x!r}")

    try:
        return float(ev(ast.parse(x.strip(), mode="eval")))
    except (SyntaxError, ZeroDivisionError, ValueError) as exc:
        raise InputError(f"cannot read number {x!r}") from exc


def numbers(xs: Any) -> list[float]:
    if not isinstance(xs, (list, tuple)):
        raise InputError(f"expected a list of numbers, got {xs!r}")
    return [number(x) for x in xs]


def matrix(m: Any) -> np.ndarray:
    if not isinstance(m, (list, tuple)) or not all(isinstance(r, (list, tuple)) for r in m):
        raise InputError("expected a matrix as a list of rows")
    return np.array([numbers(r) for r in m], dtype=float)


def load_document(path: str | Path) -> dict:
    """Parse a YAML or JSON file into a mapping."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {p}: {exc.strerror}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InputError(f"{p} is not valid YAML/JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{p} must contain a mapping at top level")
    return doc


def _get(doc: dict, key: str, where: str):
    if key not in doc:
        raise InputError(f"{where}: missing field {key!r}")
    return doc[key]


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Domain:
    """A parsed domain together with the model object behind it."""

    kind: str
    model: Any
    name: str = ""

    @property
    def n(self) -> int:
        if self.kind == "sphere_disk":
            return 1
        return self.model.n

    @property
    def scale(self) -> float:
        """A natural action scale used for default cutoffs."""
        if self.kind == "ellipsoid":
            return self.model.a[0]
        if self.kind in ("convex_toric", "concave_toric"):
            return simplex_inclusion_capacity(self.model)
        if self.kind == "sphere_disk":
            return self.model.area
        return max([1.0] + self.model.actions)

    def default_cutoff(self) -> float:
        if self.kind == "explicit":
            return self.model.cutoff
        if self.kind == "convex_toric":
            return 3.0 * max(max(v) for v in self.model.vertices)
        return 3.0 * self.scale

    def table(self, T: float | None = None) -> SpectrumTable:
        T = self.default_cutoff() if T is None else float(T)
        if self.kind == "ellipsoid":
            return ellipsoid_orbits(self.model, T)
        if self.kind == "convex_toric":
            return convex_toric_surrogates(self.model, T)
        if self.kind == "concave_toric":
            return concave_toric_surrogates(self.model, T)
        if self.kind == "explicit":
            return explicit_table(self.model.n, self.model.orbits, min(T, self.model.cutoff))
        raise InputError("sphere disks are handled by their own rule")

    def invariant_c(self, T: float | None = None) -> RatioReport:
        if self.kind == "ellipsoid":
            return invariant_C_ellipsoid(self.model)
        if self.kind == "convex_toric":
            return invariant_C_upper_convex(self.model, T)
        if self.kind == "concave_toric":
            return invariant_C_concave(self.model, T)
        if self.kind == "explicit":
            return invariant_C_table(self.table(T))
        raise InputError("the invariant C is not defined for sphere disks")


def parse_domain(doc: dict, name: str = "") -> Domain:
    """Build a :class:`Domain` from ``{kind: ..., ...}``.

    Kinds: ``ellipsoid`` (``a``), ``convex_toric`` / ``concave_toric``
    (``vertices``), ``sphere_disk`` (``area``) and ``explicit`` (``n``,
    ``orbits``, optional ``cutoff``).
    """
    if "domain" in doc and isinstance(doc["domain"], dict):
        doc = doc["domain"]
    kind = _get(doc, "kind", "domain")
    name = str(doc.get("name", name))
    if kind == "ellipsoid":
        return Domain(kind, Ellipsoid(numbers(_get(doc, "a", "ellipsoid"))), name)
    if kind in ("convex_toric", "concave_toric"):
        verts = [numbers(v) for v in _get(doc, "vertices", kind)]
        return Domain(kind, ToricProfile(verts, kind.split("_")[0]), name)
    if kind == "sphere_disk":
        return Domain(kind, SphereDisk(number(_get(doc, "area", kind))), name)
    if kind == "explicit":
        rows = _get(doc, "orbits", kind)
        if not isinstance(rows, list):
            raise InputError("explicit: orbits must be a list")
        cutoff = number(doc["cutoff"]) if "cutoff" in doc else None
        try:
            tbl = explicit_table(int(_get(doc, "n", kind)), rows, cutoff)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"explicit: bad orbit row ({exc})") from exc
        return Domain(kind, tbl, name)
    raise InputError(f"unknown domain kind {kind!r}")


# ---------------------------------------------------------------------------
# ambients
# ---------------------------------------------------------------------------
def parse_ambient(spec: Any) -> AmbientModel:
    """Ambient from a mapping or an inline string.

    Inline forms: ``aspherical``, ``rational:KAPPA``,
    ``monotone:KAPPA[:MIN_CHERN]`` and ``sphere`` (the unit-area sphere).
    """
    if isinstance(spec, str):
        parts = spec.strip().split(":")
        kind = parts[0]
        if kind == "sphere" and len(parts) == 1:
            return AmbientModel.monotone(SPHERE_KAPPA, SPHERE_MIN_CHERN)
        if kind == "aspherical" and len(parts) == 1:
            return AmbientModel.aspherical()
        if kind == "rational" and len(parts) == 2:
            return AmbientModel.rational(number(parts[1]))
        if kind == "monotone" and len(parts) in (2, 3):
            return AmbientModel.monotone(number(parts[1]), int(parts[2]) if len(parts) == 3 else 1)
        raise InputError(f"cannot read ambient {spec!r}")
    if not isinstance(spec, dict):
        raise InputError("ambient must be a mapping or an inline string")
    kind = _get(spec, "kind", "ambient")
    if kind == "aspherical":
        return AmbientModel.aspherical()
    if kind == "sphere":
        return AmbientModel.monotone(SPHERE_KAPPA, SPHERE_MIN_CHERN)
    if kind == "rational":
        return AmbientModel.rational(number(_get(spec, "kappa", "ambient")))
    if kind == "monotone":
        return AmbientModel.monotone(number(_get(spec, "kappa", "ambient")), int(spec.get("min_chern", 1)))
    raise InputError(f"unknown ambient kind {kind!r}")


def resolve_ambient(arg: str | None, doc: dict | None = None) -> AmbientModel | None:
    """Ambient from a ``--ambient`` argument (file path or inline) or the document."""
    if arg:
        p = Path(arg)
        if p.suffix.lower() in (".yaml", ".yml", ".json") or p.is_file():
            d = load_document(p)
            return parse_ambient(d.get("ambient", d))
        return parse_ambient(arg)
    if doc is not None and "ambient" in doc:
        return parse_ambient(doc["ambient"])
    return None


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------
def parse_generator(doc: dict) -> SymmetricGenerator:
    """Generator from ``{kind: rotation|constant|polynomial|samples|shear|direct_sum, ...}``."""
    if "generator" in doc and isinstance(doc["generator"], dict):
        doc = doc["generator"]
    kind = _get(doc, "kind", "generator")
    T = number(doc.get("T", 1.0))
    if kind == "rotation":
        return SymmetricGenerator.rotation(number(_get(doc, "theta", kind)), T)
    if kind == "shear":
        return SymmetricGenerator.shear(number(_get(doc, "b", kind)), T)
    if kind == "constant":
        return SymmetricGenerator.constant(matrix(_get(doc, "matrix", kind)), T)
    if kind == "polynomial":
        cs = [matrix(c) for c in _get(doc, "coefficients", kind)]
        if not cs or any(c.shape != cs[0].shape for c in cs):
            raise InputError("polynomial coefficients must be matrices of one shape")
        return SymmetricGenerator.polynomial(cs, T)
    if kind == "samples":
        ms = [matrix(m) for m in _get(doc, "matrices", kind)]
        return SymmetricGenerator.samples(numbers(_get(doc, "times", kind)), ms)
    if kind == "direct_sum":
        blocks = _get(doc, "blocks", kind)
        if not isinstance(blocks, list) or not blocks:
            raise InputError("direct_sum needs a nonempty list of blocks")
        return SymmetricGenerator.direct_sum(*[parse_generator(b) for b in blocks])
    raise InputError(f"unknown generator kind {kind!r}")


# ---------------------------------------------------------------------------
# covers
# ---------------------------------------------------------------------------
def _flag(x) -> bool | None:
    if x is None or isinstance(x, bool):
        return x
    raise InputError(f"flags must be true/false, got {x!r}")


def parse_cover(doc: dict) -> CoverDescription:
    """Cover from ``sets`` records and index-pair ``adjacency`` lists."""
    recs = _get(doc, "sets", "cover")
    if not isinstance(recs, list) or not recs:
        raise InputError("cover: sets must be a nonempty list")
    sets = []
    for i, r in enumerate(recs):
        flags = r.get("flags", {}) or {}
        opt = {k: (number(r[k]) if r.get(k) is not None else None)
               for k in ("displacement_energy", "portability", "C_value")}
        sets.append(CoverSet(str(r.get("name", f"U{i}")), **opt,
                             portable_liouville=_flag(flags.get("portable_liouville")),
                             dynamically_convex=_flag(flags.get("dynamically_convex")),
                             incompressible=_flag(flags.get("incompressible"))))
    pairs = doc.get("adjacency", [])
    dbl = doc.get("doubled_adjacency")
    try:
        return CoverDescription.from_pairs(sets, [tuple(map(int, p)) for p in pairs],
                                           None if dbl is None else [tuple(map(int, p)) for p in dbl])
    except (TypeError, ValueError) as exc:
        raise InputError(f"cover: adjacency must be a list of index pairs ({exc})") from exc

