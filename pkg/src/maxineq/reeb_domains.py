"""Reeb-orbit spectra of model star-shaped domains.

Supported domains are irrational ellipsoids, convex and concave toric
domains given by polytopal moment images, and the disks of the two-sphere
used as a worked example.  Every generator returns a :class:`SpectrumTable`
of orbit records below an action cutoff.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateProfile, InputError, InvalidProfile, NonPositiveV, ResonantEllipsoid, WrongKind
from .sympath import SymmetricGenerator, SymplecticPath, direct_sum, integrate_path

RESONANCE_TOL = 1e-9
RESONANCE_MAX_DENOMINATOR = 64


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------
@dataclass(frozen=True, order=True)
class ReebOrbitRecord:
    """One (possibly surrogate) Reeb orbit.

    ``cz_lo == cz_hi`` for an exact Conley-Zehnder index; a proper range
    means only bounds are known, as for toric surrogates.
    """

    action: float
    label: str
    cz_lo: int
    cz_hi: int
    multiplicity: int = 1

    def __post_init__(self):
        if not self.action > 0:
            raise InputError(f"orbit {self.label!r} must have positive action")
        if self.cz_lo > self.cz_hi:
            raise InputError(f"orbit {self.label!r} has cz_lo > cz_hi")
        if self.multiplicity < 1:
            raise InputError(f"orbit {self.label!r} has multiplicity < 1")

    @property
    def exact(self) -> bool:
        return self.cz_lo == self.cz_hi


@dataclass(frozen=True)
class SpectrumTable:
    """Orbit records of one domain with action at most ``cutoff``."""

    n: int
    orbits: tuple
    cutoff: float
    source: str = "explicit"
    notes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InputError("complex dimension must be at least 1")
        for r in self.orbits:
            if r.action > self.cutoff * (1 + 1e-12):
                raise InputError(f"orbit {r.label!r} exceeds the cutoff {self.cutoff}")

    @property
    def exact(self) -> bool:
        return all(r.exact for r in self.orbits)

    @property
    def actions(self) -> list[float]:
        return [r.action for r in self.orbits]

    def __iter__(self):
        return iter(self.orbits)

    def __len__(self):
        return len(self.orbits)


def _sorted_table(n, records: Iterable[ReebOrbitRecord], cutoff, source, notes=()) -> SpectrumTable:
    recs = sorted(records, key=lambda r: (r.action, r.label))
    return SpectrumTable(n, tuple(recs), float(cutoff), source, tuple(notes))


def explicit_table(n: int, rows: Sequence, cutoff: float | None = None) -> SpectrumTable:
    """Table from ``(action, label, cz_lo, cz_hi[, multiplicity])`` rows."""
    recs = []
    for row in rows:
        if isinstance(row, ReebOrbitRecord):
            recs.append(row)
        elif isinstance(row, dict):
            recs.append(ReebOrbitRecord(float(row["action"]), str(row.get("label", f"o{len(recs)}")),
                                        int(row["cz_lo"]), int(row.get("cz_hi", row["cz_lo"])),
                                        int(row.get("multiplicity", 1))))
        else:
            recs.append(ReebOrbitRecord(float(row[0]), str(row[1]), int(row[2]), int(row[3]),
                                        int(row[4]) if len(row) > 4 else 1))
    top = max((r.action for r in recs), default=0.0)
    cutoff = top if cutoff is None else float(cutoff)
    return _sorted_table(n, (r for r in recs if r.action <= cutoff), cutoff, "explicit")


# ---------------------------------------------------------------------------
# ellipsoids
# ---------------------------------------------------------------------------
def _near_rational(x: float, max_den: int, tol: float) -> bool:
    f = Fraction(x).limit_denominator(max_den)
    return abs(x - float(f)) <= tol * max(1.0, abs(x))


@dataclass(frozen=True)
class Ellipsoid:
    """``E(a) = {sum pi |z_j|^2 / a_j < 1}``; semi-axes are stored sorted."""

    a: tuple

    def __init__(self, a: Sequence[float]):
        vals = tuple(sorted(float(x) for x in a))
        if len(vals) < 1:
            raise InputError("an ellipsoid needs at least one semi-axis")
        if not all(math.isfinite(x) and x > 0 for x in vals):
            raise InputError("ellipsoid parameters must be positive and finite")
        object.__setattr__(self, "a", vals)

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def resonant(self) -> bool:
        """Some ratio ``a_i / a_j`` is within 1e-9 of a rational with denominator <= 64."""
        for i, j in itertools.combinations(range(self.n), 2):
            if _near_rational(self.a[j] / self.a[i], RESONANCE_MAX_DENOMINATOR, RESONANCE_TOL):
                return True
        return False


def ellipsoid_cz(E: Ellipsoid, k: int, ell: int) -> int:
    """``CZ(gamma_{k,ell}) = n - 1 + 2 sum_j floor(ell a_k / a_j)``, ``k`` one-based."""
    ak = E.a[k - 1]
    return E.n - 1 + 2 * sum(math.floor(ell * ak / aj) for aj in E.a)


def ellipsoid_orbits(E: Ellipsoid, T: float) -> SpectrumTable:
    """All iterates ``gamma_{k,ell}`` with action ``ell a_k <= T``.

    Raises
    ------
    ResonantEllipsoid
        If the ellipsoid is flagged resonant, or some relevant ``ell a_k / a_j``
        (``j != k``) is within 1e-9 of an integer.
    """
    if E.resonant:
        raise ResonantEllipsoid(f"E{E.a} has a near-rational ratio of semi-axes")
    recs = []
    for k, ak in enumerate(E.a, start=1):
        ell = 1
        while ell * ak <= T * (1 + 1e-15):
            for j, aj in enumerate(E.a, start=1):
                q = ell * ak / aj
                if j != k and abs(q - round(q)) <= RESONANCE_TOL * max(1.0, q):
                    raise ResonantEllipsoid(f"{ell} a_{k} / a_{j} is an integer")
            recs.append(ReebOrbitRecord(ell * ak, f"γ[k={k},ℓ={ell}]", ellipsoid_cz(E, k, ell),
                                        ellipsoid_cz(E, k, ell), ell))
            ell += 1
    return _sorted_table(E.n, recs, T, f"ellipsoid{E.a}")


def ellipsoid_linearized_path(E: Ellipsoid, k: int, ell: int, steps_per_turn: int = 64) -> tuple[SymplecticPath, int]:
    """Transverse linearised flow of ``gamma_{k,ell}`` and its framing correction.

    The path is the direct sum over ``j != k`` of rotations at angular speed
    ``2 pi / a_j`` for time ``ell a_k``.  Adding the returned correction
    ``2 ell`` (the rotation in the ``k``-th plane measured in the trivial
    framing) to its index reproduces :func:`ellipsoid_cz`.
    """
    if not 1 <= k <= E.n or ell < 1:
        raise InputError("need 1 <= k <= n and ell >= 1")
    if E.n == 1:
        raise InputError("the transverse path is empty in dimension one")
    T = ell * E.a[k - 1]
    gens = [SymmetricGenerator.rotation(2 * math.pi * T / aj, T) for j, aj in enumerate(E.a, 1) if j != k]
    turns = max(abs(g(0.0)[0, 0]) * T / (2 * math.pi) for g in gens)
    steps = max(64, int(math.ceil(turns * steps_per_turn)) + 16)
    blocks = [integrate_path(g, steps) for g in gens]
    path = blocks[0] if len(blocks) == 1 else direct_sum(*blocks)
    return path, 2 * ell


# ---------------------------------------------------------------------------
# toric domains
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ToricProfile:
    """Polytopal moment image of a toric domain in ``R^n_{>=0}``.

    For ``kind="convex"`` the region is the downward closure of the convex
    hull of ``vertices`` (its symmetrisation is then convex).  For
    ``kind="concave"`` the vertices span the bounded boundary face of the
    convex complement ``conv(vertices) + R^n_{>=0}``; the region has compact
    closure only if every coordinate axis carries a vertex.
    """

    vertices: tuple
    kind: str

    def __init__(self, vertices: Sequence[Sequence[float]], kind: str):
        if kind not in ("convex", "concave"):
            raise InvalidProfile(f"unknown toric kind {kind!r}")
        vs = np.asarray(vertices, dtype=float)
        if vs.ndim != 2 or vs.shape[0] < 1 or vs.shape[1] < 1:
            raise InvalidProfile("vertices must be a nonempty list of points")
        if not np.all(np.isfinite(vs)) or np.any(vs < 0):
            raise InvalidProfile("vertices must be finite and lie in the closed orthant")
        if kind == "concave":
            for i in range(vs.shape[1]):
                on_axis = (vs[:, i] > 0) & (np.delete(vs, i, axis=1) == 0).all(axis=1)
                if not on_axis.any():
                    raise InvalidProfile(f"concave profile needs a vertex on axis {i + 1}")
        object.__setattr__(self, "vertices", tuple(tuple(float(x) for x in v) for v in vs))
        object.__setattr__(self, "kind", kind)

    @property
    def n(self) -> int:
        return len(self.vertices[0])

    @property
    def array(self) -> np.ndarray:
        return np.array(self.vertices)


def _dot(v, w) -> float:
    return math.fsum(x * y for x, y in zip(v, w))


def support_function(omega: ToricProfile, v: Sequence[float]) -> float:
    """``||v||^*_Omega = max_{w in Omega} <v, w>`` for ``v >= 0``."""
    if omega.kind != "convex":
        raise WrongKind("support function needs a convex profile")
    if any(x < 0 for x in v):
        raise InputError("support function is evaluated on nonnegative vectors")
    return max(_dot(v, w) for w in omega.vertices)


def inner_value(omega: ToricProfile, v: Sequence[float]) -> float:
    """``[v]_Omega = min <v, w>`` over the boundary face, for ``v > 0``."""
    if omega.kind != "concave":
        raise WrongKind("inner value needs a concave profile")
    if any(x <= 0 for x in v):
        raise NonPositiveV("inner value needs a strictly positive vector")
    return min(_dot(v, w) for w in omega.vertices)


def simplex_inclusion_capacity(omega: ToricProfile) -> float:
    """``sup {c : Delta(c) in closure(Omega)}`` from the vertex description.

    For a convex profile this is ``min_i max_w w_i``; for a concave profile
    it is ``min_w sum_i w_i``.
    """
    vs = omega.vertices
    if omega.kind == "convex":
        return min(max(w[i] for w in vs) for i in range(omega.n))
    return min(math.fsum(w) for w in vs)


def sup_norm_bound(omega: ToricProfile) -> float:
    """``sup_{w in Omega} ||w||_inf`` for a convex profile."""
    if omega.kind != "convex":
        raise WrongKind("sup-norm bound needs a convex profile")
    return max(max(w) for w in omega.vertices)


def _vec_label(v) -> str:
    return "v=(" + ",".join(str(int(x)) for x in v) + ")"


def _enumeration_box(omega: ToricProfile, T: float) -> int:
    vs = omega.array
    if omega.kind == "convex":
        r = float(np.min(np.max(vs, axis=0)))
        what = "minimal positive support"
    else:
        sums = vs.sum(axis=1)
        r = float(np.min(sums[sums > 0])) if np.any(sums > 0) else 0.0
        what = "minimal positive vertex coordinate sum"
    if not r > 0:
        raise DegenerateProfile(f"{what} is zero; the enumeration box is unbounded")
    return int(math.floor(T / r * (1 + 1e-12)))


def convex_toric_surrogates(omega: ToricProfile, T: float) -> SpectrumTable:
    """Lattice surrogates ``v in N^n \\ 0`` with ``||v||^* <= T``.

    CZ bounds are ``Z(v) + 2 sum v <= CZ <= n - 1 + 2 sum v`` where ``Z(v)``
    counts zero coordinates.
    """
    if omega.kind != "convex":
        raise WrongKind("convex surrogates need a convex profile")
    n = omega.n
    box = _enumeration_box(omega, T)
    recs = []
    for v in itertools.product(range(box + 1), repeat=n):
        if not any(v):
            continue
        act = support_function(omega, v)
        if act > T or act <= 0:
            continue
        z = sum(1 for x in v if x == 0)
        s = sum(v)
        recs.append(ReebOrbitRecord(act, _vec_label(v), z + 2 * s, n - 1 + 2 * s, math.gcd(*v)))
    return _sorted_table(n, recs, T, "convex_toric", (f"box {box}",))


def concave_toric_surrogates(omega: ToricProfile, T: float) -> SpectrumTable:
    """Lattice surrogates ``v in N^n_{>0}`` with ``[v] <= T``.

    CZ bounds are ``1 - n + 2 sum v <= CZ <= 2 sum v``.  The lattice set is
    searched in the box ``||v||_inf <= T / r`` with ``r`` the minimal
    positive vertex coordinate sum; vectors outside the box are not listed
    even if their value is below ``T``.
    """
    if omega.kind != "concave":
        raise WrongKind("concave surrogates need a concave profile")
    n = omega.n
    box = _enumeration_box(omega, T)
    recs = []
    for v in itertools.product(range(1, box + 1), repeat=n):
        act = inner_value(omega, v)
        if act > T:
            continue
        s = sum(v)
        recs.append(ReebOrbitRecord(act, _vec_label(v), 1 - n + 2 * s, 2 * s, math.gcd(*v)))
    return _sorted_table(n, recs, T, "concave_toric", (f"box {box}",))


def parse_vector_label(label: str) -> tuple[int, ...]:
    """Inverse of the ``v=(...)`` labels used by toric surrogates."""
    if not (label.startswith("v=(") and label.endswith(")")):
        raise InputError(f"not a lattice label: {label!r}")
    return tuple(int(x) for x in label[3:-1].split(","))


# ---------------------------------------------------------------------------
# sphere disks
# ---------------------------------------------------------------------------
SPHERE_KAPPA = 0.5
SPHERE_MIN_CHERN = 2


@dataclass(frozen=True)
class SphereDisk:
    """Round disk of the given area in the unit-area two-sphere."""

    area: float

    def __post_init__(self):
        if not 0 < self.area < 1:
            raise InputError("disk area must lie in (0, 1)")


def sphere_disk_index_actions(D: SphereDisk, k_max: int) -> list[float]:
    """Actions of index ``-1`` capped orbits on the boundary circle.

    These are ``0`` together with ``k (1/2 - area)`` for even ``2 <= k <= k_max``.
    """
    vals = {0.0}
    for k in range(2, k_max + 1, 2):
        vals.add(k * (0.5 - D.area))
    return sorted(vals)


def sphere_disk_witnesses(D: SphereDisk, c_H: float, k_max: int | None = None) -> list[tuple[int, float]]:
    """Pairs ``(k, k (1/2 - area))`` with value in ``(0, c_H]``."""
    gap = 0.5 - D.area
    if gap <= 0 or c_H <= 0:
        return []
    k_max = k_max or 2 * int(math.ceil(c_H / (2 * gap))) + 2
    return [(k, k * gap) for k in range(2, k_max + 1, 2) if 0 < k * gap <= c_H]

