"""Relative index-filtered spectra and the certificates built on them.

Capped orbits ``(gamma, A)`` contribute the value ``-A(gamma) - omega(A)``
at the index ``-n`` level; here ``omega(A) = kappa c_1(A)`` in a monotone
ambient manifold and the sphere class is determined by the CZ index.  The
check functions turn theorem hypotheses into :class:`Certificate` objects.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    CertificateAssertion,
    DisjointnessNotDeclared,
    InputError,
    WindowTooSmall,
    WrongAmbientKind,
)
from .reeb_domains import SphereDisk, SpectrumTable, sphere_disk_witnesses, SPHERE_KAPPA
from .capacity import c_ratio

MERGE_TOL = 1e-12
LATTICE_TOL = 1e-9


# ---------------------------------------------------------------------------
# ambient models and windows
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class AmbientModel:
    """Closed ambient manifold, reduced to the data the spectra depend on.

    ``kind`` is ``"aspherical"`` (``omega`` vanishes on spheres),
    ``"rational"`` (``omega(pi_2) = kappa Z``) or ``"monotone"``
    (``omega = kappa c_1`` on spheres, minimal Chern number ``min_chern``).
    """

    kind: str
    kappa: float = 0.0
    min_chern: int = 1

    def __post_init__(self):
        if self.kind not in ("aspherical", "rational", "monotone"):
            raise InputError(f"unknown ambient kind {self.kind!r}")
        if not math.isfinite(self.kappa):
            raise InputError("kappa must be finite")
        if self.kind == "rational" and not self.kappa > 0:
            raise InputError("a rational ambient needs kappa > 0")
        if self.min_chern < 1:
            raise InputError("minimal Chern number must be positive")

    @classmethod
    def aspherical(cls) -> "AmbientModel":
        return cls("aspherical", 0.0, 1)

    @classmethod
    def rational(cls, kappa: float) -> "AmbientModel":
        return cls("rational", float(kappa), 1)

    @classmethod
    def monotone(cls, kappa: float, min_chern: int = 1) -> "AmbientModel":
        return cls("monotone", float(kappa), int(min_chern))

    def omega_of_chern(self, c1: int) -> float | None:
        """``omega(A)`` for a sphere class with ``c_1(A) = c1``, or None if none exists."""
        if self.kind == "aspherical":
            return 0.0
        if self.kind != "monotone":
            raise WrongAmbientKind("sphere classes are determined by c_1 only in monotone models")
        if c1 % self.min_chern:
            return None
        return self.kappa * c1


@dataclass(frozen=True)
class SpectrumWindow:
    """Closed interval ``[lo, hi]`` of values."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise InputError("window needs lo <= hi")

    def __contains__(self, x: float) -> bool:
        return self.lo - MERGE_TOL * max(1.0, abs(x)) <= x <= self.hi + MERGE_TOL * max(1.0, abs(x))

    def covers(self, lo: float, hi: float) -> bool:
        return self.lo <= lo and hi <= self.hi

    @classmethod
    def parse(cls, text: str) -> "SpectrumWindow":
        try:
            lo, hi = text.split(":")
            return cls(float(lo), float(hi))
        except ValueError as exc:
            raise InputError(f"window must look like LO:HI, got {text!r}") from exc


@dataclass(frozen=True)
class RelativeSpectrum:
    """Sorted, deduplicated values inside ``window``."""

    values: tuple
    window: SpectrumWindow
    conservative: bool = False
    notes: tuple = field(default=(), compare=False)

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __contains__(self, x):
        return any(abs(x - v) <= MERGE_TOL * max(1.0, abs(x)) for v in self.values)

    def in_interval(self, lo: float, hi: float, closed_hi: bool = True, open_lo: bool = True) -> list[float]:
        out = []
        for v in self.values:
            if (v > lo if open_lo else v >= lo) and (v <= hi if closed_hi else v < hi):
                out.append(v)
        return out


def _merge(values: Iterable[float]) -> tuple:
    out: list[float] = []
    for v in sorted(values):
        if out and abs(v - out[-1]) <= MERGE_TOL * max(1.0, abs(v)):
            continue
        out.append(v)
    return tuple(out)


def spec_n_zero(amb: AmbientModel, n: int, window: SpectrumWindow) -> RelativeSpectrum:
    """Index ``-n`` spectrum of the zero Hamiltonian.

    ``{-kappa c : c in {-n, ..., 0}, c in N Z}`` for monotone ambients and
    ``{0}`` in the aspherical case.
    """
    if amb.kind == "rational":
        raise WrongAmbientKind("the index filtration needs a monotone or aspherical ambient")
    if amb.kind == "aspherical":
        vals = [0.0]
    else:
        vals = [-amb.kappa * c for c in range(-n, 1) if c % amb.min_chern == 0]
    return RelativeSpectrum(_merge(v + 0.0 for v in vals if v in window), window)


def relative_n_spectrum(tbl: SpectrumTable, amb: AmbientModel, window: SpectrumWindow) -> RelativeSpectrum:
    """``Spec_{-n}(dU; M)`` clipped to ``window``.

    Each orbit and each integer index ``CZ`` in its range yields
    ``c_1 = ceil((-CZ - n) / 2)`` and, when that Chern number is realised,
    the value ``-A - kappa c_1``.  Index ranges of surrogate orbits are
    expanded, which makes the result a superset (``conservative``).
    """
    n = tbl.n
    base = spec_n_zero(amb, n, window)
    vals = list(base.values)
    dropped = 0
    for rec in tbl:
        for cz in range(rec.cz_lo, rec.cz_hi + 1):
            k = -cz
            c1 = math.ceil((k - n) / 2)
            w = amb.omega_of_chern(c1)
            if w is None:
                dropped += 1
                continue
            v = -rec.action - w
            if v in window:
                vals.append(v + 0.0)
    notes = (f"{dropped} index values have no sphere class with the required Chern number",) if dropped else ()
    return RelativeSpectrum(_merge(vals), window, not tbl.exact, notes)


def relative_spectrum_degenerate(tbl: SpectrumTable, amb: AmbientModel, window: SpectrumWindow) -> RelativeSpectrum:
    """Unfiltered relative spectrum ``{-T - kappa m : T in {0} + actions, m in Z}``.

    A monotone ambient is treated as rational with lattice ``|kappa| N``.
    """
    if amb.kind == "aspherical":
        step = 0.0
    elif amb.kind == "rational":
        step = amb.kappa
    else:
        step = abs(amb.kappa) * amb.min_chern
    vals = []
    for T in [0.0] + list(tbl.actions):
        if step == 0.0:
            if -T in window:
                vals.append(-T + 0.0)
            continue
        m_lo = math.ceil((-T - window.hi) / step - 1e-12)
        m_hi = math.floor((-T - window.lo) / step + 1e-12)
        for m in range(m_lo, m_hi + 1):
            v = -T - step * m
            if v in window:
                vals.append(v + 0.0)
    return RelativeSpectrum(_merge(vals), window, not tbl.exact)


def default_window(tbl: SpectrumTable, amb: AmbientModel) -> SpectrumWindow:
    """A window wide enough for every index-filtered value of ``tbl``."""
    top = max([0.0] + tbl.actions)
    cz = max([0] + [abs(r.cz_lo) for r in tbl] + [abs(r.cz_hi) for r in tbl])
    r = top + abs(amb.kappa) * (cz + 2 * tbl.n + 2) + 1.0
    return SpectrumWindow(-r, r)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------
@dataclass
class Certificate:
    """Verdict of a single check together with the numbers it used."""

    verdict: str
    rule: str
    numbers: dict = field(default_factory=dict)
    killer_norm: float | None = None
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.verdict not in ("pass", "fail", "inconclusive"):
            raise ValueError(f"bad verdict {self.verdict!r}")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "rule": self.rule,
            "killer_norm": self.killer_norm,
            "numbers": dict(self.numbers),
            "notes": list(self.notes),
        }


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


def check_killer_condition(relspec: RelativeSpectrum | Sequence[float], c_H: float) -> Certificate:
    """Killer criterion: no relative spectral value in ``(0, c_H]``.

    Non-positive ``c_H`` passes without a killer (the max inequality then
    follows from subadditivity).

    Raises
    ------
    WindowTooSmall
        If the spectrum's window does not cover ``(0, c_H]``.
    """
    if c_H <= 0:
        return Certificate("pass", "subadditivity", {"c_H": c_H})
    if isinstance(relspec, RelativeSpectrum):
        if not relspec.window.covers(0.0, c_H):
            raise WindowTooSmall(f"window [{relspec.window.lo}, {relspec.window.hi}] misses (0, {c_H}]")
        hits = relspec.in_interval(0.0, c_H)
        notes = ["conservative spectrum"] if relspec.conservative else []
    else:
        hits = [v for v in relspec if 0 < v <= c_H]
        notes = []
    ok = not hits
    return Certificate(_verdict(ok), "killer_condition", {"c_H": c_H, "intersection": hits},
                       killer_norm=c_H if ok else None, notes=notes)


def table_in_lattice(tbl: SpectrumTable, T: float) -> bool:
    """Whether every action is an integer multiple of ``T``."""
    return all(abs(a / T - round(a / T)) <= LATTICE_TOL * max(1.0, a / T) for a in tbl.actions)


def check_rational_lattice(tbl: SpectrumTable | None, amb: AmbientModel, T: float, c_H: float) -> Certificate:
    """Rational ambient with actions in ``T Z`` and ``kappa / T`` an integer: pass iff ``c_H < T``.

    With ``tbl=None`` the caller vouches for the actions lying in ``T Z``.
    """
    if amb.kind != "rational":
        raise WrongAmbientKind("lattice rule needs a rational ambient")
    if not T > 0:
        raise InputError("lattice spacing must be positive")
    q = amb.kappa / T
    divides = abs(q - round(q)) <= LATTICE_TOL * max(1.0, q)
    in_lattice = tbl is None or table_in_lattice(tbl, T)
    ok = divides and in_lattice and c_H < T
    notes = []
    if not divides:
        notes.append("kappa / T is not an integer")
    if not in_lattice:
        notes.append("some action is not a multiple of T")
    if c_H >= T:
        notes.append("c_H >= T")
    return Certificate(_verdict(ok), "rational_lattice", {"c_H": c_H, "T": T, "kappa": amb.kappa},
                       killer_norm=c_H if ok else None, notes=notes)


def check_extendable(c_H: float, kappa: float, sigma: float, min_spec: float) -> Certificate:
    """Extendable domain in a rational ambient: pass iff ``0 <= c_H < min(kappa, sigma min_spec)``."""
    if not (sigma > 0 and min_spec > 0 and kappa > 0):
        raise InputError("kappa, sigma and min_spec must be positive")
    bound = min(kappa, sigma * min_spec)
    ok = 0 <= c_H < bound
    return Certificate(_verdict(ok), "rational_extendable",
                       {"c_H": c_H, "kappa": kappa, "sigma": sigma, "min_spec": min_spec, "bound": bound},
                       killer_norm=c_H if ok else None)


def check_neg_monotone(tbl: SpectrumTable, amb: AmbientModel, window: SpectrumWindow | None = None) -> Certificate:
    """Negative monotone ambient: pass iff every ``cz_lo >= 0``.

    On pass the relative spectrum is asserted to be non-positive.
    """
    if amb.kind != "monotone" or amb.kappa > 0:
        raise WrongAmbientKind("rule needs a monotone ambient with kappa <= 0")
    low = min((r.cz_lo for r in tbl), default=0)
    ok = all(r.cz_lo >= 0 for r in tbl)
    cert = Certificate(_verdict(ok), "negative_monotone", {"kappa": amb.kappa, "min_cz": low})
    if ok:
        window = window or default_window(tbl, amb)
        rel = relative_n_spectrum(tbl, amb, window)
        bad = [v for v in rel if v > MERGE_TOL]
        if bad:
            raise CertificateAssertion(f"positive relative spectral values {bad}")
        cert.numbers["max_relspec"] = max(rel.values) if len(rel) else None
        if rel.conservative:
            cert.notes.append("conservative spectrum")
    return cert


def check_pos_monotone(tbl: SpectrumTable, amb: AmbientModel, n: int, C_U: float, c_H: float,
                       window: SpectrumWindow | None = None) -> Certificate:
    """Positive monotone ambient.

    Pass iff ``cz_lo >= n + 1`` for every orbit, ``C_U <= kappa`` and
    ``0 < c_H < kappa``; ``C_U`` must dominate the table's own ratios.  On
    pass the relative spectrum is asserted to miss ``(0, kappa)`` and every
    orbit value is asserted to be at least ``(n - 1) kappa``.
    """
    if amb.kind != "monotone" or not amb.kappa > 0:
        raise WrongAmbientKind("rule needs a monotone ambient with kappa > 0")
    if n != tbl.n:
        raise InputError(f"dimension {n} does not match the table ({tbl.n})")
    kappa = amb.kappa
    min_cz = min((r.cz_lo for r in tbl), default=n + 1)
    table_C = max((c_ratio(r, n) for r in tbl), default=0.0)
    notes = []
    if min_cz < n + 1:
        notes.append(f"some orbit has cz_lo < n + 1 = {n + 1}")
    if C_U > kappa:
        notes.append("C(U) > kappa")
    if not 0 < c_H < kappa:
        notes.append("c_H outside (0, kappa)")
    if table_C > C_U * (1 + 1e-12):
        notes.append(f"table ratios reach {table_C!r} > C(U)")
    ok = not notes
    cert = Certificate(_verdict(ok), "positive_monotone",
                       {"kappa": kappa, "C_U": C_U, "c_H": c_H, "min_cz": min_cz, "table_C": table_C},
                       killer_norm=c_H if ok else None, notes=notes)
    if ok:
        window = window or default_window(tbl, amb)
        if not window.covers(0.0, kappa):
            raise WindowTooSmall("window must cover [0, kappa]")
        rel = relative_n_spectrum(tbl, amb, window)
        bad = rel.in_interval(0.0, kappa, closed_hi=False)
        if bad:
            raise CertificateAssertion(f"relative spectrum meets (0, kappa): {bad}")
        floor = (n - 1) * kappa
        for rec in tbl:
            for cz in range(rec.cz_lo, rec.cz_hi + 1):
                c1 = math.ceil((-cz - n) / 2)
                w = amb.omega_of_chern(c1)
                if w is not None and -rec.action - w < floor - 1e-9 * max(1.0, floor):
                    raise CertificateAssertion(f"orbit {rec.label} gives a value below (n - 1) kappa")
        if rel.conservative:
            cert.notes.append("conservative spectrum")
    return cert


def check_sphere(D: SphereDisk, c_H: float) -> Certificate:
    """Disk in the unit-area sphere: pass iff ``area`` is outside ``(1/3, 1/2)`` and ``c_H < area``.

    The witnesses ``k (1/2 - area)`` in ``(0, c_H]`` are recorded; on pass
    there must be none.
    """
    a = D.area
    in_gap = 1.0 / 3.0 < a < 0.5
    ok = (not in_gap) and c_H < a
    wit = sphere_disk_witnesses(D, c_H)
    if ok and wit:
        raise CertificateAssertion(f"index -1 actions meet (0, c_H]: {wit}")
    notes = []
    if in_gap:
        notes.append("area in (1/3, 1/2)")
    if c_H >= a:
        notes.append("c_H >= area")
    return Certificate(_verdict(ok), "sphere_disks",
                       {"area": a, "c_H": c_H, "kappa": SPHERE_KAPPA,
                        "witnesses": [{"k": k, "action": v} for k, v in wit]},
                       killer_norm=c_H if ok else None, notes=notes)


@dataclass
class MaxInequalityItem:
    certificate: Certificate
    c_H: float
    name: str = ""


def max_inequality_verdict(items: Sequence[MaxInequalityItem], disjoint: bool) -> tuple[Certificate, float | None]:
    """Combine per-domain certificates into the max inequality.

    Items with ``c_H <= 0`` need no certificate.  If all items pass the
    bound is ``max(max(0, c_H))``; any failure makes the result
    inconclusive.

    Raises
    ------
    DisjointnessNotDeclared
        Unless the caller declares the supports pairwise disjoint.
    """
    if not disjoint:
        raise DisjointnessNotDeclared("supports must be declared pairwise disjoint")
    if not items:
        raise InputError("no items")
    failing = [it.name or str(i) for i, it in enumerate(items) if not (it.c_H <= 0 or it.certificate.passed)]
    values = [max(0.0, it.c_H) for it in items]
    numbers = {"items": [{"name": it.name, "c_H": it.c_H, "verdict": it.certificate.verdict,
                          "rule": it.certificate.rule} for it in items]}
    if failing:
        cert = Certificate("inconclusive", "max_inequality", numbers, notes=[f"uncertified: {', '.join(failing)}"])
        return cert, None
    bound = max(values)
    numbers["bound"] = bound
    return Certificate("pass", "max_inequality", numbers), bound
