"""Lower bounds for the Poisson bracket invariant of finite covers.

A cover is described by its sets (with user-supplied displacement energies,
portabilities and capacities) and by the intersection graph of their
closures.  The degree ``d`` of a cover is the largest number of sets a
single closure meets; by default the set itself is counted.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import HypothesisViolated, InputError, MissingDoubledAdjacency, WrongAmbientKind
from .relative_spectrum import AmbientModel, Certificate


@dataclass(frozen=True)
class CoverSet:
    """One set of a cover.  Absent data and flags are ``None``."""

    name: str
    displacement_energy: float | None = None
    portability: float | None = None
    C_value: float | None = None
    portable_liouville: bool | None = None
    dynamically_convex: bool | None = None
    incompressible: bool | None = None

    def __post_init__(self):
        if self.displacement_energy is not None and not self.displacement_energy > 0:
            raise InputError(f"set {self.name!r}: displacement energy must be positive")


def _adjacency(m, k: int, what: str) -> np.ndarray:
    a = np.asarray(m, dtype=bool)
    if a.shape != (k, k):
        raise InputError(f"{what} must be a {k}x{k} matrix")
    if not np.array_equal(a, a.T):
        raise InputError(f"{what} must be symmetric")
    if not a.diagonal().all():
        raise InputError(f"{what} must have a true diagonal")
    return a


def adjacency_from_pairs(k: int, pairs: Sequence[Sequence[int]]) -> np.ndarray:
    """Symmetric boolean matrix with true diagonal from a list of index pairs."""
    a = np.eye(k, dtype=bool)
    for i, j in pairs:
        if not (0 <= i < k and 0 <= j < k):
            raise InputError(f"pair ({i}, {j}) refers to a missing set")
        a[i, j] = a[j, i] = True
    return a


@dataclass(frozen=True)
class CoverDescription:
    sets: tuple
    adjacency: np.ndarray = field(compare=False)
    doubled_adjacency: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        k = len(self.sets)
        if k == 0:
            raise InputError("a cover needs at least one set")
        object.__setattr__(self, "sets", tuple(self.sets))
        object.__setattr__(self, "adjacency", _adjacency(self.adjacency, k, "adjacency"))
        if self.doubled_adjacency is not None:
            object.__setattr__(self, "doubled_adjacency",
                               _adjacency(self.doubled_adjacency, k, "doubled adjacency"))

    @classmethod
    def from_pairs(cls, sets: Sequence[CoverSet], pairs, doubled_pairs=None) -> "CoverDescription":
        k = len(sets)
        dbl = None if doubled_pairs is None else adjacency_from_pairs(k, doubled_pairs)
        return cls(tuple(sets), adjacency_from_pairs(k, pairs), dbl)


def degree(cov: CoverDescription, doubled: bool = False, count_self: bool = True) -> int:
    """Maximal number of sets whose closures meet a given closure.

    Raises
    ------
    MissingDoubledAdjacency
        If ``doubled`` is requested but the cover has no doubled adjacency.
    """
    a = cov.doubled_adjacency if doubled else cov.adjacency
    if a is None:
        raise MissingDoubledAdjacency("the doubled cover's adjacency was not supplied")
    d = int(a.sum(axis=1).max())
    return d if count_self else d - 1


def _fail(rule: str, name: str, reason: str, numbers: dict) -> HypothesisViolated:
    cert = Certificate("fail", rule, dict(numbers, failing_set=name), notes=[reason])
    return HypothesisViolated(f"set {name!r}: {reason}", cert)


def _max_energy(cov: CoverDescription, rule: str) -> float:
    missing = [s.name for s in cov.sets if s.displacement_energy is None]
    if missing:
        raise InputError(f"{rule}: displacement energy missing for {missing}")
    return max(s.displacement_energy for s in cov.sets)


def pb_lower_bound_monotone(cov: CoverDescription, amb: AmbientModel, n: int,
                            count_self: bool = True) -> tuple[float, Certificate]:
    """``1 / (2 d^2 e_max)`` for covers of a monotone ambient.

    Every set must have a dynamically convex, incompressible boundary.  For
    ``kappa > 0`` each set also needs ``C <= kappa`` and either
    ``e < kappa`` or a portable Liouville structure.  When all sets are
    portable Liouville domains, ``e_max`` is replaced by the largest
    portability (``kappa <= 0``) or the largest ``C`` (``kappa > 0``).

    Raises
    ------
    HypothesisViolated
        Naming the first set that breaks a hypothesis.
    """
    rule = "pb_monotone"
    if amb.kind == "rational":
        raise WrongAmbientKind("this bound needs a monotone or aspherical ambient")
    kappa = amb.kappa
    d = degree(cov, count_self=count_self)
    nums = {"n": n, "kappa": kappa, "degree": d, "count_self": count_self}
    for s in cov.sets:
        if s.dynamically_convex is not True:
            raise _fail(rule, s.name, "boundary not declared dynamically convex", nums)
        if s.incompressible is not True:
            raise _fail(rule, s.name, "boundary not declared incompressible", nums)
        if kappa > 0:
            if s.C_value is None or not s.C_value <= kappa:
                raise _fail(rule, s.name, f"C = {s.C_value} is not <= kappa = {kappa}", nums)
            e_ok = s.displacement_energy is not None and s.displacement_energy < kappa
            if not (e_ok or s.portable_liouville is True):
                raise _fail(rule, s.name, "neither e < kappa nor portable Liouville", nums)
    notes = [f"degree counts the set itself: {count_self}"]
    all_portable = all(s.portable_liouville is True for s in cov.sets)
    sub = [s.portability for s in cov.sets] if kappa <= 0 else [s.C_value for s in cov.sets]
    if all_portable and all(v is not None for v in sub):
        e = float(max(sub))
        nums["substitution"] = "portability" if kappa <= 0 else "C_value"
        notes.append(f"e_max replaced by the largest {nums['substitution']}")
    else:
        e = _max_energy(cov, rule)
        nums["substitution"] = None
    if not e > 0:
        raise InputError("the energy scale must be positive")
    value = 1.0 / (2 * d * d * e)
    nums.update(e_max=e, bound=value)
    return value, Certificate("pass", rule, nums, notes=notes)


def pb_lower_bound_rational(cov: CoverDescription, kappa: float, count_self: bool = True) -> tuple[float, Certificate]:
    """``1 / (2 d(2U)^2 e_max)`` for covers by balls of a rational ambient.

    ``C_value`` holds the Gromov width of each ball and must not exceed
    ``kappa``.

    Raises
    ------
    MissingDoubledAdjacency, HypothesisViolated
    """
    rule = "pb_rational"
    if not kappa > 0:
        raise InputError("kappa must be positive")
    d2 = degree(cov, doubled=True, count_self=count_self)
    nums = {"kappa": kappa, "doubled_degree": d2, "count_self": count_self}
    for s in cov.sets:
        if s.C_value is None or not s.C_value <= kappa:
            raise _fail(rule, s.name, f"Gromov width {s.C_value} is not <= kappa = {kappa}", nums)
    e = _max_energy(cov, rule)
    value = 1.0 / (2 * d2 * d2 * e)
    nums.update(e_max=e, bound=value)
    return value, Certificate("pass", rule, nums, notes=[f"degree counts the set itself: {count_self}"])


def superheavy_complement(rec: CoverSet, amb: AmbientModel) -> Certificate:
    """Certificate that the complement of ``rec`` is superheavy.

    Needs a portable Liouville domain with dynamically convex,
    incompressible boundary, and either ``kappa <= 0`` (spectral invariants
    bounded by the portability) or ``C <= kappa`` (bounded by ``C``).
    """
    if amb.kind == "rational":
        raise WrongAmbientKind("needs a monotone or aspherical ambient")
    kappa = amb.kappa
    nums = {"kappa": kappa, "C_value": rec.C_value, "portability": rec.portability}
    missing = [f for f in ("portable_liouville", "dynamically_convex", "incompressible")
               if getattr(rec, f) is not True]
    if missing:
        return Certificate("fail", "superheavy_complement", nums, notes=[f"missing: {', '.join(missing)}"])
    if kappa <= 0:
        nums["bound"] = rec.portability
        return Certificate("pass", "superheavy_complement", nums,
                           notes=["spectral invariants of Hamiltonians supported in U are bounded by p(U)"])
    if rec.C_value is not None and rec.C_value <= kappa:
        nums["bound"] = rec.C_value
        return Certificate("pass", "superheavy_complement", nums,
                           notes=["spectral invariants of Hamiltonians supported in U stay below C(U)"])
    return Certificate("fail", "superheavy_complement", nums, notes=[f"C = {rec.C_value} is not <= kappa = {kappa}"])
