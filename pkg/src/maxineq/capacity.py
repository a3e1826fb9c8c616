"""The invariant ``C(U)`` and related capacities.

``C(U)`` is the supremum over Reeb orbits of ``2 A(gamma) / (CZ(gamma) - n + 1)``.
For ellipsoids it is computed in closed form and checked by enumeration;
for toric domains only surrogate orbits are available, which yields an
upper bound (convex) or an exact value (concave).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ClaimViolated, InputError, InternalMismatch, WrongKind
from .reeb_domains import (
    Ellipsoid,
    ReebOrbitRecord,
    SpectrumTable,
    ToricProfile,
    concave_toric_surrogates,
    convex_toric_surrogates,
    ellipsoid_orbits,
    parse_vector_label,
    simplex_inclusion_capacity,
    sup_norm_bound,
    support_function,
)

EPS_SLACK = 1e-9
MISMATCH_TOL = 1e-9


def c_ratio(rec: ReebOrbitRecord, n: int, pessimistic: bool = True) -> float:
    """``2 A / (CZ - n + 1)``, using ``cz_lo`` when pessimistic and ``cz_hi`` otherwise.

    Returns ``inf`` when the denominator is not positive.
    """
    cz = rec.cz_lo if pessimistic else rec.cz_hi
    d = cz - n + 1
    if d <= 0:
        return math.inf
    return 2.0 * rec.action / d


@dataclass(frozen=True)
class RatioReport:
    """Result of a ``C``-type computation.

    Attributes
    ----------
    value:
        The computed supremum (or the bound, for ``mode="upper_bound"``).
    witness:
        Orbit record attaining the value.
    cutoff:
        Action cutoff of the enumeration.
    mode:
        ``"exact"`` or ``"upper_bound"``.
    extra:
        Further named bounds, e.g. ``sup_norm`` for convex profiles.
    """

    value: float
    witness: ReebOrbitRecord | None
    cutoff: float
    mode: str
    extra: dict = field(default_factory=dict)

    @property
    def binding(self) -> float:
        return min([self.value, *self.extra.values()])


def _best(table: SpectrumTable, pessimistic: bool = True):
    best, wit = -math.inf, None
    for rec in table:
        r = c_ratio(rec, table.n, pessimistic)
        # ties prefer the smaller action, then the lexicographically smaller label
        if r > best * (1 + 1e-15) or (wit is not None and abs(r - best) <= 1e-15 * abs(best)
                                       and (rec.action, rec.label) < (wit.action, wit.label)):
            best, wit = r, rec
    return best, wit


def invariant_C_table(table: SpectrumTable, pessimistic: bool = True) -> RatioReport:
    """Supremum of :func:`c_ratio` over an explicit table."""
    if not len(table):
        raise InputError("empty spectrum table")
    best, wit = _best(table, pessimistic)
    return RatioReport(best, wit, table.cutoff, "exact" if table.exact else "upper_bound")


def invariant_C_ellipsoid(E: Ellipsoid) -> RatioReport:
    """``C(E(a)) = min a``, attained by the simple orbit on the shortest axis.

    The closed form is cross-checked against enumeration up to ``3 min a``.

    Raises
    ------
    InternalMismatch
        If the enumerated supremum differs from ``min a`` by more than 1e-9.
    """
    a1 = E.a[0]
    T = 3.0 * a1
    table = ellipsoid_orbits(E, T)
    best, _ = _best(table)
    if abs(best - a1) > MISMATCH_TOL * max(1.0, a1):
        raise InternalMismatch(f"enumerated C = {best!r} but min a = {a1!r}")
    wit = next(r for r in table if r.label == "γ[k=1,ℓ=1]")
    return RatioReport(a1, wit, T, "exact")


def _convex_ratio(omega: ToricProfile, v: Sequence[int], eps: float) -> float:
    n = omega.n
    z = sum(1 for x in v if x == 0)
    return (support_function(omega, v) + eps) / (sum(v) - (n - 1 - z) / 2.0)


def invariant_C_upper_convex(omega: ToricProfile, T: float | None = None, eps: float = EPS_SLACK) -> RatioReport:
    """Upper bound for ``C`` of a convex toric domain.

    ``value`` is ``sup (||v||^* + eps) / (sum v - (n - 1 - Z(v)) / 2)`` over
    lattice surrogates with ``||v||^* <= T``.  The sup-norm bound
    ``sup ||w||_inf`` is reported alongside in ``extra["sup_norm"]``; it is
    not asserted to dominate the enumerated value, since it can fail to
    (the unit square gives ``4/3`` against ``1``).
    """
    if omega.kind != "convex":
        raise WrongKind("convex bound needs a convex profile")
    if T is None:
        T = 3.0 * max(max(w[i] for w in omega.vertices) for i in range(omega.n))
    table = convex_toric_surrogates(omega, T)
    best, wit = -math.inf, None
    for rec in table:
        r = _convex_ratio(omega, parse_vector_label(rec.label), eps)
        if r > best * (1 + 1e-15) or (wit is not None and abs(r - best) <= 1e-15 * abs(best)
                                       and (rec.action, rec.label) < (wit.action, wit.label)):
            best, wit = r, rec
    return RatioReport(best, wit, T, "upper_bound", {"sup_norm": sup_norm_bound(omega)})


def invariant_C_concave(omega: ToricProfile, T: float | None = None) -> RatioReport:
    """``C`` of a concave toric domain, equal to its simplex inclusion capacity.

    The supremum of ``[v] / (sum v - n + 1)`` is enumerated and must be
    attained at ``v = (1, ..., 1)``.

    Raises
    ------
    ClaimViolated
        If the supremum is attained elsewhere or differs from the capacity.
    """
    if omega.kind != "concave":
        raise WrongKind("concave invariant needs a concave profile")
    cap = simplex_inclusion_capacity(omega)
    if T is None:
        T = 3.0 * cap
    table = concave_toric_surrogates(omega, T)
    best, wit = _best(table)
    ones = "v=(" + ",".join(["1"] * omega.n) + ")"
    at_ones = next((r for r in table if r.label == ones), None)
    if at_ones is None:
        raise ClaimViolated("v = (1, ..., 1) is missing from the enumeration")
    r1 = c_ratio(at_ones, omega.n)
    if r1 < best or r1 != cap:
        raise ClaimViolated(f"sup {best!r} at {wit.label}, ratio at ones {r1!r}, capacity {cap!r}")
    return RatioReport(r1, at_ones, T, "exact")


# ---------------------------------------------------------------------------
# the capacity C_0 for ellipsoids
# ---------------------------------------------------------------------------
def ellipsoid_hessian(E: Ellipsoid) -> np.ndarray:
    """Hessian of ``f = sum pi |z_j|^2 / a_j``, constant ``(+) (2 pi / a_j) I_2``."""
    return np.diag(np.repeat([2 * math.pi / a for a in E.a], 2))


def ishikawa_c0_ellipsoid(E: Ellipsoid) -> float:
    """``C_0`` of an ellipsoid, equal to ``min a``.

    ``f`` is homogeneous of degree two with ``f = 1`` on the boundary and
    constant Hessian, so the admissible slope on a complex line ``V`` is
    ``2 pi / sum |u_j|^2 a_j``; the line of the shortest axis is optimal.
    """
    return E.a[0]


def ishikawa_c0_sampled(hessian: np.ndarray, n_lines: int = 10000, rng: np.random.Generator | None = None) -> float:
    """Sampled-line estimate of ``C_0`` for a constant positive Hessian.

    For each random complex line ``V`` the largest ``a`` with
    ``D^2 f > a|_V (+) 0|_{V-perp}`` is ``1 / lambda_max(P_V H^{-1} P_V)``;
    the estimate is the minimum of ``2 pi / a`` over the lines, which
    approaches ``C_0`` from above.
    """
    h = np.asarray(hessian, dtype=float)
    dim = h.shape[0]
    if dim % 2:
        raise InputError("Hessian must act on an even-dimensional space")
    rng = rng or np.random.default_rng(0)
    hinv = np.linalg.inv(h)
    best = math.inf
    for _ in range(n_lines):
        z = rng.normal(size=dim // 2) + 1j * rng.normal(size=dim // 2)
        z /= np.linalg.norm(z)
        u = np.empty(dim)
        u[0::2], u[1::2] = z.real, z.imag
        iu = np.empty(dim)  # multiplication by i in pair coordinates
        iu[0::2], iu[1::2] = -z.imag, z.real
        basis = np.stack([u, iu], axis=1)
        lam = float(np.linalg.eigvalsh(basis.T @ hinv @ basis)[-1])
        best = min(best, 2 * math.pi * lam)
    return best


def nonmonotonicity_witness(a_short: float, a_long: float, eta: float = 1e-3) -> dict:
    """A convex profile near the moment triangle of ``E(a_long, a_short)``.

    The polygon has edges of length ``eta``-proportional hugging the axes
    at the far corners, so the surrogate ``v = (1, 0)`` has value
    ``a_long`` and index ``3``; its ratio ``a_long`` exceeds
    ``C(E) = a_short`` although the domains are Hausdorff close.
    """
    if not 0 < a_short < a_long or not 0 < eta < 0.5:
        raise InputError("need 0 < a_short < a_long and 0 < eta < 1/2")
    verts = [(0.0, 0.0), (a_long, 0.0), (a_long, eta * a_short), (eta * a_long, a_short), (0.0, a_short)]
    omega = ToricProfile(verts, "convex")
    table = convex_toric_surrogates(omega, a_long)
    rec = next(r for r in table if r.label == "v=(1,0)")
    return {"profile": omega, "record": rec, "ratio": c_ratio(rec, 2), "C_ellipsoid": a_short}
