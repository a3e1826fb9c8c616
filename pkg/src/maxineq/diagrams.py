"""Radial Hamiltonians and deformation diagrams.

A deformation diagram is a finite family of lines in the ``(tau, value)``
plane.  Along a deformation the spectral invariant moves continuously and
stays on the lines, so it can only switch lines where two of them meet.
:func:`track_spectral_invariant` computes the set of lines reachable from
the start point under that rule and the resulting upper bound.
"""
from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CertificateAssertion, ConstantOrbit, DiagramError, HypothesisViolated, InputError, InsufficientSamples, InvalidProfile, WindowTooSmall
from .halfint import HalfInt
from .reeb_domains import SpectrumTable
from .relative_spectrum import AmbientModel, Certificate, RelativeSpectrum, SpectrumWindow, spec_n_zero

TRACK_TOL = 1e-12
BRUTE_FORCE_MAX_LINES = 8


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------
class RadialProfile:
    """Piecewise-linear backbone ``chi(s)`` with C^2 corner smoothing.

    Each interior breakpoint ``s_i`` is replaced on ``[s_i - w, s_i + w]``
    by a blend whose derivative moves between the adjacent slopes along the
    smoothstep ``3x^2 - 2x^3``.  Outside the corners ``chi`` equals the
    backbone, and the sign of ``chi''`` on a corner is the sign of the slope
    jump.  Beyond the end breakpoints the end slopes are continued.

    Parameters
    ----------
    breakpoints:
        ``(s, value)`` pairs with strictly increasing ``s``.
    smoothing:
        Half-width ``w`` of each corner; defaults to ``1e-3`` of the radial
        range and is capped at a quarter of the shortest segment.
    ddchi_signs:
        Optional expected sign of ``chi''`` per interior corner.
    """

    def __init__(self, breakpoints: Sequence[Sequence[float]], smoothing: float | None = None,
                 ddchi_signs: Sequence[int] | None = None):
        bp = np.asarray(breakpoints, dtype=float)
        if bp.ndim != 2 or bp.shape[1] != 2 or len(bp) < 2:
            raise InvalidProfile("need at least two (s, value) breakpoints")
        if np.any(np.diff(bp[:, 0]) <= 0):
            raise InvalidProfile("breakpoint radii must increase strictly")
        self.s = bp[:, 0].copy()
        self.y = bp[:, 1].copy()
        self.m = np.diff(self.y) / np.diff(self.s)
        seg = float(np.min(np.diff(self.s)))
        w = 1e-3 * (self.s[-1] - self.s[0]) if smoothing is None else float(smoothing)
        self.w = min(w, 0.25 * seg)
        if not self.w > 0:
            raise InvalidProfile("smoothing width must be positive")
        jumps = np.diff(self.m)
        if ddchi_signs is not None:
            if len(ddchi_signs) != len(jumps):
                raise InvalidProfile("one second-derivative sign per interior corner is required")
            for i, (sg, jmp) in enumerate(zip(ddchi_signs, jumps)):
                if sg and np.sign(jmp) != sg:
                    raise InvalidProfile(f"corner {i + 1} bends the wrong way")

    @property
    def max_abs_slope(self) -> float:
        return float(np.max(np.abs(self.m)))

    def _locate(self, s: float):
        # returns ("corner", i) for interior corner i, or ("segment", i)
        k = len(self.s)
        i = int(np.searchsorted(self.s, s))
        for c in (i - 1, i):
            if 1 <= c <= k - 2 and abs(s - self.s[c]) < self.w:
                return "corner", c
        seg = int(np.clip(i - 1, 0, k - 2))
        return "segment", seg

    def value(self, s: float) -> float:
        kind, i = self._locate(s)
        if kind == "segment":
            return float(self.y[i] + self.m[i] * (s - self.s[i]))
        a = self.s[i] - self.w
        x = (s - a) / (2 * self.w)
        jmp = self.m[i] - self.m[i - 1]
        return float(self.y[i] - self.m[i - 1] * self.w + self.m[i - 1] * (s - a)
                     + jmp * 2 * self.w * (x ** 3 - x ** 4 / 2))

    def d1(self, s: float) -> float:
        kind, i = self._locate(s)
        if kind == "segment":
            return float(self.m[i])
        x = (s - self.s[i] + self.w) / (2 * self.w)
        return float(self.m[i - 1] + (self.m[i] - self.m[i - 1]) * (3 * x * x - 2 * x ** 3))

    def d2(self, s: float) -> float:
        kind, i = self._locate(s)
        if kind == "segment":
            return 0.0
        x = (s - self.s[i] + self.w) / (2 * self.w)
        return float((self.m[i] - self.m[i - 1]) / (2 * self.w) * 6 * x * (1 - x))

    __call__ = value


@dataclass(frozen=True)
class OrbitLevel:
    """A radius where ``|chi'|`` equals an orbit action."""

    s: float
    action: float
    label: str
    sign_dchi: int
    sign_ddchi: int


def radial_orbit_levels(chi: RadialProfile, tbl: SpectrumTable) -> list[OrbitLevel]:
    """All radii where ``|chi'(s)| = A`` for an action ``A`` of ``tbl``.

    On a smoothed corner ``chi'`` is monotone, so each level is found by
    bisection.  A linear segment whose slope matches an action gives a
    degenerate level reported at its midpoint with ``sign_ddchi = 0``.
    """
    out = []
    for rec in tbl:
        A = rec.action
        for i, m in enumerate(chi.m):
            if abs(abs(m) - A) <= 1e-12 * max(1.0, A):
                mid = 0.5 * (chi.s[i] + chi.s[i + 1])
                out.append(OrbitLevel(float(mid), A, rec.label, int(np.sign(m)), 0))
        for i in range(1, len(chi.s) - 1):
            lo_m, hi_m = chi.m[i - 1], chi.m[i]
            for target in (A, -A):
                if min(lo_m, hi_m) < target < max(lo_m, hi_m):
                    a, b = chi.s[i] - chi.w, chi.s[i] + chi.w
                    inc = hi_m > lo_m
                    for _ in range(200):
                        mid = 0.5 * (a + b)
                        if (chi.d1(mid) < target) == inc:
                            a = mid
                        else:
                            b = mid
                        if b - a <= 1e-15 * max(1.0, abs(mid)):
                            break
                    s = 0.5 * (a + b)
                    out.append(OrbitLevel(float(s), A, rec.label, int(np.sign(target)),
                                          int(np.sign(hi_m - lo_m))))
    out.sort(key=lambda o: (o.s, o.action))
    return out


def radial_action(chi_s: float, dchi_s: float, s: float, omega_A: float = 0.0) -> float:
    """Action ``chi(s) - s chi'(s) - omega(A)`` of a capped radial orbit."""
    return chi_s - s * dchi_s - omega_A


def radial_rs_index(cz_reeb: int, sign_dchi: int, sign_ddchi: int) -> HalfInt:
    """``sign(chi') CZ + sign(chi'')/2`` for a nonconstant radial orbit.

    Raises
    ------
    ConstantOrbit
        If ``sign_dchi`` is zero.
    """
    if sign_dchi == 0:
        raise ConstantOrbit("constant orbits have no Reeb index")
    if sign_dchi not in (-1, 1) or sign_ddchi not in (-1, 0, 1):
        raise InputError("signs must lie in {-1, 0, 1}")
    return HalfInt(2 * sign_dchi * cz_reeb + sign_ddchi)


def slow_killer_profile(sigma: float, eps: float, c_H: float, min_spec: float, kappa: float,
                        smoothing: float | None = None) -> tuple[RadialProfile, Certificate]:
    """Killer profile for an extendable domain in a rational ambient.

    ``chi`` is ``-1`` up to ``1 - eps`` and rises linearly to ``0`` at
    ``1 + sigma - eps``.  Scaled by ``c_H`` its slope is at most
    ``c_H / sigma``, below the minimal action when the hypothesis holds.

    Raises
    ------
    HypothesisViolated
        Unless ``0 <= c_H < min(kappa, sigma min_spec)``.
    """
    from .relative_spectrum import check_extendable

    if not (0 < eps < 1 and sigma > 0):
        raise InputError("need sigma > 0 and 0 < eps < 1")
    cert = check_extendable(c_H, kappa, sigma, min_spec)
    if not cert.passed:
        raise HypothesisViolated(f"c_H = {c_H} is not below min(kappa, sigma min_spec) = {cert.numbers['bound']}",
                                 cert)
    bp = [(1 - 2 * eps, -1.0), (1 - eps, -1.0), (1 + sigma - eps, 0.0), (1 + sigma, 0.0)]
    chi = RadialProfile(bp, smoothing, ddchi_signs=[1, -1])
    cert.numbers["max_slope"] = c_H * chi.max_abs_slope
    return chi, cert


# ---------------------------------------------------------------------------
# diagrams
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class DiagramLine:
    """``value(tau) = start + slope (tau - tau_lo)`` on ``[tau_lo, tau_hi]``."""

    label: str
    start: float
    slope: float
    tau_lo: float
    tau_hi: float
    kind: str = "sloped"
    slack: float = 0.0

    def __post_init__(self):
        if not self.tau_lo <= self.tau_hi:
            raise DiagramError(f"line {self.label!r} has an empty parameter range")
        if self.slack < 0:
            raise DiagramError("slack must be nonnegative")

    def at(self, tau: float) -> float:
        return self.start + self.slope * (tau - self.tau_lo)

    def alive(self, tau: float) -> bool:
        return self.tau_lo - TRACK_TOL <= tau <= self.tau_hi + TRACK_TOL


@dataclass(frozen=True)
class Diagram:
    lines: tuple
    start: tuple  # (tau0, value0)
    tau_end: float
    start_line: str | None = None

    def __post_init__(self):
        if self.tau_end < self.start[0]:
            raise DiagramError("tau_end precedes the start")
        labels = [ln.label for ln in self.lines]
        if len(set(labels)) != len(labels):
            raise DiagramError("line labels must be unique")


def build_killer_diagram(c_H: float, relspec: RelativeSpectrum | Sequence[float], samples: Sequence[float],
                         tau_end: float | None = None) -> Diagram:
    """Lines of slope ``-1`` through ``samples`` and horizontals at ``relspec``.

    The start is ``(0, c_H)``; ``c_H`` is added to the samples if missing.

    Raises
    ------
    WindowTooSmall
        If the spectrum window misses part of the range swept by the
        sloped lines.
    """
    tau_end = c_H if tau_end is None else float(tau_end)
    samp = list(dict.fromkeys(float(x) for x in samples))
    if not any(abs(x - c_H) <= TRACK_TOL * max(1.0, abs(c_H)) for x in samp):
        samp.append(float(c_H))
    if isinstance(relspec, RelativeSpectrum):
        lo, hi = min(samp) - tau_end, float(c_H)
        if not relspec.window.covers(lo, hi):
            raise WindowTooSmall(f"window [{relspec.window.lo}, {relspec.window.hi}] must cover [{lo}, {hi}]")
    lines = [DiagramLine(f"spec[{i}]", x, -1.0, 0.0, tau_end, "sloped") for i, x in enumerate(samp)]
    lines += [DiagramLine(f"rel[{j}]", float(r), 0.0, 0.0, tau_end, "horizontal") for j, r in enumerate(relspec)]
    start_label = next((ln.label for ln in lines if ln.kind == "sloped"
                        and abs(ln.start - c_H) <= TRACK_TOL * max(1.0, abs(c_H))), None)
    return Diagram(tuple(lines), (0.0, float(c_H)), tau_end, start_label)


def build_contraction_diagram(orbit_data: Sequence[Sequence[float]], require_nonnegative: bool = False) -> Diagram:
    """Lines ``tau -> action_H tau - omega(A)`` on ``[0, 1]``, starting from ``(0, 0)``.

    With ``require_nonnegative`` every slope and every start must be
    nonnegative, as for dynamically convex data in a negatively monotone
    ambient.

    Raises
    ------
    CertificateAssertion
        If ``require_nonnegative`` is set and a line violates it.
    """
    if require_nonnegative:
        bad = [i for i, (a, w) in enumerate(orbit_data) if a < 0 or -w < 0]
        if bad:
            raise CertificateAssertion(f"orbits {bad} give a negative slope or start")
    lines = [DiagramLine(f"orbit[{i}]", -float(w), float(a), 0.0, 1.0, "sloped")
             for i, (a, w) in enumerate(orbit_data)]
    return Diagram(tuple(lines), (0.0, 0.0), 1.0)


def shrink_chern_number(cz: int, n: int) -> int:
    """The Chern number ``c`` with ``2c`` in ``{CZ - n - 1, CZ - n}``."""
    return (cz - n) // 2 if (cz - n) % 2 == 0 else (cz - n - 1) // 2


def build_shrink_diagram(chi: RadialProfile, tbl: SpectrumTable, amb: AmbientModel, delta: float,
                         slack: float | None = None) -> Diagram:
    """Diagram of the shrinking deformation ``chi_tau(s) = chi(s / tau)``.

    Horizontal lines sit at ``chi(0) - omega(A)`` and ``-omega(A)`` for the
    sphere classes of the zero Hamiltonian.  Each orbit contributes a line
    ``(1 - delta) A tau - omega(A)`` with the sphere class fixed by its
    index, alive while ``|chi_tau'|`` still reaches ``A``, i.e. for
    ``tau <= max|chi'| / A``.  Sloped lines carry a slack band, by default
    the corner width times the maximal slope, for the near-corner actions.
    """
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    n = tbl.n
    big = SpectrumWindow(-1e300, 1e300)
    zero = spec_n_zero(amb, n, big).values
    chi0 = chi.value(0.0)
    lines = []
    for j, v in enumerate(zero):
        lines.append(DiagramLine(f"core[{j}]", chi0 + v, 0.0, 0.0, 1.0, "horizontal"))
        lines.append(DiagramLine(f"outer[{j}]", v, 0.0, 0.0, 1.0, "horizontal"))
    smax = chi.max_abs_slope
    band = chi.w * smax if slack is None else float(slack)
    for rec in tbl:
        for cz in range(rec.cz_lo, rec.cz_hi + 1):
            w = amb.omega_of_chern(shrink_chern_number(cz, n))
            if w is None:
                continue
            hi = min(1.0, smax / rec.action)
            lines.append(DiagramLine(f"{rec.label}/cz={cz}", -w, (1 - delta) * rec.action, 0.0, hi,
                                     "sloped", band))
    return Diagram(tuple(lines), (0.0, 0.0), 1.0)


# ---------------------------------------------------------------------------
# tracking
# ---------------------------------------------------------------------------
def _switch_window(a: DiagramLine, b: DiagramLine) -> tuple[float, float] | None:
    """Parameters where ``a`` and ``b`` meet (within their bands), as an interval."""
    lo, hi = max(a.tau_lo, b.tau_lo), min(a.tau_hi, b.tau_hi)
    if lo > hi + TRACK_TOL:
        return None
    hi = max(lo, hi)
    scale = max(1.0, abs(a.at(lo)), abs(b.at(lo)), abs(a.at(hi)), abs(b.at(hi)))
    band = a.slack + b.slack
    # d(tau) = a(tau) - b(tau) is linear
    d0 = a.at(lo) - b.at(lo)
    ds = a.slope - b.slope
    if abs(ds) <= TRACK_TOL * max(1.0, abs(a.slope), abs(b.slope)):
        return (lo, hi) if abs(d0) <= band + TRACK_TOL * scale else None
    t1 = lo + (-band - d0) / ds
    t2 = lo + (band - d0) / ds
    p, q = max(lo, min(t1, t2)), min(hi, max(t1, t2))
    # meeting points just outside the common range still count, up to rounding
    gap = TRACK_TOL * scale / abs(ds)
    if p > q + gap:
        return None
    p = min(p, hi)
    return p, max(p, q)


def _initial_lines(d: Diagram) -> list[int]:
    tau0, y0 = d.start
    if d.start_line is not None:
        idx = [i for i, ln in enumerate(d.lines) if ln.label == d.start_line]
        if not idx:
            raise DiagramError(f"start line {d.start_line!r} is not in the diagram")
        return idx
    out = []
    for i, ln in enumerate(d.lines):
        if ln.alive(tau0) and abs(ln.at(tau0) - y0) <= ln.slack + TRACK_TOL * max(1.0, abs(y0)):
            out.append(i)
    if d.lines and not out:
        raise DiagramError("no line passes through the start point")
    return out


@dataclass(frozen=True)
class TrackResult:
    """Outcome of :func:`track_spectral_invariant`.

    ``reachable`` maps each reachable line label to the earliest parameter at
    which the invariant can be on it; ``path`` is the upper envelope of the
    reachable region as ``(tau, value)`` breakpoints.
    """

    path: tuple
    final_value: float | None
    max_bound: float
    reachable: dict = field(default_factory=dict)
    end_values: tuple = ()


def track_spectral_invariant(d: Diagram) -> TrackResult:
    """Reachable set of the spectral invariant under switching at intersections.

    Raises
    ------
    DiagramError
        If no line passes through the start or no reachable line survives
        until ``tau_end``.
    """
    tau0, y0 = d.start
    tau_end = d.tau_end
    if not d.lines:
        pts = ((tau0, y0), (tau_end, y0))
        return TrackResult(pts, y0, y0, {}, (y0,))
    lines = d.lines
    earliest = [math.inf] * len(lines)
    heap = []
    for i in _initial_lines(d):
        earliest[i] = tau0
        heapq.heappush(heap, (tau0, i))
    done = [False] * len(lines)
    while heap:
        t, i = heapq.heappop(heap)
        if done[i] or t > earliest[i]:
            continue
        done[i] = True
        for j, other in enumerate(lines):
            if j == i or done[j]:
                continue
            win = _switch_window(lines[i], other)
            if win is None:
                continue
            e = max(t, win[0])
            if e <= win[1] + TRACK_TOL and e <= tau_end + TRACK_TOL and e < earliest[j]:
                earliest[j] = e
                heapq.heappush(heap, (e, j))
    reach = [i for i in range(len(lines)) if earliest[i] <= tau_end + TRACK_TOL]
    at_end = [i for i in reach if lines[i].alive(tau_end)]
    if not at_end:
        raise DiagramError("no reachable line survives until tau_end")
    end_vals = sorted(lines[i].at(tau_end) for i in at_end)
    bound = float(max(lines[i].at(tau_end) + lines[i].slack for i in at_end))
    distinct = [end_vals[0]]
    for v in end_vals[1:]:
        if abs(v - distinct[-1]) > TRACK_TOL * max(1.0, abs(v)):
            distinct.append(v)
    exact = all(lines[i].slack == 0 for i in at_end)
    final = distinct[0] if len(distinct) == 1 and exact else None

    # upper envelope of the reachable region
    events = {tau0, tau_end}
    for i in reach:
        for t in (earliest[i], lines[i].tau_lo, lines[i].tau_hi):
            if tau0 <= t <= tau_end:
                events.add(t)
        for j in reach:
            if j <= i:
                continue
            ds = lines[i].slope - lines[j].slope
            if ds != 0:
                t = lines[j].tau_lo + (lines[j].start - lines[i].at(lines[j].tau_lo)) / ds
                if tau0 <= t <= tau_end:
                    events.add(t)
    path = []
    for t in sorted(events):
        vals = [lines[i].at(t) for i in reach if earliest[i] <= t + TRACK_TOL and lines[i].alive(t)]
        if vals:
            path.append((t, max(vals)))
    labels = {lines[i].label: earliest[i] for i in reach}
    return TrackResult(tuple(path), final, bound, labels, tuple(end_vals))


def brute_force_max_bound(d: Diagram) -> tuple[float, tuple]:
    """Exhaustive search over switch sequences (at most eight lines).

    Returns the maximal value at ``tau_end`` and the sorted end values of
    every reachable line.  Exponential in the number of lines; used to
    cross-check :func:`track_spectral_invariant`.
    """
    if len(d.lines) > BRUTE_FORCE_MAX_LINES:
        raise InputError(f"brute force is limited to {BRUTE_FORCE_MAX_LINES} lines")
    tau_end = d.tau_end
    ends: dict[int, float] = {}

    def walk(i: int, t: float, visited: frozenset):
        ln = d.lines[i]
        if ln.alive(tau_end):
            ends[i] = ln.at(tau_end) + ln.slack
        for j, other in enumerate(d.lines):
            if j in visited:
                continue
            win = _switch_window(ln, other)
            if win is None:
                continue
            e = max(t, win[0])
            if e <= win[1] + TRACK_TOL and e <= tau_end + TRACK_TOL:
                walk(j, e, visited | {j})

    for i in _initial_lines(d):
        walk(i, d.start[0], frozenset([i]))
    if not ends:
        raise DiagramError("no reachable line survives until tau_end")
    return max(ends.values()), tuple(sorted(ends.values()))


def portability_bound(samples: Sequence[Sequence[float]]) -> float:
    """Extrapolate ``e(s) / s`` to ``s -> 0`` from the two smallest ``s``.

    ``samples`` holds ``(s, energy)`` pairs, ``energy`` being the
    displacement energy of the domain rescaled by ``s``.

    Raises
    ------
    InsufficientSamples
        With fewer than two distinct positive scales.
    """
    pts = sorted((float(s), float(e)) for s, e in samples if float(s) > 0)
    scales = sorted({s for s, _ in pts})
    if len(scales) < 2:
        raise InsufficientSamples("need energies at two distinct positive scales")
    (s1, e1) = next(p for p in pts if p[0] == scales[0])
    (s2, e2) = next(p for p in pts if p[0] == scales[1])
    r1, r2 = e1 / s1, e2 / s2
    return r1 - s1 * (r2 - r1) / (s2 - s1)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------
def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def diagram_csv(d: Diagram) -> str:
    """CSV with columns ``label,start,slope,tau_lo,tau_hi,kind``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "start", "slope", "tau_lo", "tau_hi", "kind"])
    for ln in d.lines:
        w.writerow([ln.label, _fmt(ln.start), _fmt(ln.slope), _fmt(ln.tau_lo), _fmt(ln.tau_hi), ln.kind])
    return buf.getvalue()


def diagram_svg(d: Diagram, result: TrackResult | None = None, width: int = 640, height: int = 400) -> str:
    """Plain SVG drawing of the lines, the start point and the tracked envelope."""
    tau0, y0 = d.start
    taus = [tau0, d.tau_end] + [t for ln in d.lines for t in (ln.tau_lo, ln.tau_hi)]
    ys = [y0] + [v for ln in d.lines for v in (ln.at(ln.tau_lo), ln.at(ln.tau_hi))]
    if result:
        ys += [v for _, v in result.path]
    t_lo, t_hi = min(taus), max(taus)
    v_lo, v_hi = min(ys), max(ys)
    if t_hi == t_lo:
        t_hi = t_lo + 1.0
    if v_hi == v_lo:
        v_lo, v_hi = v_lo - 1.0, v_hi + 1.0
    pad = 30

    def px(t, v):
        x = pad + (t - t_lo) / (t_hi - t_lo) * (width - 2 * pad)
        y = height - pad - (v - v_lo) / (v_hi - v_lo) * (height - 2 * pad)
        return f"{x:.3f}", f"{y:.3f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    colours = {"sloped": "#1f77b4", "horizontal": "#7f7f7f"}
    for ln in d.lines:
        x1, y1 = px(ln.tau_lo, ln.at(ln.tau_lo))
        x2, y2 = px(ln.tau_hi, ln.at(ln.tau_hi))
        out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{colours.get(ln.kind, "#2ca02c")}" '
                   f'stroke-width="1"><title>{ln.label}</title></line>')
    if result and result.path:
        pts = " ".join(",".join(px(t, v)) for t, v in result.path)
        out.append(f'<polyline points="{pts}" fill="none" stroke="#d62728" stroke-width="2"/>')
    cx, cy = px(tau0, y0)
    out.append(f'<circle cx="{cx}" cy="{cy}" r="4" fill="#d62728"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
