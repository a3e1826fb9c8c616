"""Paths of symplectic matrices and their Robbin-Salamon index.

Conventions
-----------
Phase space is ``R^{2m}`` with coordinates ordered in conjugate pairs
``(x_1, y_1, ..., x_m, y_m)``, so the standard complex structure is the
block diagonal matrix ``J0 = diag([[0, -1], [1, 0]], ...)``.  With this
ordering a direct sum of symplectic matrices is plain ``block_diag``.

A path solves ``dPhi/dt = J0 S(t) Phi`` for a symmetric generator ``S``;
equivalently ``S = -J0 Phi' Phi^{-1}``.  The index is accumulated from
crossings (times where ``Phi(t)`` has eigenvalue one), each weighted by
the signature of ``S`` restricted to ``ker(Phi - I)``, with half weight at
the two endpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import block_diag
from scipy.optimize import minimize_scalar

from .errors import (
    ContinuumCrossing,
    IllConditionedKernel,
    InputError,
    NonSymmetricGenerator,
    SymplecticDriftExceeded,
    UnresolvableDegeneracy,
)
from .halfint import HalfInt

SYMMETRY_TOL = 1e-10
DRIFT_TOL = 1e-8
KERNEL_RTOL = 1e-8
DET_RTOL = 1e-9
REGULAR_RTOL = 1e-6
PERTURB_EPS = 1e-7
PERTURB_RETRIES = 4
PERTURB_MARGIN = 100.0
SUBDIVISION = 16



def standard_j(dim: int) -> np.ndarray:
    """Return ``J0`` for ``R^dim`` in pair ordering."""
    if dim <= 0 or dim % 2:
        raise InputError(f"dimension must be positive and even, got {dim}")
    return block_diag(*([np.array([[0.0, -1.0], [1.0, 0.0]])] * (dim // 2)))


def symplectic_residual(phi: np.ndarray) -> float:
    """Max-norm of ``Phi^T J0 Phi - J0``."""
    j = standard_j(phi.shape[0])
    return float(np.max(np.abs(phi.T @ j @ phi - j)))


def _project(phi: np.ndarray, j: np.ndarray, sweeps: int = 3) -> np.ndarray:
    # Newton-type correction Phi <- Phi (I + J R / 2), R = Phi^T J Phi - J.
    for _ in range(sweeps):
        r = phi.T @ j @ phi - j
        if np.max(np.abs(r)) < 1e-15:
            break
        phi = phi + 0.5 * phi @ (j @ r)
    return phi


def rotation(theta: float) -> np.ndarray:
    """The 2x2 rotation ``exp(theta J0)``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SymmetricGenerator:
    """A time-dependent symmetric matrix ``S(t)`` on ``[0, T]``.

    Parameters
    ----------
    dim:
        Even ambient dimension.
    T:
        Length of the time interval.
    func:
        Callable returning the matrix at time ``t``.
    blocks:
        Component generators when this one is a direct sum.
    """

    dim: int
    T: float
    func: Callable[[float], np.ndarray]
    blocks: tuple = ()

    def __post_init__(self):
        if self.dim <= 0 or self.dim % 2:
            raise InputError(f"dimension must be positive and even, got {self.dim}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise InputError(f"path length must be positive, got {self.T}")

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.func(t), dtype=float)

    def checked(self, t: float) -> np.ndarray:
        s = self(t)
        if s.shape != (self.dim, self.dim):
            raise InputError(f"generator has shape {s.shape}, expected {(self.dim, self.dim)}")
        if not np.all(np.isfinite(s)):
            raise InputError(f"generator is not finite at t={t}")
        if np.max(np.abs(s - s.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(s))):
            raise NonSymmetricGenerator(f"generator is not symmetric at t={t:.6g}")
        return s

    # constructors
    @classmethod
    def constant(cls, matrix, T: float = 1.0) -> "SymmetricGenerator":
        m = np.array(matrix, dtype=float)
        return cls(m.shape[0], float(T), lambda t: m)

    @classmethod
    def rotation(cls, theta: float, T: float = 1.0) -> "SymmetricGenerator":
        """Generator of ``t -> exp(theta t / T J0)`` in dimension two."""
        return cls.constant(np.eye(2) * (theta / T), T)

    @classmethod
    def shear(cls, b: float, T: float = 1.0) -> "SymmetricGenerator":
        """Generator of the shear ``[[1, 0], [b t, 1]]``."""
        return cls.constant(np.diag([b, 0.0]), T)

    @classmethod
    def polynomial(cls, coefficients: Sequence, T: float = 1.0) -> "SymmetricGenerator":
        """``S(t) = sum_k C_k t^k``."""
        cs = [np.array(c, dtype=float) for c in coefficients]

        def f(t):
            out = cs[-1]
            for c in cs[-2::-1]:
                out = out * t + c
            return out

        return cls(cs[0].shape[0], float(T), f)

    @classmethod
    def samples(cls, times: Sequence[float], matrices: Sequence) -> "SymmetricGenerator":
        """Piecewise-linear interpolation of sampled matrices."""
        ts = np.asarray(times, dtype=float)
        ms = np.asarray(matrices, dtype=float)
        if ts.ndim != 1 or len(ts) < 2 or np.any(np.diff(ts) <= 0) or ts[0] != 0.0:
            raise InputError("sample times must start at 0 and increase strictly")

        def f(t):
            i = int(np.clip(np.searchsorted(ts, t) - 1, 0, len(ts) - 2))
            w = (t - ts[i]) / (ts[i + 1] - ts[i])
            return (1 - w) * ms[i] + w * ms[i + 1]

        return cls(ms.shape[1], float(ts[-1]), f)

    @classmethod
    def direct_sum(cls, *gens: "SymmetricGenerator") -> "SymmetricGenerator":
        T = gens[0].T
        if any(abs(g.T - T) > 1e-12 * T for g in gens):
            raise InputError("direct sum needs generators on a common interval")
        return cls(sum(g.dim for g in gens), T, lambda t: block_diag(*[g(t) for g in gens]), tuple(gens))


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------
class SymplecticPath:
    """Sampled symplectic path with an evaluator for intermediate times.

    The samples drive the crossing search; ``at`` and ``generator_at``
    answer queries between samples.  ``blocks`` records a direct-sum
    splitting when one is known.
    """

    def __init__(
        self,
        times: np.ndarray,
        mats: np.ndarray,
        gens: np.ndarray,
        phi_fn: Callable[[float], np.ndarray],
        gen_fn: Callable[[float], np.ndarray],
        blocks: tuple = (),
    ):
        self.times = np.asarray(times, dtype=float)
        self.mats = np.asarray(mats, dtype=float)
        self.gens = np.asarray(gens, dtype=float)
        self._phi = phi_fn
        self._gen = gen_fn
        self.blocks = tuple(blocks)

    @property
    def dim(self) -> int:
        return self.mats.shape[1]

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    def at(self, t: float) -> np.ndarray:
        return self._phi(float(t))

    def generator_at(self, t: float) -> np.ndarray:
        return self._gen(float(t))

    def start(self) -> np.ndarray:
        return self.mats[0]

    def end(self) -> np.ndarray:
        return self.mats[-1]

    def __repr__(self):
        return f"SymplecticPath(dim={self.dim}, T={self.T:.6g}, steps={self.steps})"

    # -- construction helpers ------------------------------------------------
    @classmethod
    def from_functions(cls, phi_fn, gen_fn, T: float, steps: int, blocks: tuple = ()) -> "SymplecticPath":
        """Build a path from closed-form ``Phi(t)`` and ``S(t)``."""
        times = np.linspace(0.0, T, steps + 1)
        mats = np.array([phi_fn(t) for t in times])
        gens = np.array([gen_fn(t) for t in times])
        return cls(times, mats, gens, phi_fn, gen_fn, blocks)

    @classmethod
    def from_samples(cls, times: Sequence[float], matrices: Sequence) -> "SymplecticPath":
        """Path known only through samples; uses a cubic spline in between.

        The generator is recovered from the spline derivative, so the index
        is only as trustworthy as the sampling density.
        """
        from scipy.interpolate import CubicSpline

        ts = np.asarray(times, dtype=float)
        ms = np.asarray(matrices, dtype=float)
        if ts[0] != 0.0 or np.any(np.diff(ts) <= 0):
            raise InputError("sample times must start at 0 and increase strictly")
        j = standard_j(ms.shape[1])
        for t, m in zip(ts, ms):
            if symplectic_residual(m) > DRIFT_TOL * max(1.0, np.max(np.abs(m)) ** 2):
                raise InputError(f"sample at t={t:.6g} is not symplectic")
        spline = CubicSpline(ts, ms, axis=0)
        dspline = spline.derivative()

        def phi_fn(t):
            return _project(spline(t), j)

        def gen_fn(t):
            s = -j @ dspline(t) @ np.linalg.inv(spline(t))
            return 0.5 * (s + s.T)

        gens = np.array([gen_fn(t) for t in ts])
        return cls(ts, ms, gens, phi_fn, gen_fn)


def _rk4_step(gen: SymmetricGenerator, j: np.ndarray, t: float, h: float, phi: np.ndarray) -> np.ndarray:
    a = j @ gen(t)
    b = j @ gen(t + 0.5 * h)
    c = j @ gen(t + h)
    k1 = a @ phi
    k2 = b @ (phi + 0.5 * h * k1)
    k3 = b @ (phi + 0.5 * h * k2)
    k4 = c @ (phi + h * k3)
    return phi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_path(gen: SymmetricGenerator, steps: int, start: np.ndarray | None = None) -> SymplecticPath:
    """Integrate ``Phi' = J0 S(t) Phi`` with fixed-step RK4.

    After every step the iterate is pulled back to the symplectic group.

    Parameters
    ----------
    gen:
        Symmetric generator; symmetry is checked at every sample.
    steps:
        Number of RK4 steps on ``[0, T]``.
    start:
        Initial matrix, identity by default.

    Raises
    ------
    NonSymmetricGenerator
        If ``S(t)`` fails the symmetry check at a sample.
    SymplecticDriftExceeded
        If the symplectic residual exceeds ``1e-8`` after projection.
    """
    if steps < 1:
        raise InputError("steps must be at least 1")
    j = standard_j(gen.dim)
    phi0 = np.eye(gen.dim) if start is None else np.array(start, dtype=float)
    times = np.linspace(0.0, gen.T, steps + 1)
    mats = np.empty((steps + 1, gen.dim, gen.dim))
    gens = np.empty_like(mats)
    mats[0] = phi0
    gens[0] = gen.checked(0.0)
    for i in range(steps):
        h = times[i + 1] - times[i]
        nxt = _project(_rk4_step(gen, j, times[i], h, mats[i]), j)
        scale = max(1.0, float(np.max(np.abs(nxt)))) ** 2
        if np.max(np.abs(nxt.T @ j @ nxt - j)) > DRIFT_TOL * scale:
            raise SymplecticDriftExceeded(f"symplectic residual too large at t={times[i + 1]:.6g}")
        mats[i + 1] = nxt
        gens[i + 1] = gen.checked(times[i + 1])

    def phi_fn(t):
        i = int(np.clip(round(t / gen.T * steps), 0, steps))
        h = t - times[i]
        if h == 0.0:
            return mats[i]
        return _project(_rk4_step(gen, j, times[i], h, mats[i]), j)

    blocks = ()
    if gen.blocks and start is None:
        blocks = tuple(integrate_path(g, steps) for g in gen.blocks)
    return SymplecticPath(times, mats, gens, phi_fn, gen, blocks)


def suggest_steps(norm_bound: float, T: float, minimum: int = 64) -> int:
    """RK4 step count for a generator with ``|S(t)| <= norm_bound`` on ``[0, T]``.

    One step per ``0.01`` radians keeps the accumulated phase error well
    below the kernel threshold.
    """
    return max(minimum, int(math.ceil(norm_bound * T / 0.01)))


def rotation_path(theta: float, T: float = 1.0, steps: int | None = None) -> SymplecticPath:
    """Integrated path ``t -> exp(theta t / T J0)`` in dimension two."""
    steps = steps or suggest_steps(abs(theta) / T, T)
    return integrate_path(SymmetricGenerator.rotation(theta, T), steps)


def shear_path(b: float, T: float = 1.0, steps: int = 64) -> SymplecticPath:
    """Integrated shear ``t -> [[1, 0], [b t, 1]]``."""
    return integrate_path(SymmetricGenerator.shear(b, T), steps)


# -- algebra of paths ---------------------------------------------------------
def direct_sum(*paths: SymplecticPath, steps: int | None = None) -> SymplecticPath:
    """Block-diagonal path ``Phi_1 (+) Phi_2 (+) ...`` on a common interval."""
    T = paths[0].T
    if any(abs(p.T - T) > 1e-12 * T for p in paths):
        raise InputError("direct sum needs paths on a common interval")
    steps = steps or max(p.steps for p in paths)

    def phi_fn(t):
        return block_diag(*[p.at(t) for p in paths])

    def gen_fn(t):
        return block_diag(*[p.generator_at(t) for p in paths])

    return SymplecticPath.from_functions(phi_fn, gen_fn, T, steps, blocks=tuple(paths))


def reverse(path: SymplecticPath) -> SymplecticPath:
    """``t -> Phi(T - t)``; its generator is ``-S(T - t)``."""
    T = path.T
    blocks = tuple(reverse(b) for b in path.blocks)
    return SymplecticPath(
        T - path.times[::-1],
        path.mats[::-1],
        -path.gens[::-1],
        lambda t: path.at(T - t),
        lambda t: -path.generator_at(T - t),
        blocks,
    )


def transpose(path: SymplecticPath) -> SymplecticPath:
    """``t -> Phi(t)^T``."""
    j = standard_j(path.dim)

    def gen_fn(t):
        phi = path.at(t)
        s = j @ phi.T @ path.generator_at(t) @ phi @ j
        return 0.5 * (s + s.T)

    return SymplecticPath.from_functions(
        lambda t: path.at(t).T, gen_fn, path.T, path.steps, tuple(transpose(b) for b in path.blocks)
    )


def conjugate(path: SymplecticPath, psi: np.ndarray) -> SymplecticPath:
    """``t -> Psi Phi(t) Psi^{-1}`` for a fixed symplectic ``Psi``."""
    psi = np.asarray(psi, dtype=float)
    if symplectic_residual(psi) > DRIFT_TOL * max(1.0, np.max(np.abs(psi))) ** 2:
        raise InputError("conjugator is not symplectic")
    pinv = np.linalg.inv(psi)

    def gen_fn(t):
        s = pinv.T @ path.generator_at(t) @ pinv
        return 0.5 * (s + s.T)

    return SymplecticPath.from_functions(lambda t: psi @ path.at(t) @ pinv, gen_fn, path.T, path.steps)


def restrict(path: SymplecticPath, t0: float, t1: float, steps: int | None = None) -> SymplecticPath:
    """The piece of ``path`` on ``[t0, t1]``, re-based to start at time 0."""
    if not (0.0 <= t0 < t1 <= path.T):
        raise InputError("restriction interval must satisfy 0 <= t0 < t1 <= T")
    steps = steps or max(8, int(math.ceil(path.steps * (t1 - t0) / path.T)))
    blocks = tuple(restrict(b, t0, t1, steps) for b in path.blocks)
    return SymplecticPath.from_functions(
        lambda t: path.at(t0 + t), lambda t: path.generator_at(t0 + t), t1 - t0, steps, blocks
    )


def concatenate(first: SymplecticPath, second: SymplecticPath) -> SymplecticPath:
    """Run ``first`` and then ``second``; their junction matrices must agree."""
    gap = np.max(np.abs(first.end() - second.start()))
    if gap > 1e-8 * max(1.0, np.max(np.abs(first.end()))):
        raise InputError(f"paths do not meet (gap {gap:.3g})")
    Ta = first.T

    def phi_fn(t):
        return first.at(t) if t <= Ta else second.at(t - Ta)

    def gen_fn(t):
        return first.generator_at(t) if t <= Ta else second.generator_at(t - Ta)

    times = np.concatenate([first.times, Ta + second.times[1:]])
    mats = np.concatenate([first.mats, second.mats[1:]])
    gens = np.concatenate([first.gens, second.gens[1:]])
    return SymplecticPath(times, mats, gens, phi_fn, gen_fn)


def perturb_fixed_ends(path: SymplecticPath, a: np.ndarray, eps: float, center: float, width: float) -> SymplecticPath:
    """``t -> Phi(t) exp(eps h(t) J0 A)`` with ``h`` supported near ``center``.

    ``h`` vanishes with its derivative at ``center +- width`` and has unit
    slope at ``center``, so the endpoints are untouched and the generator
    changes by ``eps h'(t) Phi^{-T} A Phi^{-1}``.
    """
    from scipy.linalg import expm

    j = standard_j(path.dim)
    ja = j @ np.asarray(a, dtype=float)

    def bump(t):
        x = (t - center) / width
        if abs(x) >= 1.0:
            return 0.0, 0.0
        return width * (1 + x) ** 3 * (1 - x) ** 2, (1 + x) ** 2 * (1 - x) * (1 - 5 * x)

    def phi_fn(t):
        h, _ = bump(t)
        base = path.at(t)
        return base if h == 0.0 else base @ expm(eps * h * ja)

    def gen_fn(t):
        _, dh = bump(t)
        s = path.generator_at(t)
        if dh == 0.0:
            return s
        pinv = np.linalg.inv(path.at(t))
        extra = pinv.T @ np.asarray(a, dtype=float) @ pinv
        return s + eps * dh * 0.5 * (extra + extra.T)

    lo = max(0, int(math.floor((center - width) / path.T * path.steps)))
    hi = min(path.steps, int(math.ceil((center + width) / path.T * path.steps)))
    times = path.times.copy()
    mats = path.mats.copy()
    gens = path.gens.copy()
    for i in range(lo, hi + 1):
        mats[i] = phi_fn(times[i])
        gens[i] = gen_fn(times[i])
    return SymplecticPath(times, mats, gens, phi_fn, gen_fn)


# ---------------------------------------------------------------------------
# crossings
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Crossing:
    """An isolated crossing of a path with the eigenvalue-one locus.

    Attributes
    ----------
    t:
        Crossing time.
    kernel_dim:
        ``dim ker(Phi(t) - I)``.
    form_eigenvalues:
        Eigenvalues of the crossing form restricted to the kernel.
    endpoint:
        True for crossings at ``t = 0`` or ``t = T``.
    det:
        ``|det(Phi(t) - I)|`` at the refined time.
    """

    t: float
    kernel_dim: int
    form_eigenvalues: tuple
    signature: int
    regular: bool
    endpoint: bool
    det: float = field(default=0.0, compare=False)


def _smallest_sv(m: np.ndarray) -> np.ndarray:
    return np.linalg.svd(m, compute_uv=False)[..., -1]


def _norm2(m: np.ndarray) -> np.ndarray:
    return np.linalg.svd(m, compute_uv=False)[..., 0]


def _threshold(phi_norm) -> np.ndarray:
    return KERNEL_RTOL * np.maximum(1.0, phi_norm)


def _analyse(path: SymplecticPath, t: float, endpoint: bool) -> Crossing:
    phi = path.at(t)
    n = phi.shape[0]
    m = phi - np.eye(n)
    _, sv, vt = np.linalg.svd(m)
    thr = KERNEL_RTOL * max(1.0, float(sv[0]))
    ker = sv <= thr
    if np.any((sv > thr) & (sv <= 1e2 * thr)):
        raise IllConditionedKernel(f"kernel dimension is ambiguous at t={t:.12g}")
    k = vt[ker].T
    s = path.generator_at(t)
    gamma = k.T @ s @ k
    eig = np.linalg.eigvalsh(0.5 * (gamma + gamma.T))
    scale = max(1.0, float(np.linalg.norm(s, 2)))
    regular = bool(np.all(np.abs(eig) > REGULAR_RTOL * scale))
    sig = int(np.sum(eig > 0) - np.sum(eig < 0))
    return Crossing(
        t=float(t),
        kernel_dim=int(ker.sum()),
        form_eigenvalues=tuple(float(e) for e in eig),
        signature=sig,
        regular=regular,
        endpoint=endpoint,
        det=float(abs(np.linalg.det(m))),
    )


def _sv_slope(path: SymplecticPath, t: float, j: np.ndarray, eye: np.ndarray) -> tuple[float, float, float]:
    """Smallest singular value of ``Phi(t) - I``, its time derivative and the largest one.

    For a cluster of (nearly) equal smallest singular values the derivative
    of the smallest branch is the least eigenvalue of the symmetrised
    restriction of ``Phi'`` to the cluster.
    """
    phi = path.at(t)
    u, sv, vt = np.linalg.svd(phi - eye)
    sig = float(sv[-1])
    band = 1e-6 * max(sig, 1e-300) + 1e-12 * max(1.0, float(sv[0]))
    c = int(np.sum(sv - sig <= band))
    dphi = j @ path.generator_at(t) @ phi
    block = u[:, -c:].T @ dphi @ vt[-c:].T
    d = float(np.linalg.eigvalsh(0.5 * (block + block.T))[0]) if c > 1 else float(block[0, 0])
    return sig, d, float(sv[0])


def _refine(path: SymplecticPath, lo: float, hi: float, tol: float, sigma_sq) -> float:
    # Newton on the analytic singular value, then bisection on its slope
    j = standard_j(path.dim)
    eye = np.eye(path.dim)
    t = 0.5 * (lo + hi)
    for _ in range(60):
        sig, d, top = _sv_slope(path, t, j, eye)
        if sig <= 1e-3 * KERNEL_RTOL * max(1.0, top):
            return t
        if d == 0.0:
            break
        tn = t - sig / d
        if not lo <= tn <= hi:
            break
        if abs(tn - t) <= tol:
            return tn
        t = tn
    a, b = lo, hi
    if _sv_slope(path, a, j, eye)[1] < 0 < _sv_slope(path, b, j, eye)[1]:
        while b - a > tol:
            m = 0.5 * (a + b)
            if _sv_slope(path, m, j, eye)[1] < 0:
                a = m
            else:
                b = m
        return 0.5 * (a + b)
    res = minimize_scalar(sigma_sq, bounds=(lo, hi), method="bounded", options={"xatol": tol, "maxiter": 500})
    return float(res.x)


def _smallest_triplets(mats: np.ndarray, gens: np.ndarray, j: np.ndarray):
    """Smallest singular value of ``Phi - I`` and its time derivative, batched."""
    eye = np.eye(mats.shape[-1])
    u, sv, vt = np.linalg.svd(mats - eye)
    dphi = j @ gens @ mats
    d = np.einsum("...i,...ij,...j->...", u[..., :, -1], dphi, vt[..., -1, :])
    return sv[..., -1], sv[..., 0], d


def _flagged_cells(times, sig, dsig, below, interior=(False, False)) -> list[int]:
    """Cells ``[t_i, t_{i+1}]`` that may contain an interior crossing.

    A cell is flagged when ``sigma`` is below the kernel threshold at an
    interior node, when the derivative changes sign from negative to
    positive, or when a linear extrapolation from either end reaches zero.
    ``interior`` says whether the first and last node are interior points
    of the whole path.
    """
    n = len(times)
    out = []
    for i in range(n - 1):
        w = times[i + 1] - times[i]
        sa, sb, da, db = sig[i], sig[i + 1], dsig[i], dsig[i + 1]
        first_inner = 0 < i or interior[0]
        last_inner = i + 1 < n - 1 or interior[1]
        if ((below[i] and first_inner)
                or (below[i + 1] and last_inner)
                or (da < 0 < db)
                or (da < 0 and sa + 1.5 * da * w <= 0)
                or (db > 0 and sb - 1.5 * db * w <= 0)):
            out.append(i)
    return out


def _runs(idx: list[int]) -> list[tuple[int, int]]:
    """Group sorted indices into maximal runs of consecutive integers."""
    out: list[tuple[int, int]] = []
    for i in idx:
        if out and i == out[-1][1] + 1:
            out[-1] = (out[-1][0], i)
        else:
            out.append((i, i))
    return out


def find_crossings(path: SymplecticPath, tol: float | None = None) -> list[Crossing]:
    """Locate every crossing of ``path`` and evaluate its crossing form.

    On each grid cell the smallest singular value ``sigma`` of ``Phi - I``
    and its derivative ``u^T Phi' v`` flag candidate cells: ``sigma`` below
    the kernel threshold at an end, a sign change of the derivative, or a
    linear extrapolation reaching zero inside the cell.  Each run of
    adjacent flagged cells is rescanned with ``SUBDIVISION`` subcells per
    cell, and each run of adjacent flagged subcells is refined to a single
    crossing by Newton steps on the analytic singular value, to time
    accuracy ``tol`` (default ``1e-12 T``).  Crossings closer than about
    one subcell may therefore be merged.

    Raises
    ------
    ContinuumCrossing
        If ``Phi - I`` stays singular over a stretch of the path.
    IllConditionedKernel
        If the kernel dimension cannot be decided at a crossing.
    """
    T = path.T
    tol = 1e-12 * T if tol is None else float(tol)
    times, mats, gens = path.times, path.mats, path.gens
    j = standard_j(path.dim)
    eye = np.eye(path.dim)
    sig, top, dsig = _smallest_triplets(mats, gens, j)
    thr = _threshold(_norm2(mats))

    below = sig <= thr
    run = 0
    for flag in below:
        run = run + 1 if flag else 0
        if run >= 3:
            raise ContinuumCrossing("Phi(t) - I is singular on an interval")

    def sigma_sq(t):
        return float(_smallest_sv(path.at(t) - eye)) ** 2

    out: list[Crossing] = []
    if below[0]:
        out.append(_analyse(path, 0.0, True))
    if below[-1]:
        out.append(_analyse(path, T, True))
    last = len(times) - 1
    for i0, i1 in _runs(_flagged_cells(times, sig, dsig, below)):
        # a flagged stretch may hide several crossings: rescan it on a finer grid
        a, b = times[i0], times[i1 + 1]
        sub_t = np.linspace(a, b, SUBDIVISION * (i1 + 1 - i0) + 1)
        sub_m = np.array([path.at(t) for t in sub_t])
        sub_g = np.array([path.generator_at(t) for t in sub_t])
        s_sig, _, s_d = _smallest_triplets(sub_m, sub_g, j)
        s_below = s_sig <= _threshold(_norm2(sub_m))
        w = (times[1] - times[0]) / SUBDIVISION
        sub_cells = _flagged_cells(sub_t, s_sig, s_d, s_below, interior=(i0 > 0, i1 + 1 < last))
        for k0, k1 in _runs(sub_cells):
            lo, hi = max(0.0, sub_t[k0] - 0.5 * w), min(T, sub_t[k1 + 1] + 0.5 * w)
            tc = _refine(path, lo, hi, tol, sigma_sq)
            phi_c = path.at(tc)
            if float(_smallest_sv(phi_c - eye)) > float(_threshold(_norm2(phi_c))):
                continue
            # an endpoint crossing absorbs its own subcell
            if any(abs(tc - c.t) <= w for c in out):
                continue
            out.append(_analyse(path, tc, False))
    out.sort(key=lambda c: c.t)
    return out


# ---------------------------------------------------------------------------
# index
# ---------------------------------------------------------------------------
def _crossing_sum(crossings: list[Crossing]) -> HalfInt:
    doubled = 0
    for c in crossings:
        doubled += c.signature if c.endpoint else 2 * c.signature
    return HalfInt(doubled)


def _unipotent_index(path: SymplecticPath) -> HalfInt | None:
    """Closed form for 2x2 triangular unipotent paths (shears), else None."""
    if path.dim != 2:
        return None
    m = path.mats
    scale = 1e-9 * max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m[:, 0, 0] - 1)) > scale or np.max(np.abs(m[:, 1, 1] - 1)) > scale:
        return None

    def sgn(x):
        return 0 if abs(x) <= scale else (1 if x > 0 else -1)

    if np.max(np.abs(m[:, 0, 1])) <= scale:
        c0, c1 = m[0, 1, 0], m[-1, 1, 0]
        return HalfInt(sgn(c1) - sgn(c0))
    if np.max(np.abs(m[:, 1, 0])) <= scale:
        c0, c1 = m[0, 0, 1], m[-1, 0, 1]
        return HalfInt(sgn(c0) - sgn(c1))
    return None


def rs_shear(b: float, T: float = 1.0) -> HalfInt:
    """Index of the shear ``t -> [[1, 0], [b t, 1]]`` on ``[0, T]``."""
    if not T > 0:
        raise InputError("T must be positive")
    return HalfInt(int(np.sign(b)))


def rs_index(path: SymplecticPath, tol: float | None = None) -> HalfInt:
    """Robbin-Salamon index of ``path``.

    Non-regular interior crossings are resolved by a fixed-endpoint
    perturbation ``Phi(t) exp(eps h(t) J0)`` localised around the crossing,
    starting at ``eps = 1e-7`` (raised so that the displacement is
    ``PERTURB_MARGIN`` times the kernel threshold) and doubling up to four
    times.  Totally
    degenerate pieces are handled through a known direct-sum splitting or
    the closed form for shears.

    Raises
    ------
    UnresolvableDegeneracy
        If a degenerate crossing survives every perturbation, sits at an
        endpoint, or the path is singular on an interval with no closed form.
    """
    try:
        crossings = find_crossings(path, tol)
    except ContinuumCrossing as exc:
        if path.blocks:
            return sum((rs_index(b, tol) for b in path.blocks), HalfInt(0))
        closed = _unipotent_index(path)
        if closed is not None:
            return closed
        raise UnresolvableDegeneracy(str(exc)) from exc
    if all(c.regular for c in crossings):
        return _crossing_sum(crossings)
    bad = [c for c in crossings if not c.regular]
    if any(c.endpoint for c in bad):
        if path.blocks:
            return sum((rs_index(b, tol) for b in path.blocks), HalfInt(0))
        raise UnresolvableDegeneracy(f"degenerate crossing form at endpoint t={bad[0].t:.6g}")
    eps = PERTURB_EPS
    ident = np.eye(path.dim)
    for _ in range(PERTURB_RETRIES + 1):
        perturbed = path
        for c in bad:
            others = [0.0, path.T] + [d.t for d in crossings if d is not c]
            gap = min(abs(c.t - s) for s in others)
            width = min(0.45 * gap, 0.05 * path.T)
            # the bump moves Phi by about eps * width; keep that well above the kernel threshold
            floor = PERTURB_MARGIN * float(_threshold(_norm2(path.at(c.t)))) / width
            perturbed = perturb_fixed_ends(perturbed, ident, max(eps, floor * eps / PERTURB_EPS), c.t, width)
        try:
            trial = find_crossings(perturbed, tol)
        except (ContinuumCrossing, IllConditionedKernel):
            trial = None
        if trial is not None and all(c.regular for c in trial):
            return _crossing_sum(trial)
        eps *= 2
    raise UnresolvableDegeneracy(f"crossing at t={bad[0].t:.6g} stays degenerate after perturbation")


def perturbed_index_window(rs: HalfInt, kernel_dim: int) -> tuple[int, int]:
    """Integer indices reachable by a small nondegenerate perturbation.

    Returns the closed range ``[rs - k/2, rs + k/2]`` intersected with the
    integers, as ``(lo, hi)``.
    """
    if kernel_dim < 0:
        raise InputError("kernel dimension must be nonnegative")
    rs = HalfInt.from_number(rs)
    lo2, hi2 = rs.doubled - kernel_dim, rs.doubled + kernel_dim
    lo = -((-lo2) // 2)  # ceil(lo2 / 2)
    hi = hi2 // 2
    return lo, hi
