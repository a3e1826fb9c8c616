"""End-to-end acceptance criteria.

Each test carries a ``criterion`` marker; the conftest prints one PASS/FAIL
line per criterion at the end of the session.
"""
from __future__ import annotations

import math
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from helpers import random_regular_path, random_symplectic
from maxineq.capacity import c_ratio, invariant_C_concave, invariant_C_ellipsoid, invariant_C_upper_convex
from maxineq.cover_bounds import (
    CoverDescription,
    CoverSet,
    pb_lower_bound_monotone,
    pb_lower_bound_rational,
    superheavy_complement,
)
from maxineq.diagrams import (
    Diagram,
    DiagramLine,
    brute_force_max_bound,
    build_contraction_diagram,
    build_killer_diagram,
    track_spectral_invariant,
)
from maxineq.errors import DiagramError, HypothesisViolated
from maxineq.halfint import HalfInt
from maxineq.reeb_domains import (
    Ellipsoid,
    SphereDisk,
    ToricProfile,
    concave_toric_surrogates,
    ellipsoid_cz,
    ellipsoid_linearized_path,
    ellipsoid_orbits,
    explicit_table,
    simplex_inclusion_capacity,
    sup_norm_bound,
)
from maxineq.relative_spectrum import AmbientModel, check_killer_condition, check_sphere, default_window, relative_n_spectrum
from maxineq.sympath import conjugate, direct_sum, restrict, reverse, rotation_path, rs_index

PHI = (1 + math.sqrt(5)) / 2
ROOT = Path(__file__).resolve().parents[1]
EXAMPLES = ROOT / "docs" / "examples"

pytestmark = pytest.mark.acceptance


@pytest.mark.criterion(1, "RS axioms on 200 random regular paths, < 30 s")
def test_rs_axioms():
    rng = np.random.default_rng(20261015)
    t0 = time.perf_counter()
    failures = []
    for i in range(200):
        dim = 2 if i % 2 == 0 else 4
        p = random_regular_path(rng, dim)
        r = rs_index(p)
        assert isinstance(r, HalfInt)
        tm = float(rng.uniform(0.3, 0.7))
        if rs_index(restrict(p, 0.0, tm)) + rs_index(restrict(p, tm, 1.0)) != r:
            failures.append((i, "concatenation"))
        if rs_index(reverse(p)) != -r:
            failures.append((i, "inverse"))
        if rs_index(conjugate(p, random_symplectic(rng, dim))) != r:
            failures.append((i, "conjugation"))
        if dim == 2:
            q = random_regular_path(rng, 2)
            if rs_index(direct_sum(p, q)) != r + rs_index(q):
                failures.append((i, "product"))
    elapsed = time.perf_counter() - t0
    assert not failures, failures
    assert elapsed < 30.0, f"took {elapsed:.1f} s"


@pytest.mark.criterion(2, "rotation formula 2 floor(theta / 2 pi) + 1 on 50 angles")
def test_rotation_formula():
    rng = np.random.default_rng(2)
    bad = []
    for theta in rng.uniform(0.0, 10 * math.pi, size=50):
        expected = 2 * math.floor(theta / (2 * math.pi)) + 1
        got = rs_index(rotation_path(float(theta)))
        if got != expected:
            bad.append((theta, got, expected))
    assert not bad


@pytest.mark.criterion(3, "ellipsoid linearized paths reproduce the closed-form CZ, < 60 s")
def test_ellipsoid_cross_validation():
    t0 = time.perf_counter()
    bad = []
    for a in ([1.0, PHI], [1.0, math.e], [1.0, PHI, PHI ** 2]):
        E = Ellipsoid(a)
        for k in range(1, E.n + 1):
            for ell in range(1, 6):
                path, corr = ellipsoid_linearized_path(E, k, ell)
                got = rs_index(path) + corr
                if got != ellipsoid_cz(E, k, ell):
                    bad.append((a, k, ell, got))
    assert not bad
    assert time.perf_counter() - t0 < 60.0


def _random_ellipsoid(rng, n):
    while True:
        E = Ellipsoid(sorted(rng.uniform(0.5, 3.0, size=n)))
        if not E.resonant:
            return E


@pytest.mark.criterion(4, "C(E) = min a on 20 random ellipsoids")
def test_C_ellipsoids():
    rng = np.random.default_rng(4)
    for i in range(20):
        E = _random_ellipsoid(rng, 2 + i % 2)
        table = ellipsoid_orbits(E, 3 * E.a[0])
        sup = max(c_ratio(r, E.n) for r in table)
        assert abs(sup - E.a[0]) <= 1e-9
        assert abs(invariant_C_ellipsoid(E).value - E.a[0]) <= 1e-9


def _random_concave(rng, n):
    axes = [tuple(float(rng.uniform(0.5, 3.0)) if j == i else 0.0 for j in range(n)) for i in range(n)]
    inner = [tuple(float(x) for x in rng.uniform(0.05, 1.5, size=n)) for _ in range(int(rng.integers(0, 4)))]
    return ToricProfile(axes + inner, "concave")


@pytest.mark.criterion(5, "concave toric C attained at v=(1,...,1), equal to the inclusion capacity")
def test_C_concave():
    rng = np.random.default_rng(5)
    for i in range(20):
        n = 2 + i % 2
        omega = _random_concave(rng, n)
        cap = simplex_inclusion_capacity(omega)
        table = concave_toric_surrogates(omega, 3 * cap)
        ones = "v=(" + ",".join(["1"] * n) + ")"
        at_ones = c_ratio(next(r for r in table if r.label == ones), n)
        assert at_ones == cap
        assert max(c_ratio(r, n) for r in table) == at_ones
        rep = invariant_C_concave(omega)
        assert rep.value == cap and rep.witness.label == ones


@pytest.mark.criterion(6, "convex toric sandwich: inclusion capacity <= C bound, sup-norm >= capacity")
def test_C_convex_sandwich():
    rng = np.random.default_rng(6)
    for i in range(20):
        n = 2 + i % 2
        pts = [tuple(float(x) for x in rng.uniform(0.2, 2.0, size=n)) for _ in range(int(rng.integers(1, 5)))]
        omega = ToricProfile(pts, "convex")
        cap = simplex_inclusion_capacity(omega)
        rep = invariant_C_upper_convex(omega)
        assert cap - 1e-9 <= rep.value
        assert sup_norm_bound(omega) >= cap


def _random_table(rng, n, cz_lo_min, ratio_cap=None):
    rows = []
    for i in range(int(rng.integers(1, 7))):
        lo = int(rng.integers(cz_lo_min, cz_lo_min + 8))
        hi = lo + int(rng.integers(0, 3))
        if ratio_cap is None:
            action = float(rng.uniform(0.05, 6.0))
        else:
            action = float(rng.uniform(0.01, 1.0)) * ratio_cap * (lo - n + 1) / 2
        rows.append((action, f"o{i}", lo, hi))
    return explicit_table(n, rows)


@pytest.mark.criterion(7, "sign properties of relative spectra on 500 random tables")
def test_relative_spectrum_signs():
    rng = np.random.default_rng(7)
    violations = []
    for i in range(500):
        n = int(rng.integers(2, 4))
        case = i % 3
        if case == 0:
            tbl = _random_table(rng, n, -6)
            amb = AmbientModel.aspherical()
            rel = relative_n_spectrum(tbl, amb, default_window(tbl, amb))
            violations += [(i, v) for v in rel if v > 0]
        elif case == 1:
            tbl = _random_table(rng, n, 0)
            amb = AmbientModel.monotone(-float(rng.uniform(0.0, 3.0)), int(rng.integers(1, 4)))
            rel = relative_n_spectrum(tbl, amb, default_window(tbl, amb))
            violations += [(i, v) for v in rel if v > 0]
        else:
            kappa = float(rng.uniform(0.1, 3.0))
            tbl = _random_table(rng, n, n + 1, ratio_cap=kappa)
            amb = AmbientModel.monotone(kappa, int(rng.integers(1, 4)))
            rel = relative_n_spectrum(tbl, amb, default_window(tbl, amb))
            violations += [(i, v) for v in rel if 0 < v < kappa]
    assert not violations


@pytest.mark.criterion(8, "sphere disks: pass outside (1/3, 1/2), fail inside with witnesses")
def test_sphere_boundary():
    for area in (0.20, 0.30, 1 / 3, 0.50, 0.60):
        cert = check_sphere(SphereDisk(area), 0.9 * area)
        assert cert.verdict == "pass", area
        assert cert.numbers["witnesses"] == []
    for area in (0.35, 0.40, 0.45):
        c_H = 0.9 * area
        cert = check_sphere(SphereDisk(area), c_H)
        assert cert.verdict == "fail", area
        expected = [(k, k * (0.5 - area)) for k in range(2, 200, 2) if 0 < k * (0.5 - area) <= c_H]
        assert expected
        got = [(w["k"], w["action"]) for w in cert.numbers["witnesses"]]
        assert got == expected


def _random_diagram(rng):
    k = int(rng.integers(1, 9))
    lines = []
    y0 = float(rng.integers(-4, 5)) / 2
    for i in range(k):
        lo = 0.0 if i == 0 else float(rng.integers(0, 4)) / 4
        hi = 1.0 if i == 0 or rng.random() < 0.5 else max(lo, float(rng.integers(1, 5)) / 4)
        slope = float(rng.integers(-6, 7)) / 2
        start = y0 if i == 0 else float(rng.integers(-8, 9)) / 4
        lines.append(DiagramLine(f"L{i}", start, slope, lo, hi, "horizontal" if slope == 0 else "sloped"))
    return Diagram(tuple(lines), (0.0, y0), 1.0, "L0")


@pytest.mark.criterion(9, "tracker equals brute force on 100 diagrams; killer diagrams end at 0")
def test_tracker_soundness():
    rng = np.random.default_rng(9)
    for _ in range(100):
        d = _random_diagram(rng)
        try:
            res = track_spectral_invariant(d)
        except DiagramError:
            with pytest.raises(DiagramError):
                brute_force_max_bound(d)
            continue
        bound, ends = brute_force_max_bound(d)
        assert res.max_bound == bound
        assert tuple(sorted(set(res.end_values))) == tuple(sorted(set(ends)))
    for _ in range(30):
        c_H = float(rng.uniform(0.1, 3.0))
        rel = [0.0] + [float(x) for x in rng.uniform(-5, 0, size=3)] + [float(x) for x in c_H + rng.uniform(0.01, 4, 2)]
        assert check_killer_condition(rel, c_H).passed
        samples = [float(x) for x in rng.uniform(-2, 5, size=int(rng.integers(0, 5)))]
        res = track_spectral_invariant(build_killer_diagram(c_H, rel, samples))
        assert res.final_value == 0
        assert all(y == c_H - t for t, y in res.path)


@pytest.mark.criterion(10, "contraction diagrams: max bound equals the initial slope")
def test_contraction_bound():
    rng = np.random.default_rng(10)
    for _ in range(50):
        a = float(rng.uniform(0.0, 3.0))
        data = [(a, 0.0)]
        for _ in range(int(rng.integers(0, 7))):
            data.append((float(rng.uniform(0.0, 4.0)), -float(rng.uniform(0.01, 3.0))))
        rng.shuffle(data)
        res = track_spectral_invariant(build_contraction_diagram(data, require_nonnegative=True))
        assert res.max_bound == a * 1.0


def _sig12(x: float) -> str:
    return format(x, ".12g")


@pytest.mark.criterion(11, "pb bounds reproduce the worked examples; violations never pass")
def test_pb_arithmetic():
    flags = dict(portable_liouville=False, dynamically_convex=True, incompressible=True)
    star = CoverDescription.from_pairs([CoverSet(f"U{i}", 0.5, **flags) for i in range(4)],
                                       [(0, 1), (0, 2), (0, 3)])
    value, cert = pb_lower_bound_monotone(star, AmbientModel.monotone(-1.0), 2)
    assert _sig12(value) == _sig12(1 / 16) and cert.passed

    port = dict(flags, portable_liouville=True)
    chain = CoverDescription.from_pairs([CoverSet(f"U{i}", 1.0, p, **port) for i, p in enumerate((0.8, 0.5, 0.3))],
                                        [(0, 1), (1, 2)])
    value, _ = pb_lower_bound_monotone(chain, AmbientModel.monotone(-1.0), 2)
    assert _sig12(value) == _sig12(1 / (2 * 9 * 0.8))

    five = [(0, j) for j in range(1, 5)]
    balls = CoverDescription.from_pairs([CoverSet(f"B{i}", 0.2, C_value=0.5) for i in range(5)], [], five)
    value, _ = pb_lower_bound_rational(balls, 1.0)
    assert _sig12(value) == _sig12(0.1)
    single = CoverDescription.from_pairs([CoverSet("B", 1.0, C_value=0.5)], [], [])
    assert _sig12(pb_lower_bound_rational(single, 1.0)[0]) == _sig12(0.5)

    # every broken hypothesis yields a non-passing certificate
    rng = np.random.default_rng(11)
    keys = ("portable_liouville", "dynamically_convex", "incompressible")
    for _ in range(50):
        k = int(rng.integers(1, 5))
        bad = int(rng.integers(0, k))
        sets = []
        for i in range(k):
            f = {key: True for key in keys}
            if i == bad:
                f[keys[int(rng.integers(1, 3))]] = bool(rng.random() < 0.5) and None
            sets.append(CoverSet(f"U{i}", 1.0, 0.5, 0.5, **f))
        cov = CoverDescription.from_pairs(sets, [])
        with pytest.raises(HypothesisViolated) as exc:
            pb_lower_bound_monotone(cov, AmbientModel.monotone(-1.0), 2)
        assert exc.value.certificate.verdict != "pass"
        assert superheavy_complement(sets[bad], AmbientModel.monotone(-1.0)).verdict != "pass"
    with pytest.raises(HypothesisViolated) as exc:
        pb_lower_bound_monotone(CoverDescription.from_pairs([CoverSet("U", 1.0, C_value=3.0, **flags)], []),
                                AmbientModel.monotone(2.0), 2)
    assert exc.value.certificate.verdict != "pass"
    with pytest.raises(HypothesisViolated) as exc:
        pb_lower_bound_rational(CoverDescription.from_pairs([CoverSet("B", 1.0, C_value=1.5)], [], []), 1.0)
    assert exc.value.certificate.verdict != "pass"


CLI_RUNS = [
    ["rs-index", "--input", "rotation_3pi.yaml"],
    ["rs-index", "--input", "shear.yaml"],
    ["spectrum", "--input", "ellipsoid_golden.yaml", "--cutoff", "2"],
    ["invariant-c", "--input", "ellipsoid_golden.yaml"],
    ["invariant-c", "--input", "concave_triangle.yaml"],
    ["invariant-c", "--input", "convex_square.yaml"],
    ["rel-spectrum", "--input", "ellipsoid_golden.yaml", "--ambient", "monotone:-1", "--window=-5:5"],
    ["check-max-ineq", "--input", "sphere_disks.yaml"],
    ["check-max-ineq", "--input", "negative_monotone.yaml"],
    ["diagram", "--input", "killer_diagram.yaml"],
    ["diagram", "--input", "contraction_diagram.yaml"],
    ["pb-bound", "--input", "cover_monotone.yaml"],
]


def _run_cli(args):
    full = [a if not a.endswith(".yaml") else str(EXAMPLES / a) for a in args]
    return subprocess.run([sys.executable, "-m", "maxineq", *full, "--format", "json"],
                          capture_output=True, cwd=ROOT, timeout=120)


@pytest.mark.criterion(12, "every CLI command gives byte-identical JSON on repeated runs")
def test_cli_determinism():
    commands = set()
    for args in CLI_RUNS:
        first, second = _run_cli(args), _run_cli(args)
        assert first.returncode == 0, first.stderr.decode()
        assert first.stdout == second.stdout
        assert first.stdout.startswith(b'{\n  "schema_version": "1"')
        commands.add(args[0])
    assert commands == {"rs-index", "spectrum", "invariant-c", "rel-spectrum", "check-max-ineq", "diagram", "pb-bound"}
