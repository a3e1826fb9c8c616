import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxineq.errors import InputError, ResonantEllipsoid
from maxineq.reeb_domains import (
    Ellipsoid,
    ReebOrbitRecord,
    SphereDisk,
    ToricProfile,
    concave_toric_surrogates,
    convex_toric_surrogates,
    ellipsoid_cz,
    ellipsoid_orbits,
    explicit_table,
    parse_vector_label,
    simplex_inclusion_capacity,
    sphere_disk_index_actions,
    sphere_disk_witnesses,
    sup_norm_bound,
)

PHI = (1 + math.sqrt(5)) / 2


def test_golden_ellipsoid_table():
    rows = [(r.action, r.label, r.cz_lo, r.multiplicity) for r in ellipsoid_orbits(Ellipsoid([1, PHI]), 2.0)]
    assert rows == [
        (1.0, "γ[k=1,ℓ=1]", 3, 1),
        (PHI, "γ[k=2,ℓ=1]", 5, 1),
        (2.0, "γ[k=1,ℓ=2]", 7, 2),
    ]


def test_resonant_ellipsoid_raises():
    with pytest.raises(ResonantEllipsoid):
        ellipsoid_orbits(Ellipsoid([1.0, 1.0]), 3.0)
    with pytest.raises(ResonantEllipsoid):
        ellipsoid_orbits(Ellipsoid([1.0, 1.5]), 3.0)


@settings(max_examples=30)
@given(st.lists(st.floats(0.5, 3.0), min_size=2, max_size=3))
def test_ellipsoid_cz_formula(a):
    E = Ellipsoid(a)
    if E.resonant:
        return
    for k in range(1, E.n + 1):
        for ell in range(1, 4):
            expected = E.n - 1 + 2 * sum(math.floor(ell * E.a[k - 1] / aj) for aj in E.a)
            assert ellipsoid_cz(E, k, ell) == expected


@settings(max_examples=30)
@given(st.lists(st.floats(0.5, 3.0), min_size=2, max_size=3), st.floats(1.0, 6.0))
def test_ellipsoid_table_is_complete_and_sorted(a, T):
    E = Ellipsoid(a)
    if E.resonant:
        return
    tbl = ellipsoid_orbits(E, T)
    acts = tbl.actions
    top = T * (1 + 1e-15)  # actions equal to T up to rounding are kept
    assert acts == sorted(acts) and all(x <= top for x in acts)
    expected = sum(int(math.floor(top / aj)) for aj in E.a)
    assert len(tbl) == expected


def test_unit_square_surrogates():
    tbl = convex_toric_surrogates(ToricProfile([(1, 1)], "convex"), 2.0)
    got = {r.label: (r.action, r.cz_lo, r.cz_hi) for r in tbl}
    assert got["v=(1,0)"] == (1.0, 3, 3)
    assert got["v=(1,1)"] == (2.0, 4, 5)
    assert got["v=(2,0)"] == (2.0, 5, 5)


def test_concave_triangle_surrogates():
    omega = ToricProfile([(2, 0), (0.5, 0.5), (0, 2)], "concave")
    tbl = concave_toric_surrogates(omega, 2.0)
    got = {r.label: (r.action, r.cz_lo, r.cz_hi) for r in tbl}
    assert got["v=(1,1)"] == (1.0, 3, 4)
    assert got["v=(2,1)"] == (1.5, 5, 6)
    assert simplex_inclusion_capacity(omega) == 1.0


def test_sup_norm_square():
    assert sup_norm_bound(ToricProfile([(1, 1)], "convex")) == 1.0


def test_vector_label_roundtrip():
    assert parse_vector_label("v=(1,0,2)") == (1, 0, 2)


def test_sphere_disk_actions_and_witnesses():
    D = SphereDisk(0.4)
    assert sphere_disk_index_actions(D, 6) == pytest.approx([0.0, 0.2, 0.4, 0.6])
    wit = sphere_disk_witnesses(D, 0.36)
    assert [k for k, _ in wit] == [2] and wit[0][1] == pytest.approx(0.2)
    assert sphere_disk_witnesses(SphereDisk(0.6), 0.5) == []
    with pytest.raises(InputError):
        SphereDisk(1.0)


def test_explicit_table_validation():
    tbl = explicit_table(2, [(2.0, "b", 3, 4), {"action": 1.0, "label": "a", "cz_lo": 3}], cutoff=1.5)
    assert [r.label for r in tbl] == ["a"]
    with pytest.raises(InputError):
        ReebOrbitRecord(-1.0, "x", 3, 3)
    with pytest.raises(InputError):
        ReebOrbitRecord(1.0, "x", 4, 3)


def test_profile_validation():
    with pytest.raises(InputError):
        ToricProfile([(1.0, -1.0)], "convex")
    with pytest.raises(InputError):
        ToricProfile([(1.0, 1.0)], "round")
