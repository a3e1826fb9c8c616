import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxineq.errors import CertificateAssertion, DisjointnessNotDeclared, InputError, WindowTooSmall, WrongAmbientKind
from maxineq.reeb_domains import SphereDisk, explicit_table
from maxineq.relative_spectrum import (
    AmbientModel,
    Certificate,
    MaxInequalityItem,
    RelativeSpectrum,
    SpectrumWindow,
    check_extendable,
    check_killer_condition,
    check_neg_monotone,
    check_pos_monotone,
    check_rational_lattice,
    check_sphere,
    default_window,
    max_inequality_verdict,
    relative_n_spectrum,
    relative_spectrum_degenerate,
    spec_n_zero,
)

W = SpectrumWindow(-5, 5)
TABLE = explicit_table(2, [(1.0, "a", 3, 3), (1.5, "b", 4, 5)])


def test_monotone_values():
    rel = relative_n_spectrum(TABLE, AmbientModel.monotone(-1), W)
    assert rel.values == (-4.5, -3.0, -2.0, -1.0, 0.0)
    assert rel.conservative


def test_aspherical_values():
    assert relative_n_spectrum(TABLE, AmbientModel.aspherical(), W).values == (-1.5, -1.0, 0.0)


def test_spec_n_zero_respects_min_chern():
    assert spec_n_zero(AmbientModel.monotone(-1, 2), 2, W).values == (-2.0, 0.0)


def test_rational_uses_lattice_closure():
    rel = relative_spectrum_degenerate(TABLE, AmbientModel.rational(1), W)
    assert rel.values == tuple(x / 2 for x in range(-10, 11))


def test_default_window_and_parse():
    assert default_window(TABLE, AmbientModel.monotone(-1)) == SpectrumWindow(-13.5, 13.5)
    assert SpectrumWindow.parse("-2:3.5") == SpectrumWindow(-2.0, 3.5)
    with pytest.raises(InputError):
        SpectrumWindow.parse("1;2")
    with pytest.raises(InputError):
        SpectrumWindow(2, 1)


def test_ambient_validation():
    with pytest.raises(InputError):
        AmbientModel.rational(0.0)
    with pytest.raises(InputError):
        AmbientModel("flat")
    assert AmbientModel.monotone(2.0, 2).omega_of_chern(3) is None
    with pytest.raises(WrongAmbientKind):
        AmbientModel.rational(1.0).omega_of_chern(1)


def test_killer_condition():
    assert check_killer_condition([-1.0, 0.0, 2.0], 1.5).passed
    cert = check_killer_condition([0.5, 2.0], 1.5)
    assert not cert.passed and cert.numbers["intersection"] == [0.5]
    assert check_killer_condition([0.5], -1.0).rule == "subadditivity"
    with pytest.raises(WindowTooSmall):
        check_killer_condition(RelativeSpectrum((), SpectrumWindow(-1, 1)), 2.0)


def test_rational_lattice():
    amb = AmbientModel.rational(2.0)
    tbl = explicit_table(2, [(1.0, "a", 3, 3), (3.0, "b", 5, 5)])
    assert check_rational_lattice(tbl, amb, 1.0, 0.9).passed
    assert not check_rational_lattice(tbl, amb, 1.0, 1.0).passed
    assert not check_rational_lattice(tbl, AmbientModel.rational(2.5), 1.0, 0.5).passed
    assert check_rational_lattice(None, amb, 1.0, 0.5).passed
    with pytest.raises(WrongAmbientKind):
        check_rational_lattice(tbl, AmbientModel.aspherical(), 1.0, 0.5)


def test_extendable():
    cert = check_extendable(0.4, 1.0, 0.5, 1.0)
    assert cert.passed and cert.numbers["bound"] == 0.5
    assert not check_extendable(0.5, 1.0, 0.5, 1.0).passed


def test_negative_monotone():
    amb = AmbientModel.monotone(-1.0)
    assert check_neg_monotone(TABLE, amb).passed
    assert not check_neg_monotone(explicit_table(2, [(1.0, "a", -1, -1)]), amb).passed
    with pytest.raises(WrongAmbientKind):
        check_neg_monotone(TABLE, AmbientModel.monotone(1.0))


def test_positive_monotone():
    amb = AmbientModel.monotone(2.0)
    tbl = explicit_table(2, [(1.0, "a", 3, 3), (2.5, "b", 5, 5)])
    cert = check_pos_monotone(tbl, amb, 2, 1.25, 1.0)
    assert cert.passed, cert.notes
    assert not check_pos_monotone(tbl, amb, 2, 1.25, 2.0).passed
    assert not check_pos_monotone(tbl, amb, 2, 2.5, 1.0).passed
    low = check_pos_monotone(tbl, amb, 2, 1.0, 1.0)
    assert not low.passed and any("table ratios" in n for n in low.notes)


def test_sphere_certificate():
    assert check_sphere(SphereDisk(0.3), 0.2).passed
    assert not check_sphere(SphereDisk(0.3), 0.3).passed
    cert = check_sphere(SphereDisk(0.4), 0.36)
    assert cert.verdict == "fail" and len(cert.numbers["witnesses"]) == 1


def test_max_inequality():
    ok = Certificate("pass", "r", {})
    bad = Certificate("fail", "r", {})
    cert, bound = max_inequality_verdict([MaxInequalityItem(ok, 0.3, "a"), MaxInequalityItem(bad, -1.0, "b")], True)
    assert cert.passed and bound == 0.3
    cert, bound = max_inequality_verdict([MaxInequalityItem(bad, 0.3, "a")], True)
    assert cert.verdict == "inconclusive" and bound is None
    with pytest.raises(DisjointnessNotDeclared):
        max_inequality_verdict([MaxInequalityItem(ok, 0.3)], False)


rows = st.lists(st.tuples(st.floats(0.05, 5.0), st.integers(0, 8), st.integers(0, 2)), min_size=1, max_size=6)


@settings(max_examples=60)
@given(rows, st.floats(-3.0, 0.0), st.integers(1, 3))
def test_nonnegative_indices_give_nonpositive_spectrum(data, kappa, N):
    tbl = explicit_table(2, [(a, f"o{i}", lo, lo + d) for i, (a, lo, d) in enumerate(data)])
    amb = AmbientModel.monotone(kappa, N)
    rel = relative_n_spectrum(tbl, amb, default_window(tbl, amb))
    assert all(v <= 0 for v in rel)
    assert check_neg_monotone(tbl, amb).passed


@settings(max_examples=60)
@given(rows, st.floats(-4.0, 4.0), st.floats(0.1, 4.0))
def test_window_monotonicity(data, lo, width):
    tbl = explicit_table(2, [(a, f"o{i}", c, c + d) for i, (a, c, d) in enumerate(data)])
    amb = AmbientModel.monotone(-1.0)
    big = relative_n_spectrum(tbl, amb, SpectrumWindow(-20, 20))
    small = relative_n_spectrum(tbl, amb, SpectrumWindow(lo, lo + width))
    assert set(small.values) == {v for v in big.values if v in small.window}
