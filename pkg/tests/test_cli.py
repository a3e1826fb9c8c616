import json
from pathlib import Path

import pytest

from maxineq import sympath
from maxineq.cli import main

EX = Path(__file__).resolve().parents[1] / "docs" / "examples"


def run(capsys, *argv):
    code = main([str(EX / a) if a.endswith(".yaml") else a for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rs_index_text(capsys):
    code, out, _ = run(capsys, "rs-index", "--input", "rotation_3pi.yaml")
    assert code == 0 and out.splitlines()[0] == "RS = 3"
    code, out, _ = run(capsys, "rs-index", "--input", "shear.yaml")
    assert out.splitlines()[0] == "RS = 1/2"


def test_rs_index_json(capsys):
    code, out, _ = run(capsys, "rs-index", "--input", "rotation_3pi.yaml", "--format", "json")
    doc = json.loads(out)
    assert doc["schema_version"] == "1" and doc["rs"] == "3"
    assert abs(doc["crossings"][1]["t"] - 2 / 3) < 1e-9


def test_spectrum_rows(capsys):
    code, out, _ = run(capsys, "spectrum", "--input", "ellipsoid_golden.yaml", "--cutoff", "2", "--format", "json")
    rows = json.loads(out)["orbits"]
    assert [r["cz_lo"] for r in rows] == [3, 5, 7]
    code, out, _ = run(capsys, "spectrum", "--input", "convex_square.yaml", "--cutoff", "2", "--format", "csv")
    assert len(out.splitlines()) == 1 + 5


def test_invariant_c(capsys):
    assert run(capsys, "invariant-c", "--input", "concave_triangle.yaml")[1].startswith("C = 1 (exact), witness v=(1,1)")
    out = run(capsys, "invariant-c", "--input", "convex_square.yaml")[1]
    assert "upper bound" in out


def test_rel_spectrum_window(capsys):
    code, out, _ = run(capsys, "rel-spectrum", "--input", "ellipsoid_golden.yaml", "--ambient", "monotone:-1",
                       "--window=-3:1", "--format", "json")
    vals = json.loads(out)["values"]
    assert code == 0 and all(-3 <= v <= 0 for v in vals) and 0 in vals


def test_check_max_ineq_pass_and_inconclusive(capsys, tmp_path):
    code, out, _ = run(capsys, "check-max-ineq", "--input", "sphere_disks.yaml")
    assert code == 0 and "<= 0.45" in out
    bad = tmp_path / "gap.yaml"
    bad.write_text("ambient: sphere\ndisjoint: true\nitems:\n"
                   "  - {name: D, domain: {kind: sphere_disk, area: 0.4}, c_H: 0.36}\n")
    code, out, _ = run(capsys, "check-max-ineq", "--input", str(bad), "--format", "json")
    doc = json.loads(out)
    assert code == 1 and doc["verdict"] == "inconclusive"


def test_diagram_formats(capsys, tmp_path):
    code, out, _ = run(capsys, "diagram", "--input", "killer_diagram.yaml")
    assert code == 0 and "final = 0" in out
    target = tmp_path / "d.svg"
    code, out, _ = run(capsys, "diagram", "--input", "killer_diagram.yaml", "--format", "svg", "--out", str(target))
    assert code == 0 and out == "" and target.read_text().startswith("<svg")


def test_pb_bound_degree_convention(capsys):
    out = json.loads(run(capsys, "pb-bound", "--input", "cover_monotone.yaml", "--format", "json")[1])
    assert format(out["bound"], ".12g") == format(1 / (2 * 9 * 0.8), ".12g")
    out = json.loads(run(capsys, "pb-bound", "--input", "cover_monotone.yaml", "--exclude-self",
                         "--format", "json")[1])
    assert format(out["bound"], ".12g") == format(1 / (2 * 4 * 0.8), ".12g")


def test_exit_codes(capsys, tmp_path):
    broken = tmp_path / "broken.yaml"
    broken.write_text("domain: [unclosed\n")
    assert run(capsys, "invariant-c", "--input", str(broken))[0] == 2
    resonant = tmp_path / "resonant.yaml"
    resonant.write_text("domain: {kind: ellipsoid, a: [1, 1]}\n")
    code, _, err = run(capsys, "invariant-c", "--input", str(resonant))
    assert code == 3 and "ResonantEllipsoid" in err
    assert run(capsys, "rs-index")[0] == 2
    assert run(capsys, "no-such-command")[0] == 2


def test_internal_error_exit_code(capsys, monkeypatch):
    from maxineq.errors import InternalMismatch

    def boom(*a, **k):
        raise InternalMismatch("forced")

    monkeypatch.setattr(sympath, "rs_index", boom)
    assert run(capsys, "rs-index", "--input", "rotation_3pi.yaml")[0] == 4


def test_tolerance_override_is_restored(capsys):
    before = sympath.KERNEL_RTOL
    code, _, _ = run(capsys, "rs-index", "--input", "rotation_3pi.yaml", "--tol-kernel", "1e-7")
    assert code == 0 and sympath.KERNEL_RTOL == before
    assert run(capsys, "rs-index", "--input", "rotation_3pi.yaml", "--tol-kernel", "-1")[0] == 2
