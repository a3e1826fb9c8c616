"""Command-line front end.

Every command builds one report document.  ``--format json`` prints it
with a fixed field order and floats rounded to 12 significant digits, so
identical inputs give byte-identical output.  Exit codes: 0 success or
pass, 1 failing or inconclusive certificate, 2 input error, 3 degenerate
data, 4 failed internal check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import diagrams, sympath
from .cover_bounds import degree, pb_lower_bound_monotone, pb_lower_bound_rational, superheavy_complement
from .errors import ContinuumCrossing, HypothesisViolated, InputError, MaxIneqError
from .halfint import HalfInt
from .io import Domain, load_document, number, numbers, parse_cover, parse_domain, parse_generator, resolve_ambient
from .reeb_domains import sphere_disk_index_actions
from .relative_spectrum import (
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
)

SCHEMA_VERSION = "1"
SIG_DIGITS = 12

TOLERANCES = {
    "kernel": (sympath, "KERNEL_RTOL"),
    "symmetry": (sympath, "SYMMETRY_TOL"),
    "drift": (sympath, "DRIFT_TOL"),
    "regular": (sympath, "REGULAR_RTOL"),
    "track": (diagrams, "TRACK_TOL"),
}


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------
def fmt(x: float) -> str:
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return format(float(x) + 0.0, f".{SIG_DIGITS}g")


def canonical(obj: Any) -> Any:
    """Recursively convert to JSON-ready values with rounded floats."""
    if isinstance(obj, (bool, type(None), str)):
        return obj
    if isinstance(obj, (HalfInt, Fraction)):
        return str(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return fmt(x)
        return float(fmt(x))
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, Certificate):
        return canonical(obj.to_dict())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dump_json(report: dict) -> str:
    return json.dumps(canonical(report), indent=2, ensure_ascii=False) + "\n"


def csv_rows(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows([fmt(v) if isinstance(v, float) else v for v in r] for r in rows)
    return buf.getvalue()


def _cert_text(cert: dict, indent: str = "") -> list[str]:
    out = [f"{indent}verdict: {cert['verdict']} (rule {cert['rule']})"]
    for k, v in cert["numbers"].items():
        if isinstance(v, float):
            v = fmt(v)
        out.append(f"{indent}  {k} = {v}")
    if cert.get("killer_norm") is not None:
        out.append(f"{indent}  killer norm = {fmt(cert['killer_norm'])}")
    for note in cert.get("notes", []):
        out.append(f"{indent}  note: {note}")
    return out


class Output:
    """Rendered output of a command plus its exit code."""

    def __init__(self, report: dict, text: str, exit_code: int = 0, csv: str | None = None, svg: str | None = None):
        self.report = {"schema_version": SCHEMA_VERSION, **report}
        self.text = text
        self.exit_code = exit_code
        self.csv = csv
        self.svg = svg

    def render(self, form: str) -> str:
        if form == "json":
            return dump_json(self.report)
        if form == "text":
            return self.text
        if form == "csv":
            if self.csv is None:
                raise InputError(f"command {self.report['command']} has no CSV output")
            return self.csv
        if form == "svg":
            if self.svg is None:
                raise InputError(f"command {self.report['command']} has no SVG output")
            return self.svg
        raise InputError(f"unknown format {form!r}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def _domain(args) -> tuple[Domain, dict]:
    doc = load_document(_need_input(args))
    return parse_domain(doc), doc


def _need_input(args) -> str:
    if not args.input:
        raise InputError("--input is required")
    return args.input[0]


def cmd_rs_index(args) -> Output:
    doc = load_document(_need_input(args))
    gen = parse_generator(doc)
    steps = args.steps or int(doc.get("steps", 0)) or None
    if steps is None:
        probe = max(np.linalg.norm(gen.checked(t), 2) for t in np.linspace(0, gen.T, 65))
        steps = sympath.suggest_steps(probe, gen.T, minimum=200)
    path = sympath.integrate_path(gen, steps)
    rs = sympath.rs_index(path)
    try:
        crossings = sympath.find_crossings(path)
        method = "crossing_forms"
    except ContinuumCrossing:
        crossings = []
        method = "degenerate_closed_form"
    rows = [{"t": c.t, "kernel_dim": c.kernel_dim, "signature": c.signature, "regular": c.regular,
             "endpoint": c.endpoint} for c in crossings]
    report = {"command": "rs-index", "rs": rs, "dim": gen.dim, "T": gen.T, "steps": steps, "method": method,
              "crossings": rows}
    lines = [f"RS = {rs}", f"method: {method}"]
    if rows:
        lines.append("t, kernel_dim, signature, regular, endpoint")
        lines += [f"{fmt(r['t'])}, {r['kernel_dim']}, {r['signature']}, {r['regular']}, {r['endpoint']}"
                  for r in rows]
    csv = csv_rows(["t", "kernel_dim", "signature", "regular", "endpoint"],
                   [[r["t"], r["kernel_dim"], r["signature"], r["regular"], r["endpoint"]] for r in rows])
    return Output(report, "\n".join(lines) + "\n", 0, csv)


def _orbit_rows(tbl) -> list[dict]:
    return [{"label": r.label, "action": r.action, "cz_lo": r.cz_lo, "cz_hi": r.cz_hi,
             "multiplicity": r.multiplicity} for r in tbl]


def cmd_spectrum(args) -> Output:
    dom, _ = _domain(args)
    if dom.kind == "sphere_disk":
        raise InputError("use rel-spectrum for sphere disks")
    tbl = dom.table(args.cutoff)
    rows = _orbit_rows(tbl)
    report = {"command": "spectrum", "domain": dom.kind, "n": tbl.n, "cutoff": tbl.cutoff, "exact": tbl.exact,
              "orbits": rows}
    header = ["label", "action", "cz_lo", "cz_hi", "multiplicity"]
    csv = csv_rows(header, [[r[h] for h in header] for r in rows])
    text = f"{len(rows)} orbits with action <= {fmt(tbl.cutoff)}\n" + csv
    return Output(report, text, 0, csv)


def cmd_invariant_c(args) -> Output:
    dom, _ = _domain(args)
    rep = dom.invariant_c(args.cutoff)
    wit = rep.witness.label if rep.witness else None
    report = {"command": "invariant-c", "domain": dom.kind, "mode": rep.mode, "value": rep.value,
              "witness": wit, "cutoff": rep.cutoff, "extra": rep.extra}
    if rep.mode == "exact":
        text = f"C = {fmt(rep.value)} (exact), witness {wit}\n"
    else:
        cands = [rep.value, *rep.extra.values()]
        report["binding"] = rep.binding
        text = (f"C <= min({', '.join(fmt(c) for c in cands)}) = {fmt(rep.binding)} (upper bound)\n"
                f"candidates: surrogate sup {fmt(rep.value)} at {wit}"
                + "".join(f", {k} {fmt(v)}" for k, v in rep.extra.items()) + "\n")
    return Output(report, text)


def _window(args, fallback: SpectrumWindow) -> SpectrumWindow:
    return SpectrumWindow.parse(args.window) if args.window else fallback


def _relspec(dom: Domain, amb: AmbientModel, args, degenerate: bool = False, window=None) -> RelativeSpectrum:
    if dom.kind == "sphere_disk":
        w = window or _window(args, SpectrumWindow(-1.0, 1.0))
        k_max = 2 * int(math.ceil(max(abs(w.hi), abs(w.lo)) / max(abs(0.5 - dom.model.area), 1e-12))) + 2
        vals = [v for v in sphere_disk_index_actions(dom.model, min(k_max, 10 ** 6)) if v in w]
        return RelativeSpectrum(tuple(vals), w)
    tbl = dom.table(args.cutoff)
    w = window or _window(args, default_window(tbl, amb))
    if degenerate or amb.kind == "rational":
        return relative_spectrum_degenerate(tbl, amb, w)
    return relative_n_spectrum(tbl, amb, w)


def _ambient(args, doc: dict | None) -> AmbientModel:
    amb = resolve_ambient(args.ambient, doc)
    if amb is None:
        raise InputError("an ambient is required (--ambient or an 'ambient' field)")
    return amb


def cmd_rel_spectrum(args) -> Output:
    dom, doc = _domain(args)
    amb = _ambient(args, doc)
    rel = _relspec(dom, amb, args, degenerate=args.degenerate)
    report = {"command": "rel-spectrum", "domain": dom.kind, "ambient": {"kind": amb.kind, "kappa": amb.kappa,
              "min_chern": amb.min_chern}, "window": [rel.window.lo, rel.window.hi],
              "conservative": rel.conservative, "values": list(rel.values), "notes": list(rel.notes)}
    csv = csv_rows(["value"], [[v] for v in rel.values])
    text = (f"{len(rel)} values in [{fmt(rel.window.lo)}, {fmt(rel.window.hi)}]"
            + (" (conservative superset)" if rel.conservative else "") + "\n"
            + "".join(f"{fmt(v)}\n" for v in rel.values))
    return Output(report, text, 0, csv)


def _item_certificate(item: dict, amb: AmbientModel, args, idx: int) -> tuple[str, float, Certificate]:
    name = str(item.get("name", f"item{idx}"))
    c_H = number(item.get("c_H", 0.0))
    dom = parse_domain(item if "kind" in item else item.get("domain", {}), name)
    rule = item.get("rule", "auto")
    if dom.kind == "sphere_disk":
        return name, c_H, check_sphere(dom.model, c_H)
    if rule == "auto":
        if amb.kind == "rational":
            rule = "rational_lattice" if "lattice" in item else (
                "rational_extendable" if "sigma" in item else "killer_condition")
        elif amb.kind == "monotone":
            rule = "negative_monotone" if amb.kappa <= 0 else "positive_monotone"
        else:
            rule = "killer_condition"
    if rule == "rational_lattice":
        return name, c_H, check_rational_lattice(dom.table(args.cutoff), amb, number(item["lattice"]), c_H)
    if rule == "rational_extendable":
        if amb.kind != "rational":
            raise InputError("the extendable rule needs a rational ambient")
        return name, c_H, check_extendable(c_H, amb.kappa, number(item["sigma"]), number(item["min_spec"]))
    if rule == "negative_monotone":
        cert = check_neg_monotone(dom.table(args.cutoff), amb)
        if cert.passed:
            cert.killer_norm = c_H
        return name, c_H, cert
    if rule == "positive_monotone":
        C_U = number(item["C_U"]) if "C_U" in item else dom.invariant_c(args.cutoff).binding
        return name, c_H, check_pos_monotone(dom.table(args.cutoff), amb, dom.n, C_U, c_H)
    if rule == "killer_condition":
        tbl = dom.table(args.cutoff)
        hi = max(c_H, 0.0)
        w = SpectrumWindow(-1.0 - hi, hi + 1.0)
        rel = relative_spectrum_degenerate(tbl, amb, w) if amb.kind == "rational" else relative_n_spectrum(tbl, amb, w)
        cert = check_killer_condition(rel, c_H)
        cert.notes.append(f"spectrum truncated at action {fmt(tbl.cutoff)}")
        return name, c_H, cert
    raise InputError(f"unknown rule {rule!r}")


def cmd_check_max_ineq(args) -> Output:
    doc = load_document(_need_input(args))
    amb = _ambient(args, doc)
    items = doc.get("items")
    if not isinstance(items, list) or not items:
        raise InputError("scenario needs a nonempty 'items' list")
    parsed = [_item_certificate(it, amb, args, i) for i, it in enumerate(items)]
    mi = [MaxInequalityItem(cert, c_H, name) for name, c_H, cert in parsed]
    overall, bound = max_inequality_verdict(mi, bool(doc.get("disjoint", False)))
    report = {"command": "check-max-ineq", "verdict": overall.verdict, "bound": bound,
              "items": [{"name": n, "c_H": c, "certificate": cert} for n, c, cert in parsed],
              "combined": overall}
    lines = [f"max inequality: {overall.verdict}"]
    if bound is not None:
        lines.append(f"c(H_1 + ... + H_k) <= {fmt(bound)}")
    for n, c, cert in parsed:
        lines.append(f"[{n}] c_H = {fmt(c)}")
        lines += _cert_text(cert.to_dict(), "  ")
    return Output(report, "\n".join(lines) + "\n", 0 if overall.passed else 1)


def _diagram_from_scenario(doc: dict, args) -> diagrams.Diagram:
    kind = doc.get("type")
    if kind == "killer":
        c_H = number(doc["c_H"])
        if "relspec" in doc:
            rel = numbers(doc["relspec"])
        else:
            dom = parse_domain(doc["domain"])
            amb = _ambient(args, doc)
            samples = numbers(doc.get("samples", []))
            tau_end = number(doc.get("tau_end", c_H))
            lo = min(samples + [c_H]) - tau_end
            w = SpectrumWindow(lo - 1.0, max(samples + [c_H]) + 1.0)
            rel = _relspec(dom, amb, args, window=w)
        return diagrams.build_killer_diagram(c_H, rel, numbers(doc.get("samples", [])),
                                             number(doc["tau_end"]) if "tau_end" in doc else None)
    if kind == "contraction":
        pairs = [numbers(p) for p in doc.get("orbits", [])]
        return diagrams.build_contraction_diagram(pairs, bool(doc.get("require_nonnegative", False)))
    if kind == "shrink":
        chi = diagrams.RadialProfile([numbers(p) for p in doc["profile"]], doc.get("smoothing"))
        dom = parse_domain(doc["domain"])
        return diagrams.build_shrink_diagram(chi, dom.table(args.cutoff), _ambient(args, doc), number(doc["delta"]))
    if kind == "explicit":
        lines = []
        for i, ln in enumerate(doc.get("lines", [])):
            lines.append(diagrams.DiagramLine(str(ln.get("label", f"L{i}")), number(ln["start"]), number(ln["slope"]),
                                              number(ln.get("tau_lo", 0.0)), number(ln.get("tau_hi", 1.0)),
                                              str(ln.get("kind", "sloped")), number(ln.get("slack", 0.0))))
        start = numbers(doc.get("start", [0.0, 0.0]))
        return diagrams.Diagram(tuple(lines), (start[0], start[1]), number(doc.get("tau_end", 1.0)),
                                doc.get("start_line"))
    raise InputError(f"unknown diagram type {kind!r}")


def cmd_diagram(args) -> Output:
    doc = load_document(_need_input(args))
    d = _diagram_from_scenario(doc, args)
    res = diagrams.track_spectral_invariant(d)
    lines = [{"label": ln.label, "start": ln.start, "slope": ln.slope, "tau_lo": ln.tau_lo, "tau_hi": ln.tau_hi,
              "kind": ln.kind, "slack": ln.slack} for ln in d.lines]
    report = {"command": "diagram", "type": doc.get("type"), "start": list(d.start), "tau_end": d.tau_end,
              "lines": lines, "final": res.final_value, "max_bound": res.max_bound,
              "path": [list(p) for p in res.path],
              "reachable": [{"label": k, "from": v} for k, v in sorted(res.reachable.items())]}
    final = "undetermined" if res.final_value is None else fmt(res.final_value)
    text = (f"{len(d.lines)} lines, start ({fmt(d.start[0])}, {fmt(d.start[1])}), tau_end {fmt(d.tau_end)}\n"
            f"final = {final}\nmax bound = {fmt(res.max_bound)}\n")
    return Output(report, text, 0, diagrams.diagram_csv(d), diagrams.diagram_svg(d, res))


def cmd_pb_bound(args) -> Output:
    doc = load_document(_need_input(args))
    cov = parse_cover(doc)
    count_self = not args.exclude_self
    mode = doc.get("mode", "monotone")
    report: dict = {"command": "pb-bound", "mode": mode, "count_self": count_self}
    try:
        if mode == "monotone":
            amb = _ambient(args, doc)
            value, cert = pb_lower_bound_monotone(cov, amb, int(doc.get("n", 1)), count_self)
        elif mode == "rational":
            kappa = number(doc["kappa"]) if "kappa" in doc else _ambient(args, doc).kappa
            value, cert = pb_lower_bound_rational(cov, kappa, count_self)
        else:
            raise InputError(f"unknown cover mode {mode!r}")
    except HypothesisViolated as exc:
        report.update(bound=None, certificate=exc.certificate)
        text = "pb lower bound: not certified\n" + "\n".join(_cert_text(exc.certificate.to_dict())) + "\n"
        return Output(report, text, 1)
    report.update(degree=degree(cov, doubled=(mode == "rational"), count_self=count_self), bound=value,
                  certificate=cert)
    lines = [f"pb >= {fmt(value)}", *_cert_text(cert.to_dict())]
    if mode == "monotone":
        supers = [{"name": s.name, "certificate": superheavy_complement(s, amb)} for s in cov.sets]
        report["superheavy_complements"] = supers
        for s in supers:
            lines.append(f"complement of {s['name']} superheavy: {s['certificate'].verdict}")
    return Output(report, "\n".join(lines) + "\n")


COMMANDS: dict[str, tuple[Callable, str]] = {
    "rs-index": (cmd_rs_index, "Robbin-Salamon index of a symplectic path given by its generator"),
    "spectrum": (cmd_spectrum, "Reeb orbit table of a domain up to an action cutoff"),
    "invariant-c": (cmd_invariant_c, "the invariant C(U) of a domain"),
    "rel-spectrum": (cmd_rel_spectrum, "relative index -n spectrum of a domain in an ambient manifold"),
    "check-max-ineq": (cmd_check_max_ineq, "certify the max inequality for a scenario of disjoint domains"),
    "diagram": (cmd_diagram, "build and track a deformation diagram"),
    "pb-bound": (cmd_pb_bound, "Poisson bracket lower bound of a cover"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", nargs="+", help="input document(s), YAML or JSON")
    common.add_argument("--ambient", help="ambient file or inline form such as monotone:-1 or rational:2")
    common.add_argument("--window", help="value window LO:HI")
    common.add_argument("--cutoff", type=float, help="action cutoff T")
    common.add_argument("--format", default="text", choices=["text", "json", "csv", "svg"])
    common.add_argument("--out", help="write the output here instead of stdout")
    for key, (mod, attr) in TOLERANCES.items():
        common.add_argument(f"--tol-{key}", type=float, default=None,
                            help=f"override {attr} (default {getattr(mod, attr):g})")
    parser = argparse.ArgumentParser(prog="maxineq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=helptext)
        if name == "rs-index":
            p.add_argument("--steps", type=int, help="integration steps")
        if name == "rel-spectrum":
            p.add_argument("--degenerate", action="store_true", help="unfiltered spectrum (any index)")
        if name == "pb-bound":
            p.add_argument("--exclude-self", action="store_true", help="do not count a set in its own degree")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    saved = {}
    try:
        for key, (mod, attr) in TOLERANCES.items():
            val = getattr(args, f"tol_{key}")
            if val is not None:
                if not val > 0:
                    raise InputError(f"--tol-{key} must be positive")
                saved[(mod, attr)] = getattr(mod, attr)
                setattr(mod, attr, val)
        out = COMMANDS[args.command][0](args)
        rendered = out.render(args.format)
        code = out.exit_code
    except MaxIneqError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (KeyError, TypeError, ValueError) as exc:
        print(f"error: malformed input: {exc!r}", file=sys.stderr)
        return 2
    finally:
        for (mod, attr), val in saved.items():
            setattr(mod, attr, val)
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)
    return code
