"""Command-line front end: load bundle specs, dispatch computations, and
emit reproducible JSON reports.

Exit codes: 0 success, 2 spec/flag validation failure, 3 computation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .algebra.field import FieldError, PrimeField, parse_field_flag
from .algebra.interp import InterpError
from .algebra.matrix import MatrixError
from .algebra.poly import PolyError
from .cech import CechError, cech_h0
from .cohom import (
    CohomError,
    P2Cohomology,
    h0_on_conic_divisor,
    splitting_of,
    stability_check,
    _h0_p1_coker,
)
from .loci import (
    LociError,
    PencilProbe,
    curve_singular_points,
    fit_j2_c0,
    j1_poly_c0,
    j2_det_cm1,
    jlines_cm1,
    jump_size_conic,
    line_is_jumping,
    line_splitting,
    m12_hyperplane_coeffs,
    modification_conic_tests,
    pencil_multiplicity,
    rng_stream,
    sample_jumping_conics,
    second_kind_curve,
    splitting_statistics,
    type02_predicates,
    type03_geometry,
)
from .sheafkit import (
    BundleFamily,
    ConicForm,
    SheafError,
    TYPE02,
    TYPE03G,
    TYPE03NG,
    TYPEM12,
    line_param,
    load_bundle_spec,
    random_line,
    two_points_on_line,
)

SCHEMA = "1"

VALIDATION_ERRORS = (SheafError, FieldError, PolyError, ValueError)
COMPUTATION_ERRORS = (LociError, CohomError, CechError, MatrixError, InterpError)


@dataclass
class RunConfig:
    spec_path: str
    command: str
    modulus: object = None  # a field object or None for the spec's own
    seed: int = 0
    samples: int = 200
    window: tuple = None
    conic: tuple = None
    line: tuple = None
    out: str = None
    pretty: bool = False
    kind: str = "J2"

    def __post_init__(self):
        if self.command not in ("splitting", "jlines", "jconics", "locus", "verify", "sample"):
            raise SheafError(f"unknown command {self.command!r}")
        if self.samples < 0:
            raise SheafError("samples must be non-negative")


def _worker_count():
    raw = os.environ.get("JUMPLOCI_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_tasks(fn, count):
    """Run index-parameterized tasks, possibly on a small thread pool.

    Results are merged in index order, so the worker count never changes
    the output.
    """
    workers = _worker_count()
    if workers == 1 or count < 4:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def _load_family(config: RunConfig) -> BundleFamily:
    with open(config.spec_path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SheafError(
                f"invalid JSON in {config.spec_path} at line {exc.lineno}, column {exc.colno}"
            ) from exc
    if config.modulus is not None:
        obj = dict(obj)
        obj["field"] = config.modulus.to_json()
    return load_bundle_spec(obj)


def _base_report(config: RunConfig, fam: BundleFamily) -> dict:
    return {
        "schema": SCHEMA,
        "command": config.command,
        "family": fam.tag,
        "field": fam.field.to_json(),
        "chern": [fam.c1, fam.c2],
        "seed": config.seed,
    }


def _parse_tuple(text, n, name):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise SheafError(f"{name} needs {n} comma-separated coefficients")
    return tuple(int(p) for p in parts)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_splitting(config, fam):
    report = _base_report(config, fam)
    if config.conic is not None:
        cf = ConicForm(fam.field, config.conic)
        if cf.is_smooth():
            st = splitting_of(fam.pres.pullback(cf.parameterize()))
            report["splitting"] = st.to_json()
        jumping, size = jump_size_conic(fam, cf)
        report["curve"] = {"conic": cf.to_json(), "smooth": cf.is_smooth()}
        report["is_jumping"] = jumping
        report["jump_size"] = size
    elif config.line is not None:
        st = line_splitting(fam, config.line)
        report["curve"] = {"line": [fam.field.coeff_str(fam.field.normalize(v)) for v in config.line]}
        report["splitting"] = st.to_json()
        report["is_jumping"] = st.parts[0] > 0
    else:
        raise SheafError("splitting needs --conic or --line")
    return report


def _cmd_jconics(config, fam):
    if config.conic is None:
        raise SheafError("jconics needs --conic")
    cf = ConicForm(fam.field, config.conic)
    jumping, size = jump_size_conic(fam, cf)
    report = _base_report(config, fam)
    report["conic"] = cf.to_json()
    report["smooth"] = cf.is_smooth()
    report["is_jumping"] = jumping
    report["jump_size"] = size
    return report


def _cmd_jlines(config, fam):
    report = _base_report(config, fam)
    if fam.c1 == 0:
        locus = j1_poly_c0(fam)
        report["kind"] = "J1"
        report["degree"] = locus.degree
        report["poly"] = locus.poly.to_json()
        report["provenance"] = locus.provenance
    else:
        lines = jlines_cm1(fam)
        report["kind"] = "J1"
        report["lines"] = [
            [fam.field.coeff_str(v) for v in l] for l in lines
        ]
        report["count"] = len(lines)
    return report


def _cmd_locus(config, fam):
    report = _base_report(config, fam)
    kind = config.kind
    report["kind"] = kind
    checks = {}
    if kind == "J2":
        if fam.c1 == -1:
            locus = j2_det_cm1(fam)
            checks["degree-is-c2-minus-1"] = locus.degree == fam.c2 - 1
            report["samples_used"] = 0
        else:
            locus = fit_j2_c0(fam, config.seed, config.samples if config.samples else None)
            _, used = fam.extra["_fit_j2"][config.seed]
            checks["degree-is-c2"] = locus.degree == fam.c2
            report["samples_used"] = used
    elif kind == "J1":
        if fam.c1 != 0:
            return _cmd_jlines(config, fam)
        locus = j1_poly_c0(fam)
        checks["degree-is-c2"] = locus.degree == fam.c2
    elif kind == "second_kind":
        locus = second_kind_curve(fam)
        checks["degree-is-2c2-minus-2"] = locus.degree == 2 * (fam.c2 - 1)
    elif kind == "R":
        locus = type03_geometry(fam).ram_cubic()
        checks["degree-is-3"] = locus.degree == 3
    else:
        raise SheafError(f"unknown locus kind {kind!r}")
    report["degree"] = locus.degree
    report["poly"] = locus.poly.to_json()
    report["provenance"] = locus.provenance
    report["variables"] = list(locus.variables)
    report["checks"] = checks
    return report


def _cmd_sample(config, fam):
    report = _base_report(config, fam)
    n = config.samples
    stats_c = splitting_statistics(fam, n, config.seed, curve="conic")
    stats_l = splitting_statistics(fam, n, config.seed, curve="line")
    report["samples"] = n
    report["conics"] = {
        "modal": list(stats_c["modal"]),
        "histogram": {str(list(k)): v for k, v in sorted(stats_c["counts"].items())},
    }
    report["lines"] = {
        "modal": list(stats_l["modal"]),
        "histogram": {str(list(k)): v for k, v in sorted(stats_l["counts"].items())},
    }
    return report


# ---------------------------------------------------------------------------
# the verification suite
# ---------------------------------------------------------------------------

def verify_suite(fam: BundleFamily, seed: int, samples: int):
    """Run every invariant applicable to the family; failures are reported
    as data.  An unstable bundle short-circuits the suite."""
    checks = {}
    short_circuit = False

    def record(name, theorem, ok, detail=None):
        entry = {"theorem": theorem, "pass": bool(ok)}
        if detail is not None:
            entry["detail"] = detail
        checks[name] = entry

    try:
        from .sheafkit import euler_char

        for k in range(-6, 7):
            euler_char(fam.pres, k)
        record("euler-characteristic", "Riemann-Roch on the plane", True)
    except SheafError as exc:
        record("euler-characteristic", "Riemann-Roch on the plane", False, str(exc))

    status = stability_check(fam.pres)
    expected = "stable"
    record("stability", "section criterion for stability", status == expected, status)
    if status != expected:
        return {"checks": checks, "all_pass": False, "short_circuit": True}

    n = max(20, samples)
    balanced = (0, 0) if fam.c1 == 0 else (-1, -1)
    line_generic = (0, 0) if fam.c1 == 0 else (0, -1)

    def conic_stat(i):
        rng = rng_stream(seed, "verify-conic", i)
        cf = ConicForm.random_smooth(fam.field, rng)
        return splitting_of(fam.pres.pullback(cf.param)).parts

    def line_stat(i):
        rng = rng_stream(seed, "verify-line", i)
        return line_splitting(fam, random_line(fam.field, rng)).parts

    conic_counts = Counter(_map_tasks(conic_stat, n))
    line_counts = Counter(_map_tasks(line_stat, n))
    modal_c = conic_counts.most_common(1)[0][0]
    modal_l = line_counts.most_common(1)[0][0]
    record(
        "generic-splitting-conics",
        "balanced restriction to conics (Grauert-Mulich type bound)",
        modal_c == balanced and (modal_c[0] - modal_c[-1]) <= 1,
        {"modal": list(modal_c)},
    )
    record(
        "generic-splitting-lines",
        "balanced restriction to lines (Grauert-Mulich)",
        modal_l == line_generic,
        {"modal": list(modal_l)},
    )

    if fam.c1 == 0:
        try:
            j1 = j1_poly_c0(fam)
            record(
                "line-locus-degree",
                "jumping lines form a divisor of degree c2 (Barth)",
                j1.degree == fam.c2,
                {"degree": j1.degree},
            )
        except COMPUTATION_ERRORS as exc:
            record("line-locus-degree", "jumping lines form a divisor of degree c2 (Barth)", False, str(exc))
        try:
            fit = fit_j2_c0(fam, seed)
            record(
                "conic-locus-degree",
                "jumping conics form a hypersurface of degree c2",
                fit.degree == fam.c2,
                {"degree": fit.degree},
            )
            jline = _find_jumping_line(fam, seed)
            closure_ok = True
            if jline is not None:
                for i in range(20):
                    rng = rng_stream(seed, "closure", i)
                    prod = ConicForm.product_of_lines(
                        fam.field, jline, random_line(fam.field, rng)
                    )
                    if not fit.vanishes_at(prod.xi):
                        closure_ok = False
                        break
            record(
                "singular-conic-closure",
                "products with a jumping line lie in the conic locus closure",
                jline is not None and closure_ok,
                {"jumping_line": list(jline) if jline else None},
            )
            mult_ok, mult_detail = _multiplicity_probe(fam, fit, seed)
            record(
                "pencil-multiplicity",
                "pencil intersection order bounds the jump size",
                mult_ok,
                mult_detail,
            )
        except COMPUTATION_ERRORS as exc:
            record("conic-locus-degree", "jumping conics form a hypersurface of degree c2", False, str(exc))
        sym_ok, sym_detail = _sym2_consistency(fam, seed, min(60, max(20, samples // 10)))
        record(
            "sym2-consistency",
            "sections of the symmetric square detect jumps",
            sym_ok,
            sym_detail,
        )
    else:
        try:
            jd = j2_det_cm1(fam)
            record(
                "conic-locus-degree",
                "jumping conics form a hypersurface of degree c2 - 1",
                jd.degree == fam.c2 - 1,
                {"degree": jd.degree},
            )
            sk = second_kind_curve(fam)
            record(
                "second-kind-degree",
                "second-kind jumping lines form a curve of degree 2(c2-1) (Hulek)",
                sk.degree == 2 * (fam.c2 - 1),
                {"degree": sk.degree},
            )
            lines = jlines_cm1(fam)
            expected_count = fam.c2 * (fam.c2 - 1) // 2
            record(
                "jumping-line-count",
                "finitely many jumping lines, binomial(c2, 2) generically (Hulek)",
                len(lines) == expected_count,
                {"count": len(lines)},
            )
            skc_ok = _second_kind_consistency(fam, jd, seed, 40)
            record(
                "second-kind-consistency",
                "double-line membership matches sections on the doubled line",
                skc_ok,
            )
            mult_ok, mult_detail = _multiplicity_probe(fam, jd, seed)
            record(
                "pencil-multiplicity",
                "pencil intersection order bounds the jump size",
                mult_ok,
                mult_detail,
            )
        except COMPUTATION_ERRORS as exc:
            record("conic-locus-degree", "jumping conics form a hypersurface of degree c2 - 1", False, str(exc))

    oracle_ok = _oracle_agreement(fam, seed, 10)
    record(
        "chart-oracle-agreement",
        "two independent section counters agree on restrictions",
        oracle_ok,
    )

    _family_checks(fam, seed, samples, record)
    all_pass = all(entry["pass"] for entry in checks.values())
    return {"checks": checks, "all_pass": all_pass, "short_circuit": short_circuit}


def _find_jumping_line(fam, seed):
    j1 = j1_poly_c0(fam)
    f = fam.field
    for i in range(60):
        rng = rng_stream(seed, "find-jline", i)
        base, direction = random_line(f, rng), random_line(f, rng)
        uni = j1.poly.restrict_pencil(list(base), list(direction))
        if uni.is_zero():
            continue
        for r in uni.roots_fp():
            cand = tuple(
                f.add(b, f.mul(f.normalize(r), d)) for b, d in zip(base, direction)
            )
            if any(not f.is_zero(c) for c in cand) and line_is_jumping(fam, cand):
                return cand
    return None


def _multiplicity_probe(fam, locus, seed):
    f = fam.field
    details = []
    try:
        pts = sample_jumping_conics(fam, 6, seed) if fam.c1 == 0 else None
    except COMPUTATION_ERRORS as exc:
        return False, str(exc)
    if pts is None:
        # sample the determinant locus along pencils
        pts = []
        for i in range(30):
            rng = rng_stream(seed, "mult-pencil", i)
            a = ConicForm.random_smooth(f, rng)
            b = ConicForm.random_smooth(f, rng)
            rest = locus.poly.restrict_pencil(list(a.xi), list(b.xi))
            if rest.is_zero():
                continue
            for r in rest.roots_fp():
                probe = PencilProbe(a, b)
                try:
                    pencil_multiplicity(fam, locus, probe, r)
                    details.append(probe.samples[f.normalize(r)])
                except LociError as exc:
                    return False, str(exc)
            if len(details) >= 6:
                break
        return True, {"samples": len(details)}
    for cf in pts:
        if not cf.is_smooth():
            continue
        for i in range(2):
            rng = rng_stream(seed, "mult-other", i)
            other = ConicForm.random_smooth(f, rng)
            try:
                probe = PencilProbe(cf, other)
            except LociError:
                continue
            try:
                pencil_multiplicity(fam, locus, probe, 0)
                details.append(probe.samples[f.zero])
            except LociError as exc:
                return False, str(exc)
    return True, {"samples": len(details)}


def _sym2_consistency(fam, seed, n):
    from .loci import _alpha
    from .sheafkit import sym2_resolution

    f = fam.field
    alpha = _alpha(fam)
    for i in range(n):
        rng = rng_stream(seed, "sym2", i)
        cf = ConicForm.random_smooth(f, rng)
        parts = splitting_of(fam.pres.pullback(cf.param)).parts
        a = parts[0]
        h0_sq = h0_on_conic_divisor(alpha.model, cf, 0)
        h1_sq = h0_sq - 3  # chi of the restricted symmetric square is 3
        want = 2 * a - 1 if a >= 1 else 0
        if h1_sq != want:
            return False, {"conic": cf.to_json(), "h1": h1_sq, "expected": want}
    return True, {"samples": n}


def _second_kind_consistency(fam, jd, seed, n):
    f = fam.field
    model = P2Cohomology(fam.pres)
    for i in range(n):
        rng = rng_stream(seed, "second-kind", i)
        l = random_line(f, rng)
        cf = ConicForm.veronese(f, l)
        on_locus = jd.vanishes_at(cf.xi)
        has_sections = h0_on_conic_divisor(model, cf, 0) > 0
        if on_locus != has_sections:
            return False
    return True


def _oracle_agreement(fam, seed, n):
    f = fam.field
    for i in range(n):
        rng = rng_stream(seed, "oracle", i)
        cf = ConicForm.random_smooth(f, rng)
        pb = fam.pres.pullback(cf.param)
        for k in range(-2, 2):
            if _h0_p1_coker(pb, k) != cech_h0(pb, k):
                return False
    return True


def _family_checks(fam, seed, samples, record):
    f = fam.field
    if fam.tag == TYPE02:
        pred = type02_predicates(fam)
        agree = True
        for i in range(max(100, samples)):
            rng = rng_stream(seed, "wedge-verify", i)
            l = random_line(f, rng)
            p, q = two_points_on_line(f, l)
            if pred.line_test(p, q) != line_is_jumping(fam, l):
                agree = False
                break
        record(
            "wedge-line-agreement",
            "a line jumps exactly when the section planes at two points meet",
            agree,
        )
        lengths_ok = True
        for i in range(3):
            rng = rng_stream(seed, "schubert", i)
            w = tuple(f.rand(rng) for _ in range(4))
            try:
                if pred.section_zero_length(w) != 3:
                    lengths_ok = False
            except COMPUTATION_ERRORS:
                lengths_ok = False
        record("section-zero-count", "sections vanish on length-3 subschemes", lengths_ok)
    elif fam.tag == TYPE03G:
        geo = type03_geometry(fam)
        try:
            cubic = geo.ram_cubic()
            pts = geo.sample_ram_points(20, seed)
            j1 = j1_poly_c0(fam)
            ok = all(j1.vanishes_at(geo.jline_from_ram(p)) for p in pts)
            record(
                "branch-to-jumping-lines",
                "the branch curve maps onto the jumping-line curve",
                ok,
                {"points": len(pts)},
            )
        except COMPUTATION_ERRORS as exc:
            record("branch-to-jumping-lines", "the branch curve maps onto the jumping-line curve", False, str(exc))
    elif fam.tag in (TYPE03NG, TYPEM12):
        agree = True
        tested = 0
        for i in range(40):
            rng = rng_stream(seed, "kernel-test", i)
            cf = ConicForm.random_smooth(f, rng)
            if modification_conic_tests(fam, cf) != jump_size_conic(fam, cf)[0]:
                agree = False
                break
            tested += 1
        try:
            jump_pts = sample_jumping_conics(fam, 10, seed) if fam.c1 == 0 else []
        except COMPUTATION_ERRORS:
            jump_pts = []
        for cf in jump_pts:
            if not cf.is_smooth():
                continue
            if modification_conic_tests(fam, cf) != jump_size_conic(fam, cf)[0]:
                agree = False
                break
            tested += 1
        record(
            "kernel-line-agreement",
            "kernel lines at the intersection points detect jumping conics",
            agree,
            {"tested": tested},
        )
        if fam.tag == TYPEM12:
            a00, a01, a11 = m12_hyperplane_coeffs(fam)
            jd = j2_det_cm1(fam)
            closed = {
                (1, 0, 0, 0, 0, 0): a00,
                (0, 1, 0, 0, 0, 0): a01,
                (0, 0, 0, 1, 0, 0): a11,
            }
            closed = {k: v for k, v in closed.items() if not f.is_zero(v)}
            from .algebra.poly import HomPoly, VARS_XI

            closed_poly = HomPoly(f, VARS_XI, 1, closed).lead_normalized()
            record(
                "hyperplane-closed-form",
                "the conic locus is the explicit modification hyperplane",
                closed_poly == jd.poly,
                {"closed_form": closed_poly.to_json()},
            )
        if fam.tag == TYPE03NG:
            try:
                j1 = j1_poly_c0(fam)
                pts, length = curve_singular_points(j1)
                record(
                    "line-locus-singularity",
                    "the cubic of jumping lines has exactly one singular point",
                    len(pts) == 1 and length <= 2,
                    {"points": [[f.coeff_str(c) for c in p] for p in pts], "length": length},
                )
            except COMPUTATION_ERRORS as exc:
                record("line-locus-singularity", "the cubic of jumping lines has exactly one singular point", False, str(exc))


def _cmd_verify(config, fam):
    report = _base_report(config, fam)
    suite = verify_suite(fam, config.seed, config.samples)
    report["checks"] = suite["checks"]
    report["all_pass"] = suite["all_pass"]
    report["short_circuit"] = suite["short_circuit"]
    return report


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_COMMANDS = {
    "splitting": _cmd_splitting,
    "jlines": _cmd_jlines,
    "jconics": _cmd_jconics,
    "locus": _cmd_locus,
    "verify": _cmd_verify,
    "sample": _cmd_sample,
}


def run(config: RunConfig):
    """Execute a command; returns (exit_code, report_dict)."""
    try:
        fam = _load_family(config)
    except FileNotFoundError as exc:
        return 2, {"schema": SCHEMA, "error": f"cannot read spec: {exc}"}
    except VALIDATION_ERRORS as exc:
        return 2, {"schema": SCHEMA, "error": str(exc)}
    try:
        report = _COMMANDS[config.command](config, fam)
    except VALIDATION_ERRORS as exc:
        return 2, {"schema": SCHEMA, "error": str(exc)}
    except COMPUTATION_ERRORS as exc:
        return 3, {"schema": SCHEMA, "error": str(exc), "seed": config.seed}
    if config.command == "verify" and report.get("short_circuit"):
        return 3, report
    return 0, report


def _emit(report, config):
    if config.pretty:
        text = json.dumps(report, sort_keys=True, indent=2)
    else:
        text = json.dumps(report, sort_keys=True, separators=(",", ":"))
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="jumploci",
        description="Splitting types, jumping lines and jumping conics of rank-2 bundles on the plane.",
    )
    ap.add_argument("command", choices=sorted(_COMMANDS))
    ap.add_argument("--spec", required=True, help="bundle spec JSON file")
    ap.add_argument("--field", default=None, help="Fp:P or Q (overrides the spec field)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--window", default=None, help="LO:HI twist window")
    ap.add_argument("--conic", default=None, help="xi00,xi01,xi02,xi11,xi12,xi22")
    ap.add_argument("--line", default=None, help="l0,l1,l2")
    ap.add_argument("--kind", default="J2", choices=["J1", "J2", "R", "second_kind"])
    ap.add_argument("--out", default=None)
    ap.add_argument("--pretty", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        window = None
        if args.window:
            lo, _, hi = args.window.partition(":")
            window = (int(lo), int(hi))
        config = RunConfig(
            spec_path=args.spec,
            command=args.command,
            modulus=parse_field_flag(args.field) if args.field else None,
            seed=args.seed,
            samples=args.samples,
            window=window,
            conic=_parse_tuple(args.conic, 6, "--conic") if args.conic else None,
            line=_parse_tuple(args.line, 3, "--line") if args.line else None,
            out=args.out,
            pretty=args.pretty,
            kind=args.kind,
        )
    except VALIDATION_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    code, report = run(config)
    _emit(report, config)
    return code


if __name__ == "__main__":
    sys.exit(main())
