"""
Command-line front end: ``hopfjet <command> [spec.json] [flags]``.

Commands ``resonance``, ``linearize``, ``normal-form``, ``connection`` and
``cohomology`` read a germ description (JSON file) and write one JSON report.
Exit codes: 0 success, 2 resonant input or resonance obstruction, 3
ill-conditioned or numerically failed, 4 input error.  A report is written
in every case; diagnostics go to stderr.

Spec schema::

    {"dimension": 2, "truncation_degree": 8,
     "map": ["z1/2 + z2^2", "z2/3"],
     "tolerance": 1e-9,
     "bundle": "tangent" | {"rank": r, "cocycle": [[expr, ...], ...]}
               | {"tensor": {"p": 1, "q": 0, "k_can": 0}} | {"line": "a+bi"}}

Numbers may be decimals or rational strings ``"p/q"``.  Component and
eigenvalue labels in reports are 1-based.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
import warnings

import numpy as np

from . import __version__
from .cohomology import TensorBundleSpec, mall_dims
from .connection import (
    EquivariantBundle,
    curvature,
    linearize_via_connection,
    solve_equivariant_connection,
)
from .errors import (
    DimensionMismatchError,
    DimensionTooSmallError,
    ExpressionSyntaxError,
    HopfJetError,
    IllConditionedWarning,
    NoConvergenceError,
    NonGermError,
    NotClosedError,
    NotContractionError,
    NotDiagonalError,
    NotFlatError,
    ResonanceObstructionError,
    ResonantInputError,
    SingularCocycleError,
    SingularLinearPartError,
)
from .normal_form import linearize, normal_form, verify_conjugacy
from .parse import format_germ, format_monomial_term, format_number, format_series, parse_constant, parse_germ, parse_series
from .series import TruncatedSeries
from .spectral import (
    DEFAULT_TOL,
    BundleAction,
    bundle_resonances,
    eigen,
    matrix_resonances,
    require_contraction,
    small_divisor,
)

EXIT_OK, EXIT_RESONANT, EXIT_NUMERICAL, EXIT_INPUT = 0, 2, 3, 4

CONVENTIONS = {
    "indices": "components, eigenvalues and variables are 1-based (z1, a1, e1)",
    "homological_operator": "L(h) = A h - h o A on degree-d vector fields",
    "conjugacy": "U o g o U^-1 = target; U tangent to the identity for linearize and normal-form",
    "resonance": "a_i = prod a_j^k_j with |k| >= 2, tested as |a_i - a^k| <= tol |a_i|",
    "bundle_resonance": "b_p = b_q prod a_j^k_j with |k| >= 1, tested as |b_p - b_q a^k| <= tol |b_p|",
    "connection": "fixed point of theta = phi^-1 d phi + phi^-1 (g^* theta) phi",
    "section_weight": "e_I dz_J z^m has pullback weight a^m prod a_J / prod a_I (prod a)^k / lambda; invariant iff |w - 1| <= tol",
    "complex_numbers": "strings 'a+bi'",
}

INPUT_ERRORS = (
    DimensionMismatchError,
    DimensionTooSmallError,
    ExpressionSyntaxError,
    NonGermError,
    NotContractionError,
    NotDiagonalError,
    SingularCocycleError,
    SingularLinearPartError,
)
NUMERICAL_ERRORS = (NoConvergenceError, NotFlatError, NotClosedError)


class SpecError(ValueError):
    """Malformed input file; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"field '{field}': {message}")
        self.field = field


# ---------------------------------------------------------------------------
# JSON helpers

def _real(x):
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")


def _checked(value, tol):
    return {"value": _real(value), "tol": _real(tol), "ok": bool(value <= tol)}


def _relation(r):
    out = {"kind": r.kind, "exponents": [int(e) for e in r.exponents], "text": str(r).split("  (")[0],
           "residual": _real(r.residual)}
    if r.kind == "matrix":
        out["target"] = r.target + 1
    else:
        out["target"] = [r.target[0] + 1, r.target[1] + 1]
    return out


def _kept(i, m):
    return {"component": i + 1, "exponents": [int(e) for e in m], "term": format_monomial_term(i, m)}


# ---------------------------------------------------------------------------
# spec parsing

def _number(value, field):
    try:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return complex(value)
        if isinstance(value, str):
            return parse_constant(value)
    except (ValueError, HopfJetError) as exc:
        raise SpecError(field, f"not a number: {value!r} ({exc})") from None
    raise SpecError(field, f"not a number: {value!r}")


def _integer(value, field):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError(field, f"expected an integer, got {value!r}")
    return value


def load_spec(path):
    """Read a JSON spec from ``path`` (``-`` for stdin)."""
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise SpecError("spec", f"cannot read {path}: {exc.strerror}") from None
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError("spec", f"invalid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise SpecError("spec", "top level must be an object")
    return spec


def build_germ(spec, degree=None):
    """Germ, truncation degree and tolerance from a spec dict (flags applied by caller)."""
    for key in ("dimension", "truncation_degree", "map"):
        if key not in spec:
            raise SpecError(key, "missing")
    n = _integer(spec["dimension"], "dimension")
    if n < 1:
        raise SpecError("dimension", "must be at least 1")
    cap = _integer(spec["truncation_degree"], "truncation_degree") if degree is None else degree
    if cap < 2:
        raise SpecError("truncation_degree", f"must be at least 2, got {cap}")
    texts = spec["map"]
    if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
        raise SpecError("map", "expected a list of expression strings")
    if len(texts) != n:
        raise SpecError("map", f"{len(texts)} expressions for dimension {n}")
    try:
        g = parse_germ(texts, n, cap)
    except (ExpressionSyntaxError, NonGermError, SingularLinearPartError) as exc:
        raise SpecError("map", str(exc)) from None
    return g


def _tolerance(spec, flag):
    if flag is not None:
        return flag
    if "tolerance" not in spec:
        return DEFAULT_TOL
    tol = _number(spec["tolerance"], "tolerance")
    if tol.imag != 0 or tol.real <= 0:
        raise SpecError("tolerance", "must be a positive real")
    return tol.real


def build_bundle(g, entry):
    """EquivariantBundle from the ``bundle`` field (tangent or explicit cocycle)."""
    if entry is None or entry == "tangent":
        return EquivariantBundle.tangent(g)
    if isinstance(entry, dict) and "cocycle" in entry:
        rows = entry["cocycle"]
        r = _integer(entry.get("rank", len(rows) if isinstance(rows, list) else 0), "bundle.rank")
        if not isinstance(rows, list) or len(rows) != r or any(not isinstance(row, list) or len(row) != r for row in rows):
            raise SpecError("bundle.cocycle", f"expected a {r} x {r} matrix of expressions")
        try:
            series = [[parse_series(str(e), g.n, g.cap) for e in row] for row in rows]
        except ExpressionSyntaxError as exc:
            raise SpecError("bundle.cocycle", str(exc)) from None
        try:
            return EquivariantBundle(g, series)
        except SingularCocycleError as exc:
            raise SpecError("bundle.cocycle", str(exc)) from None
    raise SpecError("bundle", "connection needs 'tangent' or a rank/cocycle bundle")


def tensor_spec(entry):
    """TensorBundleSpec from the ``bundle`` field or a ``--bundle`` name."""
    if entry is None:
        return TensorBundleSpec()
    if isinstance(entry, str):
        name = entry.strip().lower()
        named = {
            "o": TensorBundleSpec(), "structure": TensorBundleSpec(),
            "tangent": TensorBundleSpec.tangent(), "cotangent": TensorBundleSpec.cotangent(),
            "canonical": TensorBundleSpec.canonical(),
            "omega1-end": TensorBundleSpec.one_forms_in_endomorphisms(),
        }
        if name in named:
            return named[name]
        if name.startswith("cotangent^"):
            try:
                return TensorBundleSpec.cotangent(int(name.split("^", 1)[1]))
            except ValueError:
                pass
        if name.startswith("canonical^"):
            try:
                return TensorBundleSpec.canonical(int(name.split("^", 1)[1]))
            except ValueError:
                pass
        if name.startswith("line:"):
            return TensorBundleSpec.line(_number(entry.split(":", 1)[1], "bundle"))
        if name.startswith("tensor:"):
            parts = name.split(":", 1)[1].split(",")
            try:
                p, q, k = (int(x) for x in (parts + ["0"])[:3])
                return TensorBundleSpec(p, q, k)
            except ValueError:
                pass
        raise SpecError("bundle", f"unknown bundle {entry!r}")
    if isinstance(entry, dict) and "tensor" in entry:
        t = entry["tensor"]
        if not isinstance(t, dict):
            raise SpecError("bundle.tensor", "expected an object with p, q, k_can")
        try:
            return TensorBundleSpec(
                _integer(t.get("p", 0), "bundle.tensor.p"),
                _integer(t.get("q", 0), "bundle.tensor.q"),
                _integer(t.get("k_can", 0), "bundle.tensor.k_can"),
            )
        except ValueError as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError("bundle.tensor", str(exc)) from None
    if isinstance(entry, dict) and "line" in entry:
        lam = _number(entry["line"], "bundle.line")
        if lam == 0:
            raise SpecError("bundle.line", "character must be nonzero")
        return TensorBundleSpec.line(lam)
    raise SpecError("bundle", "cohomology needs a tensor or line bundle")


def _alpha_list(text):
    try:
        return np.array([parse_constant(x) for x in text.split(",") if x.strip()], dtype=complex)
    except (ValueError, HopfJetError) as exc:
        raise SpecError("alpha", f"cannot parse {text!r} ({exc})") from None


# ---------------------------------------------------------------------------
# commands

def _spectral_block(s):
    return {
        "eigenvalues": [format_number(a) for a in s.eigenvalues],
        "schur_residual": _checked(s.residual(), 1e-9 * max(1.0, float(np.abs(s.source).max()))),
    }


def _self_test(rng, U, g, target):
    """Evaluate ``U o g - target o U`` at random points of radius 1e-2."""
    n = g.n
    worst = 0.0
    for _ in range(5):
        z = 1e-2 * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2 * n)
        worst = max(worst, float(np.abs(U(g(z)) - target(U(z))).max()))
    return {"points": 5, "radius": 1e-2, "max_discrepancy": _real(worst)}


def cmd_resonance(spec, args, report):
    g = build_germ(spec, args.degree)
    tol = _tolerance(spec, args.tol)
    report["tolerance"] = tol
    s = eigen(g.linear_part)
    report["spectral"] = _spectral_block(s)
    require_contraction(s.eigenvalues)
    rels = matrix_resonances(s, tol)
    report["resonances"] = [_relation(r) for r in rels]
    report["small_divisor"] = _real(small_divisor(s.eigenvalues, 2, g.cap))
    entry = spec.get("bundle")
    if entry is not None and not (isinstance(entry, dict) and "tensor" in entry):
        if isinstance(entry, dict) and "line" in entry:
            action = BundleAction.diagonal([_number(entry["line"], "bundle.line")])
        else:
            action = BundleAction(build_bundle(g, entry).fiber_matrix)
        report["bundle_resonances"] = [_relation(r) for r in bundle_resonances(s, action, tol)]
    if args.seed is not None:
        rng = np.random.default_rng(args.seed)
        perm = rng.permutation(g.n)
        again = matrix_resonances(s.eigenvalues[perm], tol)
        report["self_test"] = {"permutation": [int(p) + 1 for p in perm],
                               "relation_count": len(again), "consistent": len(again) == len(rels)}
    return EXIT_OK


def _germ_payload(rep, g, target, tol, report, args):
    scale = rep.diagnostics.get("scale", 1.0)
    report["change"] = format_germ(rep.change)
    report["normalized"] = format_germ(rep.normalized)
    report["small_divisor"] = _real(rep.small_divisor)
    report["ill_conditioned"] = bool(rep.ill_conditioned)
    report["residuals"]["conjugacy"] = _checked(verify_conjugacy(rep.change, g, target), tol * max(scale, 1.0))
    report["scale"] = _real(scale)
    if args.seed is not None:
        report["self_test"] = _self_test(np.random.default_rng(args.seed), rep.change, g, target)


def cmd_linearize(spec, args, report):
    g = build_germ(spec, args.degree)
    tol = _tolerance(spec, args.tol)
    report["tolerance"] = tol
    s = eigen(g.linear_part)
    report["spectral"] = _spectral_block(s)
    require_contraction(s.eigenvalues)
    try:
        rep = linearize(g, tol=tol)
    except ResonantInputError as exc:
        report["resonances"] = [_relation(r) for r in exc.relations]
        raise
    target = rep.normalized
    _germ_payload(rep, g, target, tol, report, args)
    return EXIT_NUMERICAL if rep.ill_conditioned else EXIT_OK


def cmd_normal_form(spec, args, report):
    g = build_germ(spec, args.degree)
    tol = _tolerance(spec, args.tol)
    report["tolerance"] = tol
    s = eigen(g.linear_part)
    report["spectral"] = _spectral_block(s)
    require_contraction(s.eigenvalues)
    rep = normal_form(g, tol=tol)
    report["resonances"] = [_relation(r) for r in matrix_resonances(s, tol)]
    report["kept_monomials"] = [_kept(i, m) for i, m in rep.kept_monomials]
    scale = rep.diagnostics.get("scale", 1.0)
    report["residuals"]["non_resonant_remainder"] = _checked(rep.max_residual, tol * max(scale, 1.0))
    _germ_payload(rep, g, rep.normalized, tol, report, args)
    return EXIT_NUMERICAL if rep.ill_conditioned else EXIT_OK


def _connection_entries(theta):
    basis = theta.basis
    stop = int(basis.offsets[min(theta.valid_degree, theta.cap) + 1])
    out = []
    for l in range(theta.n):
        for u in range(theta.rank):
            for v in range(theta.rank):
                c = np.zeros(basis.size, dtype=complex)
                c[:stop] = theta.coeffs[l, u, v, :stop]
                if np.any(c):
                    out.append({"leg": l + 1, "row": u + 1, "col": v + 1,
                                "series": format_series(TruncatedSeries(theta.n, theta.cap, c))})
    return out


def cmd_connection(spec, args, report):
    g = build_germ(spec, args.degree)
    tol = _tolerance(spec, args.tol)
    report["tolerance"] = tol
    s = eigen(g.linear_part)
    report["spectral"] = _spectral_block(s)
    require_contraction(s.eigenvalues)
    entry = spec.get("bundle", "tangent")
    E = build_bundle(g, entry)
    report["bundle"] = {"kind": E.preset or "cocycle", "rank": E.rank}
    if E.preset == "tangent":
        rep = linearize_via_connection(g, tol=tol)
        theta = rep.diagnostics["connection"]
        d = rep.diagnostics
        report["residuals"]["curvature"] = _checked(d["curvature"], 1e-9)
        report["residuals"]["torsion"] = _checked(d["torsion"], 1e-9)
        report["residuals"]["fixed_point"] = _checked(d["fixed_point_residual"], 1e-10)
        report["residuals"]["closedness"] = _checked(d["closedness"], 1e-8)
        report["min_weight_gap"] = _real(d["min_weight_gap"])
        _germ_payload(rep, g, rep.normalized, tol, report, args)
    else:
        theta = solve_equivariant_connection(E, tol=tol)
        report["residuals"]["curvature"] = _checked(curvature(theta).max_abs(), 1e-9)
        report["residuals"]["fixed_point"] = _checked(theta.diagnostics["fixed_point_residual"], 1e-10)
        report["min_weight_gap"] = _real(theta.diagnostics["min_weight_gap"])
        report["ill_conditioned"] = False
    report["connection"] = {"valid_degree": theta.valid_degree, "entries": _connection_entries(theta)}
    return EXIT_NUMERICAL if report.get("ill_conditioned") else EXIT_OK


def cmd_cohomology(spec, args, report):
    if args.alpha is not None:
        alpha = _alpha_list(args.alpha)
        tol = args.tol if args.tol is not None else _tolerance(spec or {}, None)
    else:
        if spec is None:
            raise SpecError("alpha", "give --alpha or a spec file")
        g = build_germ(spec, args.degree)
        tol = _tolerance(spec, args.tol)
        alpha = g.linear_part
    report["tolerance"] = tol
    bundle = tensor_spec(args.bundle if args.bundle is not None else (spec or {}).get("bundle"))
    diag = np.diag(alpha) if np.ndim(alpha) == 2 else alpha
    report["alpha"] = [format_number(a) for a in np.ravel(diag)]
    res = mall_dims(alpha, bundle, tol)
    report["bundle"] = {"label": bundle.label(), "p": bundle.p, "q": bundle.q, "k_can": bundle.k_can,
                        "line_character": format_number(bundle.line_character)}
    report["dims"] = list(res.dims)
    report["witnesses"] = [
        {"upper": [i + 1 for i in up], "lower": [j + 1 for j in lo], "exponents": [int(e) for e in m]}
        for up, lo, m in res.witnesses
    ]
    report["notes"] = res.notes
    if args.seed is not None:
        rng = np.random.default_rng(args.seed)
        perm = rng.permutation(len(report["alpha"]))
        again = mall_dims(np.ravel(diag)[perm], bundle, tol).dims
        report["self_test"] = {"permutation": [int(p) + 1 for p in perm], "dims": list(again),
                               "consistent": list(again) == list(res.dims)}
    return EXIT_OK


COMMANDS = {
    "resonance": cmd_resonance,
    "linearize": cmd_linearize,
    "normal-form": cmd_normal_form,
    "connection": cmd_connection,
    "cohomology": cmd_cohomology,
}


# ---------------------------------------------------------------------------
# driver

def build_parser():
    parser = argparse.ArgumentParser(prog="hopfjet", description="Resonance, normal forms, flat connections and "
                                     "cohomology for germs of holomorphic contractions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("spec", nargs="?" if name == "cohomology" else None, help="JSON spec file ('-' for stdin)")
        p.add_argument("--out", default=None, help="report path (default stdout)")
        p.add_argument("--tol", type=float, default=None, help="tolerance (overrides the input file)")
        p.add_argument("--degree", type=int, default=None, help="truncation degree (overrides the input file)")
        p.add_argument("--seed", type=int, default=None, help="seed for the randomized self-test")
        p.add_argument("--quiet", action="store_true", help="no diagnostics on stderr")
        if name == "cohomology":
            p.add_argument("--alpha", default=None, help="comma-separated diagonal eigenvalues")
            p.add_argument("--bundle", default=None,
                           help="O, tangent, cotangent[^l], canonical[^k], omega1-end, tensor:p,q,k or line:lambda")
    return parser


def input_hash(command, spec, flags):
    blob = json.dumps({"command": command, "spec": spec, "flags": flags}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def run(argv=None):
    """Run one command; returns ``(exit_code, report, parsed_args)``."""
    args = build_parser().parse_args(argv)
    flags = {"tol": args.tol, "degree": args.degree, "seed": args.seed}
    if args.command == "cohomology":
        flags.update(alpha=args.alpha, bundle=args.bundle)
    report = {"command": args.command, "spec": None, "flags": flags, "input_hash": None,
              "conventions": CONVENTIONS, "status": None, "residuals": {}, "warnings": []}
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                spec = load_spec(args.spec) if args.spec is not None else None
                report["spec"] = spec
                if args.degree is not None and args.degree < 2:
                    raise SpecError("degree", f"must be at least 2, got {args.degree}")
                if args.tol is not None and not args.tol > 0:
                    raise SpecError("tol", "must be positive")
                code = COMMANDS[args.command](spec, args, report)
                report["status"] = "ill_conditioned" if code == EXIT_NUMERICAL else "ok"
            finally:
                report["warnings"] = [{"category": w.category.__name__, "message": str(w.message)} for w in caught]
        if code == EXIT_OK and any(w["category"] == IllConditionedWarning.__name__ for w in report["warnings"]):
            code, report["status"] = EXIT_NUMERICAL, "ill_conditioned"
    except ResonantInputError as exc:
        code, report["status"], report["error"] = EXIT_RESONANT, "resonant", str(exc)
    except ResonanceObstructionError as exc:
        code, report["status"] = EXIT_RESONANT, "obstructed"
        report["error"] = str(exc)
        report["obstruction"] = {"degree": exc.degree,
                                 "weight": None if exc.weight is None else format_number(exc.weight),
                                 "defect": None if exc.defect is None else _real(exc.defect)}
    except SpecError as exc:
        code, report["status"], report["error"] = EXIT_INPUT, "input_error", f"invalid spec: {exc}"
        report["field"] = exc.field
    except INPUT_ERRORS as exc:
        code, report["status"], report["error"] = EXIT_INPUT, "input_error", str(exc)
    except NUMERICAL_ERRORS as exc:
        code, report["status"], report["error"] = EXIT_NUMERICAL, "numerical_failure", str(exc)
    report["input_hash"] = input_hash(args.command, report["spec"], flags)
    report["exit_code"] = code
    report["wall_time"] = time.perf_counter() - t0
    return code, report, args


def main(argv=None):
    code, report, args = run(argv)
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if not args.quiet:
        if "error" in report:
            print(f"hopfjet {args.command}: {report['error']}", file=sys.stderr)
        for w in report["warnings"]:
            print(f"warning: {w['category']}: {w['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
