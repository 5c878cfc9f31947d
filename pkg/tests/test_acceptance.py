"""Acceptance criteria 1-8, each reporting one PASS/FAIL line.

Criteria 3, 4 and 8 share one reproducible suite of 100 random
non-resonant germs (n cycling through 1..4, D = 8, coefficient moduli
<= 2, small divisor >= 1e-3).  ``scale`` is the largest coefficient
modulus of the germ.
"""
import time

import numpy as np
import pytest

from hopfjet.cohomology import TensorBundleSpec, invariant_section_dim, mall_dims, resonance_cohomology_bridge
from hopfjet.connection import EquivariantBundle, linearize_via_connection, solve_equivariant_connection
from hopfjet.errors import HopfJetError, ResonantInputError
from hopfjet.normal_form import linearize, normal_form, verify_conjugacy
from hopfjet.parse import parse_germ
from hopfjet.sampling import germ_suite, random_diagonal_contraction
from hopfjet.series import TruncatedMapGerm, compose_germs, invert_germ
from hopfjet.spectral import diagonal_data, matrix_resonances, resonance_bound

from oracles import brute_matrix_resonances, brute_section_count

SUITE_SEED = 20240611
RESULTS = []


def record(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    return ok


# -- shared suite --------------------------------------------------------------

@pytest.fixture(scope="session")
def suite():
    germs = germ_suite(SUITE_SEED, count=100, cap=8, dims=(1, 2, 3, 4), min_divisor=1e-3)
    t0 = time.perf_counter()
    reports = [linearize(g) for g in germs]
    elapsed = time.perf_counter() - t0
    return germs, reports, elapsed


@pytest.fixture(scope="session")
def connections(suite):
    germs, _, _ = suite
    out = []
    for g in germs:
        try:
            out.append(linearize_via_connection(g))
        except HopfJetError as exc:
            out.append(exc)
    return out


# -- criteria ------------------------------------------------------------------

def test_criterion_1_exact_shear():
    t0 = time.perf_counter()
    g = parse_germ(["z1/2 + z2^2", "z2/3"], 2, 8)
    rep = linearize(g)
    res = verify_conjugacy(rep.change, g, TruncatedMapGerm.linear(np.diag([0.5, 1 / 3]), 8))
    elapsed = time.perf_counter() - t0
    expect = parse_germ(["z1 + 18/7*z2^2", "z2"], 2, 8)
    err = float(np.abs(rep.change.coeffs - expect.coeffs).max())
    ok = err <= 1e-15 and res <= 1e-12 and elapsed < 1.0
    assert record(1, ok, f"|U - U_exact| = {err:.1e}, conjugacy = {res:.1e}, {elapsed:.3f} s")


def test_criterion_2_resonant_refusal():
    t0 = time.perf_counter()
    g = parse_germ(["z1/2", "z2/4 + z1^2"], 2, 8)
    with pytest.raises(ResonantInputError) as exc:
        linearize(g)
    rep = normal_form(g)
    elapsed = time.perf_counter() - t0
    refused = [tuple(r.exponents) for r in exc.value.relations] == [(2, 0)]
    # kept monomial (2, (2, 0)) in 1-based components is (1, (2, 0)) here
    ok = refused and rep.normalized == g and rep.kept_monomials == [(1, (2, 0))] and elapsed < 1.0
    assert record(2, ok, f"refused = {refused}, kept = {rep.kept_monomials}, {elapsed:.3f} s")


def test_criterion_3_random_linearization(suite):
    germs, reports, elapsed = suite
    ratios = np.array([r.max_residual / r.diagnostics["scale"] for r in reports])
    sizes = np.array([float(np.abs(r.change.coeffs).max()) for r in reports])
    over = ratios > 1e-9
    bad = int(np.sum(over))
    ok = bad == 0 and elapsed < 60.0
    big = f", max|U| on those {sizes[over].min():.0e}..{sizes[over].max():.0e}" if bad else ""
    assert record(3, ok, f"{bad}/100 over 1e-9*scale (worst ratio {ratios.max():.1e}{big}), {elapsed:.1f} s")


def test_criterion_4_connection_pipeline(suite, connections):
    germs, reports, _ = suite
    failed, curv, tors, lin = 0, [], [], []
    for rn, rc in zip(reports, connections):
        if isinstance(rc, Exception):
            failed += 1
            continue
        curv.append(rc.diagnostics["curvature"])
        tors.append(rc.diagnostics["torsion"])
        W = compose_germs(rc.change, invert_germ(rn.change))
        lin.append(float(np.abs(W.nonlinear_part()).max(initial=0.0)))
    curv, tors, lin = map(np.array, (curv, tors, lin))
    bad_c, bad_t, bad_l = int(np.sum(curv > 1e-9)), int(np.sum(tors > 1e-9)), int(np.sum(lin > 1e-8))
    ok = failed == 0 and bad_c == bad_t == bad_l == 0
    assert record(4, ok, f"errors {failed}, curvature > 1e-9: {bad_c}, torsion > 1e-9: {bad_t}, "
                         f"nonlinear > 1e-8: {bad_l} (worst {curv.max():.1e}, {tors.max():.1e}, {lin.max():.1e})")


def test_criterion_5_cohomology_values():
    t0 = time.perf_counter()
    alpha = (0.5, 1 / 3, 0.2)

    def brute(spec):
        return len(brute_section_count(list(alpha), spec.p, spec.q, spec.k_can, spec.line_character, 1e-9))

    O = TensorBundleSpec.structure_sheaf()
    K = TensorBundleSpec.canonical()
    checks = {
        "dims(O)": mall_dims(alpha, O).dims == (1, 1, 0, 0) and brute(O) == 1
        and brute(O.serre_dual_twist()) == 0,
        "h0(K)": invariant_section_dim(alpha, K)[0] == 0 == brute(K),
    }
    for l in (1, 2, 3):
        spec = TensorBundleSpec.cotangent(l)
        checks[f"h0(Omega1^{l})"] = invariant_section_dim(alpha, spec)[0] == 0 == brute(spec)
    elapsed = time.perf_counter() - t0
    ok = all(checks.values()) and elapsed < 5.0
    assert record(5, ok, ", ".join(f"{k} {'ok' if v else 'WRONG'}" for k, v in checks.items()) + f", {elapsed:.2f} s")


def test_criterion_6_resonance_bridge():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SUITE_SEED + 6)
    mismatches, resonant = 0, 0
    spec = TensorBundleSpec.one_forms_in_endomorphisms()
    for k in range(1000):
        alpha = random_diagonal_contraction(rng, 1 + k % 4)
        left = bool(matrix_resonances(diagonal_data(alpha)))
        right = invariant_section_dim(alpha, spec)[0] > 0
        resonant += left
        mismatches += (left != right) or not resonance_cohomology_bridge(alpha)
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 120.0
    assert record(6, ok, f"{mismatches}/1000 mismatches ({resonant} resonant), {elapsed:.1f} s")


def test_criterion_7_resonance_oracle():
    rng = np.random.default_rng(SUITE_SEED + 7)
    mismatches, total = 0, 0
    for k in range(500):
        alpha = random_diagonal_contraction(rng, 1 + k % 4)
        got = {(r.target, tuple(r.exponents)) for r in matrix_resonances(alpha)}
        want = brute_matrix_resonances(list(alpha), resonance_bound(alpha), 1e-9)
        mismatches += got != want
        total += len(want)
    ok = mismatches == 0
    assert record(7, ok, f"{mismatches}/500 set mismatches ({total} relations in all)")


def test_criterion_8_uniqueness(suite, connections):
    germs, _, _ = suite
    diffs, rel = [], []
    for g, rc in zip(germs, connections):
        E = EquivariantBundle.tangent(g)
        a = rc.diagnostics["connection"].coeffs if not isinstance(rc, Exception) else \
            solve_equivariant_connection(E, ordering="forward").coeffs
        b = solve_equivariant_connection(E, ordering="reverse").coeffs
        d = float(np.abs(a - b).max())
        diffs.append(d)
        rel.append(d / max(1.0, float(np.abs(a).max())))
    diffs, rel = np.array(diffs), np.array(rel)
    bad = int(np.sum(diffs > 1e-10))
    ok = bad == 0
    assert record(8, ok, f"{bad}/100 over 1e-10 (worst {diffs.max():.1e}; worst relative {rel.max():.1e})")
