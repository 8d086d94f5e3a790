"""Acceptance criteria 1-11.

Each test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary and when this file is run as a script.
"""

import math
import time

import numpy as np
import pytest

from cmvkit.borg import borg_forward, borg_inverse, check_reflectionless, empirical_xi, \
    xi_step_profile
from cmvkit.cmv import build_full_section, eigenvalues, unitarity_residual
from cmvkit.core import (Arc, Explicit, GaugeTransform, Gauged, Geometric, Periodic,
                         apply_gauge)
from cmvkit.floquet import (band_arcs, discriminant_theta, period2_discriminant,
                            period2_lambdas)
from cmvkit.herglotz import CaratheodoryFunction, arc_mass, herglotz_eval, point_mass
from cmvkit.cmv import SpectralMeasure
from cmvkit.trace import L_coeffs, exp_taylor, log_taylor, moments, xi_quadrature_check, \
    xi_moments
from cmvkit.weyl import M_functions, resolvent_entry

from conftest import random_disk, random_periodic

RESULTS: list[str] = []


def record(n: int, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def random_generator(rng, i):
    kind = i % 4
    if kind == 0:
        return random_periodic(rng, 6, 0.95)
    if kind == 1:
        return Explicit(random_disk(rng, 801, 0.95), offset=-400)
    if kind == 2:
        return Geometric(complex(random_disk(rng, 1, 0.95)[0]), np.exp(1j * rng.uniform(0, 6.3)))
    return Gauged(random_periodic(rng, 5, 0.95), np.exp(1j * rng.uniform(0, 6.3)),
                  np.exp(1j * rng.uniform(0, 6.3)))


def test_criterion_01_unitarity_and_factorization():
    rng = np.random.default_rng(1)
    worst_u = worst_f = 0.0
    for i in range(20):
        seq = random_generator(rng, i)
        for n in (64, 256):
            lo = int(rng.integers(-100, 100))
            mat = build_full_section(seq, lo, lo + n - 1, *rng.uniform(0, 2 * np.pi, 2))
            worst_u = max(worst_u, unitarity_residual(mat))
            worst_f = max(worst_f, abs(mat.product() - mat.sparse()).max())
    record(1, worst_u < 1e-12 and worst_f < 1e-14,
           f"max |U*U - I| = {worst_u:.2e} (< 1e-12), max |VW - U| = {worst_f:.2e}")


def test_criterion_02_trace_identity_j1():
    rng = np.random.default_rng(2)
    err = 0.0
    for i in range(20):
        seq = random_generator(rng, i)
        k = int(rng.integers(-50, 50))
        want = -2 * seq.alpha(k) * np.conj(seq.alpha(k + 1))
        err = max(err, abs(L_coeffs(seq, k, 1)[0] - want))
    # reflectionless sequences: Borg geometric ones and random periodic ones
    seqs = [borg_forward(Arc(t0, t0 + w), ph) for t0, w, ph in
            zip(rng.uniform(0, 6.28, 4), rng.uniform(0.3, 6.0, 4), rng.uniform(-3, 3, 4))]
    seqs += [random_periodic(rng, 6) for _ in range(4)]
    quad = max(float(xi_quadrature_check(s, int(rng.integers(-5, 5)), 1, N=2 ** 12)[0])
               for s in seqs)
    record(2, err < 1e-13 and quad < 1e-4,
           f"L_1 matvec vs formula {err:.2e} (< 1e-13); Xi quadrature residual {quad:.2e} (< 1e-4)")


def test_criterion_03_log_recursion():
    rng = np.random.default_rng(3)
    err = 0.0
    for _ in range(100):
        c = random_disk(rng, 8, 1.0)
        err = max(err, np.max(np.abs(exp_taylor(log_taylor(c)) - c)))
    record(3, err < 1e-12, f"exp(log) coefficient error {err:.2e} over 100 heads (< 1e-12)")


def test_criterion_04_free_case():
    rng = np.random.default_rng(4)
    seq = Periodic([0.0])
    z = random_disk(rng, 200, 0.9)
    errs = []
    for method in ("riccati", "resolvent", "floquet"):
        w = M_functions(seq, 3, z, method)
        errs += [np.max(np.abs(w.M_plus - 1)), np.max(np.abs(w.M_minus + 1)),
                 np.max(np.abs(w.Phi_plus)), np.max(np.abs(w.M11 - 1))]
    errs.append(np.max(np.abs(L_coeffs(seq, 0, 12))))
    arcs = band_arcs(seq)
    full = len(arcs) == 1 and arcs[0].is_full
    worst = max(errs)
    record(4, worst < 1e-8 and full, f"max deviation {worst:.2e} (< 1e-8), full-circle band: {full}")


def test_criterion_05_method_agreement():
    rng = np.random.default_rng(5)
    seqs = [random_periodic(rng, 6) for _ in range(5)]
    seqs += [Explicit(random_disk(rng, 8001, 0.8), offset=-4000) for _ in range(5)]
    worst = 0.0
    t = time.perf_counter()
    for seq in seqs:
        z = random_disk(rng, 200, 0.95)
        k0 = int(rng.integers(-10, 10))
        a = M_functions(seq, k0, z, "resolvent")
        b = M_functions(seq, k0, z, "riccati")
        worst = max(worst, np.max(np.abs(a.M_plus - b.M_plus)), np.max(np.abs(a.M_minus - b.M_minus)))
    record(5, worst < 1e-7, f"resolvent vs Riccati max |dM| = {worst:.2e} over 10 x 200 z (< 1e-7), "
           f"{time.perf_counter() - t:.1f} s")


def test_criterion_06_resolvent_formula():
    rng = np.random.default_rng(6)
    worst = 0.0
    seqs = [random_periodic(rng, 6) for _ in range(5)]
    for i in range(50):
        seq = seqs[i % 5]
        mat = build_full_section(seq, -128, 127)
        r = rng.uniform(0.1, 0.9)
        z = r * np.exp(1j * rng.uniform(0, 2 * np.pi))
        k, kp = (int(x) for x in rng.integers(-20, 21, 2))
        k0 = int(rng.integers(-5, 6))
        e = np.zeros(mat.size, complex)
        e[mat.index(kp)] = 1
        dense = mat.resolvent_solve(z, e)[mat.index(k)]
        worst = max(worst, abs(resolvent_entry(seq, k0, z, k, kp) - dense))
    record(6, worst < 1e-6, f"kernel vs 256-section inverse max error {worst:.2e} at 50 triples (< 1e-6)")


def test_criterion_07_floquet_closed_form():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        a1, a2 = rng.uniform(0, 0.95, 2)
        t = rng.uniform(0, 2 * np.pi, 100)
        worst = max(worst, np.max(np.abs(discriminant_theta(Periodic([a1, a2]), t)
                                         - period2_discriminant(a1, a2, t))))
    s = math.sqrt(0.5)
    half = band_arcs(Periodic([s, s]))
    e_half = max(abs(half[0].theta0 - np.pi / 2), abs(half[0].theta1 - 3 * np.pi / 2))
    two = band_arcs(Periodic([0.3, 0.6]))
    lp, lm = period2_lambdas(0.3, 0.6)
    want = sorted([np.arccos(lp), np.arccos(lm), 2 * np.pi - np.arccos(lm), 2 * np.pi - np.arccos(lp)])
    got = sorted([two[0].theta0, two[0].theta1, two[1].theta0, two[1].theta1])
    e_two = max(abs(g - w) for g, w in zip(got, want))
    lam_ok = abs(lp - (-0.18 + math.sqrt(0.5824))) < 1e-15 and abs(lm - (-0.18 - math.sqrt(0.5824))) < 1e-15
    ok = worst < 1e-12 and len(half) == 1 and e_half < 1e-10 and len(two) == 2 and e_two < 1e-10 and lam_ok
    record(7, ok, f"closed form vs monodromy {worst:.2e}; half-circle edges {e_half:.1e}; "
           f"two arcs edges {e_two:.1e}")


def test_criterion_08_periodic_reflectionless():
    rng = np.random.default_rng(8)
    medians = []
    for _ in range(5):
        seq = random_periodic(rng, 6)
        # bands narrower than the edge margins have no interior to test
        arcs = [a for a in band_arcs(seq) if a.width > 1e-2]
        rep = check_reflectionless(seq, arcs, sites=(0, 1), tol=1e-4, edge_margin=1e-3)
        medians.append(float(np.max(rep.site_medians("v"))))
    record(8, max(medians) < 1e-4, f"worst median |Phi_+ conj(Phi_-) - 1| = {max(medians):.2e} (< 1e-4)")


def test_criterion_09_borg_round_trip():
    rng = np.random.default_rng(9)
    e_rt = e_alg = e_quad = l1 = 0.0
    all_ok = True
    for _ in range(50):
        t0 = rng.uniform(0, 2 * np.pi)
        arc = Arc(t0, t0 + rng.uniform(0.05, 2 * np.pi - 0.05))
        seq = borg_forward(arc, rng.uniform(-np.pi, np.pi))
        back = borg_inverse(seq)
        e_rt = max(e_rt, abs(np.angle(np.exp(1j * (back.theta0 - arc.theta0)))),
                   abs(np.angle(np.exp(1j * (back.theta1 - arc.theta1)))))
        all_ok &= check_reflectionless(seq, [arc], sites=(0, 1), tol=1e-4).verdict
        emp = empirical_xi(seq, 0, 4096)
        prof, _ = xi_step_profile(arc, 4096)
        l1 = max(l1, emp.l1_distance(prof))
        want = -np.exp(-0.5j * (arc.theta0 + arc.theta1)) * math.cos(arc.width / 4) ** 2
        a = seq.window(0, 1)
        e_alg = max(e_alg, abs(a[0] * np.conj(a[1]) - want))
        # alpha_k conj(alpha_{k+1}) = -L_1 / 2 = -i integral Xi conj(zeta) d mu_0
        e_quad = max(e_quad, abs(-0.5 * xi_moments(seq, 0, 1, N=4096)[0] - want))
    ok = e_rt < 1e-8 and all_ok and l1 < 0.02 and e_alg < 1e-12 and e_quad < 1e-4
    record(9, ok, f"round trip {e_rt:.1e} rad; reflectionless {all_ok}; L1(Xi, step) {l1:.1e}; "
           f"product identity {e_alg:.1e} / quadrature {e_quad:.1e}")


def test_criterion_10_gauge_covariance():
    rng = np.random.default_rng(10)
    e_phi = e_11 = e_spec = 0.0
    for _ in range(5):
        alpha = random_periodic(rng, 5)
        g0, g1 = np.exp(1j * rng.uniform(0, 2 * np.pi, 2))
        beta = apply_gauge(alpha, GaugeTransform(g0, g1))
        z = random_disk(rng, 50, 0.9)
        k = int(rng.integers(-6, 7))
        ck = g0 * g1 ** k
        a = M_functions(alpha, k, z, "riccati")
        b = M_functions(beta, k, g1 * z, "riccati")
        # Phi_pm(z, k; alpha) = c_k Phi_pm(g1 z, k; beta), written for Phi_+ and 1/Phi_-
        e_phi = max(e_phi, np.max(np.abs(a.Phi_plus - ck * b.Phi_plus)),
                    np.max(np.abs(a.inv_Phi_minus - b.inv_Phi_minus / ck)))
        e_11 = max(e_11, np.max(np.abs(a.Phi11 - b.Phi11)))
        lo, hi = -100, 99
        ea = eigenvalues(build_full_section(alpha, lo, hi))
        eb = eigenvalues(build_full_section(beta, lo, hi, np.angle(g0 * g1 ** lo),
                                            np.angle(g0 * g1 ** (hi + 1))))
        sa = np.sort(np.mod(np.angle(ea), 2 * np.pi))
        sb = np.sort(np.mod(np.angle(eb / g1), 2 * np.pi))
        e_spec = max(e_spec, np.max(np.abs(np.exp(1j * sa) - np.exp(1j * sb))))
    ok = e_phi < 1e-7 and e_11 < 1e-7 and e_spec < 1e-8
    record(10, ok, f"Phi scaling {e_phi:.1e}, Phi_11 {e_11:.1e} (< 1e-7); spectra {e_spec:.1e} (< 1e-8)")


def test_criterion_11_herglotz_calculus():
    rng = np.random.default_rng(11)
    N = 512
    theta = 2 * np.pi * np.arange(N) / N
    leb = SpectralMeasure(np.array([], complex), np.array([]), theta, np.ones(N))
    e_norm = np.max(np.abs(herglotz_eval(leb, 0.0, random_disk(rng, 100, 0.95)) - 1))
    atom = CaratheodoryFunction.from_measure(SpectralMeasure(np.array([1.0 + 0j]), np.array([1.0])))
    e_atom = abs(point_mass(atom, 1.0) - 1)
    arc = Arc(0.4, 2.9)
    mass, _, _ = arc_mass(CaratheodoryFunction.constant(1.0), arc)
    e_flat = abs(mass - arc.width / (2 * np.pi))
    e_m11 = 0.0
    for i in range(20):
        seq = random_generator(rng, i)
        k = int(rng.integers(-50, 50))
        e_m11 = max(e_m11, abs(M_functions(seq, k, np.array([0.0])).M11[0] - 1))
    ok = e_norm < 1e-10 and e_atom < 1e-6 and e_flat < 1e-14 and e_m11 < 1e-12
    record(11, ok, f"kernel normalization {e_norm:.1e}; atom weight {e_atom:.1e}; "
           f"flat mass {e_flat:.1e}; M_11(0) {e_m11:.1e}")


if __name__ == "__main__":  # pragma: no cover
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
