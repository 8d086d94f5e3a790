import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmvkit.core import (Arc, DomainError, Explicit, GaugeTransform, Gauged, Geometric,
                         OutOfRangeError, Periodic, apply_gauge, arc_contains,
                         arc_from_endpoints, full_circle, gauge_reduction, rho,
                         sequence_from_json, window)


def test_window_examples():
    np.testing.assert_allclose(window(Geometric(0.5, -1j), 0, 3), [0.5, -0.5j, -0.5, 0.5j],
                               atol=1e-15)
    np.testing.assert_allclose(window(Periodic([0.3]), -2, 2), [0.3] * 5)
    np.testing.assert_allclose(window(Explicit([0.1, 0.2], 0), 0, 1), [0.1, 0.2])


def test_explicit_out_of_range():
    seq = Explicit([0.1, 0.2], offset=3)
    with pytest.raises(OutOfRangeError):
        seq.window(2, 4)
    assert seq.index_range == (3, 4)


def test_disk_bounds_enforced():
    with pytest.raises(DomainError):
        Periodic([0.3, 1.0])
    with pytest.raises(DomainError):
        Geometric(1.0, 1)
    with pytest.raises(DomainError):
        Explicit([0.5j, 1 + 1e-13])


def test_geometric_renormalizes_g():
    seq = Geometric(0.5, (1 + 5e-15) * np.exp(0.3j))
    assert abs(seq.g) == 1.0 or abs(abs(seq.g) - 1) < 1e-16
    with pytest.raises(DomainError):
        Geometric(0.5, 1.1)


@given(st.floats(0, 0.999), st.floats(-np.pi, np.pi))
def test_derived_quantities(r, phi):
    a = r * np.exp(1j * phi)
    seq = Periodic([a])
    assert 0 < seq.rho(0) <= 1
    assert seq.a(0).real > 0 and seq.b(0).real > 0
    assert abs(seq.rho(0) ** 2 + abs(a) ** 2 - 1) < 1e-12


def test_apply_gauge_examples():
    out = apply_gauge(Geometric(0.5, -1j), GaugeTransform(1, 1j))
    assert isinstance(out, Geometric)
    np.testing.assert_allclose(out.window(-3, 3), 0.5, atol=1e-15)
    seq = Periodic([0.3, 0.4])
    assert apply_gauge(seq, GaugeTransform(1, 1)).window(-5, 5).tolist() == seq.window(-5, 5).tolist()
    neg = apply_gauge(seq, GaugeTransform(-1, 1))
    assert isinstance(neg, Periodic)
    np.testing.assert_allclose(neg.cycle, [-0.3, -0.4])


def test_gauge_irrational_keeps_values():
    seq = Periodic([0.3, 0.4j, -0.2])
    t = GaugeTransform(np.exp(0.7j), np.exp(1.1j))
    out = apply_gauge(seq, t)
    assert isinstance(out, Gauged)
    ks = np.arange(-7, 8)
    np.testing.assert_allclose(out.at(ks), t.factor(ks) * seq.at(ks), atol=1e-15)
    back = apply_gauge(out, t.inverse())
    np.testing.assert_allclose(back.at(ks), seq.at(ks), atol=1e-15)


def test_gauge_reduction():
    base, t = gauge_reduction(Geometric(0.4, 1j))
    np.testing.assert_allclose(apply_gauge(base, t).window(0, 5), Geometric(0.4, 1j).window(0, 5),
                               atol=1e-15)
    assert gauge_reduction(Periodic([0.1])) is None


def test_json_roundtrip():
    for seq in (Explicit([0.1, 0.2j], 4), Periodic([0.3, -0.1j]), Geometric(0.5, -1j),
                Gauged(Periodic([0.2, 0.3]), 1j, np.exp(0.5j))):
        again = sequence_from_json(seq.to_json())
        np.testing.assert_allclose(again.window(4, 5), seq.window(4, 5))
    with pytest.raises(DomainError):
        sequence_from_json({"type": "spiral"})
    with pytest.raises(DomainError):
        sequence_from_json({"type": "periodic"})


def test_arc_examples():
    assert arc_contains(arc_from_endpoints(0, np.pi), np.pi / 2)
    assert arc_contains(arc_from_endpoints(3 * np.pi / 2, 5 * np.pi / 2), np.pi / 4)
    assert not Arc(0, np.pi, closed0=False, closed1=False).contains(0.0)
    assert Arc(0, np.pi).contains(0.0)
    with pytest.raises(DomainError):
        Arc(1.0, 1.0)
    with pytest.raises(DomainError):
        Arc(1.0, 0.5)
    with pytest.raises(DomainError):
        Arc(0.0, 7.0)


def test_full_circle():
    arc = full_circle()
    assert arc.is_full and arc.width == pytest.approx(2 * np.pi)
    assert arc.contains(123.4)


@given(st.floats(0, 6.28), st.floats(0.01, 6.28), st.floats(-10, 10), st.integers(-3, 3))
@settings(max_examples=200)
def test_arc_membership_shift_invariant(t0, w, q, m):
    arc = Arc(t0, t0 + w)
    assert arc.contains(q) == arc.contains(q + 2 * np.pi * m)
    assert 0 < arc.width <= 2 * np.pi
    assert arc.midpoint == pytest.approx(0.5 * (arc.theta0 + arc.theta1))


def test_rho_vectorized():
    np.testing.assert_allclose(rho(np.array([0, 0.6, 0.8j])), [1, 0.8, 0.6])
    assert math.isclose(rho(0.5), math.sqrt(0.75))
