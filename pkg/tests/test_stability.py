import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eqstab.errors import ConvergenceError, PreconditionError
from eqstab.expr import Binary, Const
from eqstab.stability import (
    GAS, INCONCLUSIVE, UNSTABLE, LureSystem, Uniqueness, bendixson_test, classify, eigen_field,
    find_equilibria, popov_margin, popov_test, refine_equilibrium, taylor_lure, verdict_kind,
)
from eqstab.sysdef import DynamicalSystem, builtin, parse_system
from eqstab.eig import Spectrum


@pytest.mark.parametrize("name, x0, expected", [
    ("example2", [4.0], [1.0]),
    ("example3", [0.5, 3.0], [1.0, 1.0]),
    ("example4", [1.2, 0.1, -0.1], [1.0, 0.0, 0.0]),
])
def test_refine_equilibrium(name, x0, expected):
    s = builtin(name)
    eq = refine_equilibrium(s, x0)
    np.testing.assert_allclose(eq.x, expected, atol=1e-5)
    assert eq.residual <= 1e-10 * max(1.0, np.linalg.norm(eq.x))


def test_refine_reports_failure():
    s = parse_system("dim 1\nx1' = x1^2 + 1")
    with pytest.raises(ConvergenceError):
        refine_equilibrium(s, [0.3])


def test_find_equilibria_examples():
    eqs = find_equilibria(builtin("example3"), [(-3, 3)] * 2, grid=9)
    assert len(eqs) == 1
    np.testing.assert_allclose(eqs[0].x, [1, 1], atol=1e-9)
    eqs = find_equilibria(builtin("example4"), [(-2, 3)] * 3, grid=7)
    assert len(eqs) == 1
    np.testing.assert_allclose(eqs[0].x, [1, 0, 0], atol=1e-5)
    logistic = parse_system("dim 1\nx1' = x1*(1 - x1)")
    eqs = find_equilibria(logistic, [(-2, 2)])
    np.testing.assert_allclose([e.x[0] for e in eqs], [0.0, 1.0], atol=1e-12)
    assert classify(logistic, [(-2, 2)]).uniqueness.status == "MultipleFound"


def test_residual_bound_on_every_equilibrium():
    s = parse_system("dim 2\nx1' = sin(x1)\nx2' = x2^3 - x2")
    eqs = find_equilibria(s, [(-4, 4), (-2, 2)])
    assert len(eqs) == 9
    for e in eqs:
        assert e.residual <= 1e-10 * max(1.0, np.linalg.norm(e.x))


def test_classify_examples():
    v = classify(builtin("example2"), [(0.01, 10)])
    assert v.kind == GAS
    assert v.spectrum.values == (-0.5 + 0j,)
    assert "extended-Jacobian" in v.method_note
    assert v.uniqueness.region == ((0.01, 10.0),)
    v = classify(builtin("example4"), [(-2, 3)] * 3)
    assert v.kind == UNSTABLE
    np.testing.assert_allclose(v.spectrum.real, [-1, 0, 1], atol=1e-5)


def test_verdict_kind_rules():
    uniq = Uniqueness("UniqueInRegion", ((0, 1),), 1)
    multi = Uniqueness("MultipleFound", ((0, 1),), 2)
    spec = Spectrum.from_values
    assert verdict_kind(spec([-1, 2]), uniq) == UNSTABLE
    assert verdict_kind(spec([-1, 2]), multi) == UNSTABLE
    assert verdict_kind(spec([-1, -2]), uniq) == GAS
    assert verdict_kind(spec([-1, -2]), multi) == INCONCLUSIVE
    assert verdict_kind(spec([-1, 1e-10]), uniq) == INCONCLUSIVE
    assert verdict_kind(spec([-1j, 1j]), uniq) == INCONCLUSIVE
    assert verdict_kind(None, Uniqueness("Unknown", ((0, 1),), 0)) == INCONCLUSIVE


def test_no_equilibrium_is_inconclusive():
    v = classify(parse_system("dim 1\nx1' = x1^2 + 1"), [(-2, 2)])
    assert v.kind == INCONCLUSIVE and v.uniqueness.status == "Unknown"


def test_eigen_field_example4():
    field = eigen_field(builtin("example4"), [(0, 2), (-1, 1), (-1, 1)], 5)
    assert len(field.points) == 125
    k = field.points.index((1.0, 0.0, 0.0))
    np.testing.assert_allclose(field.spectra[k].real, [-1, 0, 1], atol=1e-12)
    assert all(s.max_real > 0 for s in field.spectra)


def test_eigen_field_skips_nodes_outside_domain():
    field = eigen_field(builtin("example2"), [(-1, 1)], 5)
    assert field.skipped == ((-1.0,), (-0.5,), (0.0,))
    assert len(field.points) == 2


def test_taylor_lure():
    s = builtin("example2")
    L = taylor_lure(s, find_equilibria(s, [(0.01, 10)])[0])
    np.testing.assert_allclose(L.A, [[-0.5]])
    assert L.b.tolist() == [1.0] and L.c.tolist() == [1.0] and L.d == 0.0
    s1 = builtin("example1")
    assert taylor_lure(s1, find_equilibria(s1, [(0, 10)])[0]).A[0, 0] == pytest.approx(0.5)
    with pytest.raises(PreconditionError):
        taylor_lure(builtin("example3"), find_equilibria(builtin("example3"), [(-3, 3)] * 2)[0])


def test_popov_scalar_margin_closed_form():
    L = LureSystem([[-1.0]], [1.0], [1.0])
    w = np.logspace(-2, 2, 50)
    for gamma in (0.1, 1.0, 7.0):
        np.testing.assert_allclose(popov_margin(L, w, gamma), (1 + gamma * w ** 2) / (1 + w ** 2))


def test_popov_precondition_and_infeasible():
    with pytest.raises(PreconditionError):
        popov_test(LureSystem([[1.0]], [1.0], [1.0]))
    # H(s) = 1/(s+1)^3 leaves the Popov sector for large k with any gamma >= 0
    A = np.array([[-1.0, 1, 0], [0, -1, 1], [0, 0, -1]])
    res = popov_test(LureSystem(A, [0, 0, 1.0], [1.0, 0, 0], k=100.0))
    assert not res.feasible and res.gamma is None and res.margin <= 0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 20.0), st.integers(0, 2 ** 31))
def test_popov_feasible_margin_rechecks(a, seed):
    L = LureSystem([[-a]], [1.0], [1.0])
    res = popov_test(L)
    assert res.feasible
    w = np.random.default_rng(seed).uniform(1e-3, 1e3, 10)
    assert np.all(popov_margin(L, w, res.gamma) > 0)


def test_bendixson():
    s = parse_system("dim 2\nx1' = -x1\nx2' = -x2")
    v = bendixson_test(s, [(-1, 1), (-1, 1)])
    assert v.kind == "NoLimitCycleInRegion" and v.div_min == v.div_max == -2.0
    hopf = parse_system("dim 2\nx1' = x1 - x2 - x1*(x1^2 + x2^2)\nx2' = x1 + x2 - x2*(x1^2 + x2^2)")
    v = bendixson_test(hopf, [(-2, 2), (-2, 2)])
    assert v.kind == "Inconclusive" and v.div_min < 0 < v.div_max
    with pytest.raises(PreconditionError):
        bendixson_test(builtin("example2"), [(0.1, 1)])


def test_bendixson_flags_undefined_nodes():
    v = bendixson_test(builtin("greitzer", g=0.7), [(0.2, 0.6), (-0.1, 0.5)], grid=5)
    assert v.kind == "Inconclusive" and v.skipped


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["example1", "example2", "example3"]), st.floats(0.1, 50.0))
def test_scaling_preserves_verdict(name, c):
    s = builtin(name)
    scaled = DynamicalSystem(s.n, tuple(Binary("*", Const(c), f) for f in s.f), s.domain)
    region = {"example1": [(0, 10)], "example2": [(0.01, 10)], "example3": [(-3, 3)] * 2}[name]
    assert classify(scaled, region).kind == classify(s, region).kind


def test_thread_count_does_not_change_results(monkeypatch):
    s = parse_system("dim 2\nx1' = sin(x1)\nx2' = x2^3 - x2")
    monkeypatch.setenv("EQSTAB_THREADS", "1")
    a = find_equilibria(s, [(-4, 4), (-2, 2)])
    monkeypatch.setenv("EQSTAB_THREADS", "4")
    b = find_equilibria(s, [(-4, 4), (-2, 2)])
    assert a == b
    assert not math.isnan(a[0].residual)
