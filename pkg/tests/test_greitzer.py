import math

import numpy as np
import pytest

from eqstab.errors import DomainError, PreconditionError
from eqstab.greitzer import (
    CompressorParams, CompressorState, characteristic, characteristic_peak, discriminant,
    discriminant_expanded, divergence_R, eigen_sweep, equilibrium_for_g, g_for_equilibrium,
    greitzer_field, realpart_bracket, poly_coefficients, real_part, surge_boundary,
    surge_experiment,
)
from eqstab.sim import outcome

P = CompressorParams()


def test_characteristic_values():
    assert characteristic(0.25, P) == pytest.approx(0.532, abs=1e-15)
    assert characteristic(0.5, P) == pytest.approx(0.712, abs=1e-15)
    assert characteristic(0.0, P) == pytest.approx(0.352, abs=1e-15)


def test_peak():
    assert abs(characteristic_peak(P) - 0.5) <= 1e-9


def test_field_values():
    g = 0.5 / math.sqrt(0.712)
    np.testing.assert_allclose(greitzer_field(CompressorState(0.5, 0.712), P.with_g(g)),
                               [0, 0], atol=1e-15)
    d = greitzer_field(CompressorState(0.5, 0.8), P.with_g(0.0))
    np.testing.assert_allclose(d, [-0.0704, 0.625], atol=1e-14)
    with pytest.raises(DomainError):
        greitzer_field(CompressorState(0.5, 0.0), P.with_g(0.5))


def test_equilibrium_for_g():
    eq = equilibrium_for_g(g_for_equilibrium(0.6312, P), P)
    assert eq.phi == pytest.approx(0.6312, abs=1e-10)
    assert abs(eq.psi - 0.6246) < 5e-4
    eq = equilibrium_for_g(0.5 / math.sqrt(0.712), P)
    assert eq.phi == pytest.approx(0.5, abs=1e-10) and eq.psi == pytest.approx(0.712, abs=1e-10)
    with pytest.raises(PreconditionError):
        equilibrium_for_g(1e-9, P)


@pytest.mark.parametrize("g", np.linspace(0.05, 1.9, 25))
def test_equilibrium_identity(g):
    eq = equilibrium_for_g(g, P)
    assert abs(eq.psi - characteristic(eq.phi, P)) <= 1e-10
    assert abs(eq.phi - g * math.sqrt(eq.psi)) <= 1e-10


def test_sweep_rows():
    rows = eigen_sweep(np.linspace(0.01, 0.8, 200), P)
    assert all(r.discriminant < 0 for r in rows)
    assert all(r.crosscheck_error <= 1e-8 for r in rows)
    for r in rows:
        b, c = poly_coefficients(r.phi, P)
        assert r.discriminant == pytest.approx(b * b - 4 * c, abs=1e-12)
        assert abs(discriminant_expanded(r.phi, P) - discriminant(r.phi, P)) <= 1e-12
        assert r.real_part == pytest.approx(-b / 2, abs=1e-15)
        for z in r.eigenvalues:
            assert z.real == pytest.approx(r.real_part, abs=1e-12)


def test_real_part_signs():
    assert real_part(0.6312, P) < 0 < real_part(0.30, P)
    assert realpart_bracket(0.6312, P) == pytest.approx(2 * real_part(0.6312, P))


def test_surge_boundary():
    b = surge_boundary(P)
    assert 0.43 < b.phi < 0.44 and b.upper - b.lower <= 1e-6
    coarse = surge_boundary(P, tol=1e-2)
    assert coarse.upper - coarse.lower <= 1e-2 and coarse.lower <= b.phi <= coarse.upper
    assert abs(real_part(b.phi, P)) < 1e-5


def test_divergence_R():
    g = g_for_equilibrium(0.6312, P)
    eq = equilibrium_for_g(g, P)
    assert divergence_R(eq, P.with_g(g)) < 0
    g = 0.25 / math.sqrt(0.532)
    R = divergence_R(CompressorState(0.25, 0.532), P.with_g(g))
    assert R == pytest.approx(0.864 - 1.25 * g / (2 * math.sqrt(0.532)), abs=1e-14)
    assert divergence_R(CompressorState(0.25, 0.532), P.with_g(0.0)) == pytest.approx(0.864)


def test_surge_experiments():
    _, rep = surge_experiment(g_for_equilibrium(0.30, P), P)
    assert rep.detected
    g = g_for_equilibrium(surge_boundary(P).phi + 0.05, P)
    traj, rep = surge_experiment(g, P)
    eq = equilibrium_for_g(g, P)
    assert not rep.detected
    assert outcome(traj, [eq.phi, eq.psi], 1e-3).kind == "ConvergedTo"


def test_params_validation():
    with pytest.raises(ValueError):
        CompressorParams(H=0.0)
    with pytest.raises(ValueError):
        CompressorParams(g=-1.0)
