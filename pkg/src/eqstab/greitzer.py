"""Greitzer compression-system model: surge boundary and limit-cycle analysis.

State is ``(phi, psi)``: normalized mass flow and plenum pressure ratio.

    phi' = B * (psi_c(phi) - psi)
    psi' = (phi - g * sqrt(psi)) / B

with the cubic characteristic

    psi_c(phi) = psi_c0 + H * (1 + 1.5 * (phi/W - 1) - 0.5 * (phi/W - 1)**3)

Equilibria satisfy ``psi = psi_c(phi)`` and ``phi = g * sqrt(psi)``; with ``g``
eliminated the Jacobian spectrum is a function of the equilibrium flow alone.
Its characteristic polynomial is ``s**2 + b(phi) s + c(phi)`` where

    b = phi / (2 B psi_c) - B psi_c'(phi)
    c = 1 - phi psi_c'(phi) / (2 psi_c)

so the eigenvalue real part is ``-b / 2`` and the surge boundary is the zero
of ``b`` (the point where the equilibrium becomes an unstable focus).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .eig import eigenvalues
from .errors import DomainError, PreconditionError
from .sim import detect_limit_cycle, integrate
from .sysdef import builtin

__all__ = [
    "CompressorParams", "CompressorState", "SweepRow", "SurgeBoundary",
    "WORKING_RANGE", "KOFF_SURGE_FLOW",
    "characteristic", "characteristic_slope", "characteristic_peak",
    "greitzer_field", "greitzer_jacobian", "greitzer_system", "equilibrium_for_g",
    "g_for_equilibrium", "poly_coefficients", "discriminant", "discriminant_expanded",
    "real_part", "realpart_bracket", "eigen_sweep", "surge_boundary", "divergence_R",
    "surge_experiment",
]

WORKING_RANGE = (0.0, 0.8)
# Measured surge-onset flow of the Koff rig; documentation constant only.
KOFF_SURGE_FLOW = 0.48


@dataclass(frozen=True)
class CompressorParams:
    psi_c0: float = 0.352
    H: float = 0.18
    W: float = 0.25
    B: float = 0.8
    g: float = 0.0

    def __post_init__(self):
        if not (self.H > 0 and self.W > 0 and self.B > 0):
            raise ValueError("H, W and B must be positive")
        if self.psi_c0 < 0 or self.g < 0:
            raise ValueError("psi_c0 and g must be non-negative")

    def with_g(self, g):
        return replace(self, g=float(g))


@dataclass(frozen=True)
class CompressorState:
    phi: float
    psi: float


def characteristic(phi, p: CompressorParams = CompressorParams()):
    """Steady-state pressure rise ``psi_c(phi)`` (vectorized)."""
    u = np.asarray(phi, dtype=float) / p.W - 1.0
    out = p.psi_c0 + p.H * (1.0 + 1.5 * u - 0.5 * u ** 3)
    return float(out) if np.ndim(out) == 0 else out


def characteristic_slope(phi, p: CompressorParams = CompressorParams()):
    """``d psi_c / d phi``."""
    u = np.asarray(phi, dtype=float) / p.W - 1.0
    out = 1.5 * p.H / p.W * (1.0 - u ** 2)
    return float(out) if np.ndim(out) == 0 else out


def characteristic_peak(p: CompressorParams = CompressorParams(), tol: float = 1e-13) -> float:
    """Flow at the characteristic maximum, by bisection on the slope over (W, 3W)."""
    lo, hi = p.W, 3.0 * p.W
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if characteristic_slope(mid, p) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def greitzer_field(s: CompressorState, p: CompressorParams):
    """Right-hand side ``(phi', psi')`` at state ``s`` with throttle ``p.g``."""
    if not s.psi > 0:
        raise DomainError(f"pressure ratio must be positive, got psi={s.psi}")
    dphi = p.B * (characteristic(s.phi, p) - s.psi)
    dpsi = (s.phi - p.g * math.sqrt(s.psi)) / p.B
    return dphi, dpsi


def greitzer_jacobian(s: CompressorState, p: CompressorParams) -> np.ndarray:
    """Analytic partial derivatives of the field at ``s``."""
    if not s.psi > 0:
        raise DomainError(f"pressure ratio must be positive, got psi={s.psi}")
    return np.array([
        [p.B * characteristic_slope(s.phi, p), -p.B],
        [1.0 / p.B, -p.g / (2.0 * p.B * math.sqrt(s.psi))],
    ])


def greitzer_system(p: CompressorParams):
    """The model as an expression-based :class:`~eqstab.sysdef.DynamicalSystem`."""
    return builtin("greitzer", g=p.g, psi_c0=p.psi_c0, H=p.H, W=p.W, B=p.B)


def g_for_equilibrium(phi: float, p: CompressorParams = CompressorParams()) -> float:
    """Throttle parameter that places the equilibrium at flow ``phi``."""
    psi = characteristic(phi, p)
    if not psi > 0:
        raise DomainError(f"characteristic is non-positive at phi={phi}")
    return phi / math.sqrt(psi)


def equilibrium_for_g(g: float, p: CompressorParams = CompressorParams()) -> CompressorState:
    """Intersection of the characteristic with the throttle parabola ``psi = (phi/g)**2``.

    Solves ``phi = g * sqrt(psi_c(phi))`` on the working range by bisection
    followed by Newton polishing.  Raises :class:`PreconditionError` when the
    throttle line does not meet the characteristic inside the working range
    or the crossing is not unique.
    """
    if not g > 0:
        raise PreconditionError("throttle parameter g must be positive")
    lo_end, hi_end = WORKING_RANGE

    def G(phi):
        psi = characteristic(phi, p)
        return phi - g * math.sqrt(psi) if psi > 0 else math.inf

    grid = np.linspace(lo_end, hi_end, 4001)
    vals = [G(v) for v in grid]
    brackets = [(grid[i], grid[i + 1]) for i in range(len(grid) - 1)
                if vals[i] < 0 <= vals[i + 1] or vals[i] > 0 >= vals[i + 1]]
    if not brackets:
        raise PreconditionError(
            f"throttle g={g} gives no equilibrium in the working range {WORKING_RANGE}")
    if len(brackets) > 1:
        raise PreconditionError(f"throttle g={g} gives {len(brackets)} equilibria")
    a, b = brackets[0]
    ga = G(a)
    while b - a > 1e-12 * max(1.0, abs(b)):
        m = 0.5 * (a + b)
        gm = G(m)
        if gm == 0:
            a = b = m
            break
        if (gm < 0) == (ga < 0):
            a, ga = m, gm
        else:
            b = m
    phi = 0.5 * (a + b)
    for _ in range(3):
        psi = characteristic(phi, p)
        dG = 1.0 - g * characteristic_slope(phi, p) / (2.0 * math.sqrt(psi))
        if dG == 0:
            break
        step = G(phi) / dG
        if abs(step) > 1e-9:
            break
        phi -= step
    if phi < 1e-6:
        raise PreconditionError(
            f"throttle g={g} puts the equilibrium at the working-range boundary (phi={phi:.3g})")
    psi = characteristic(phi, p)
    if abs(phi - g * math.sqrt(psi)) > 1e-10:
        raise PreconditionError(f"equilibrium residual too large for g={g}")
    return CompressorState(float(phi), float(psi))


# ---------------------------------------------------------------------------
# Spectrum as a function of equilibrium flow

def poly_coefficients(phi, p: CompressorParams = CompressorParams()):
    """``(b, c)`` of ``s**2 + b s + c`` at the equilibrium with flow ``phi``."""
    phi = np.asarray(phi, dtype=float)
    ratio = phi / characteristic(phi, p)
    slope = p.B * characteristic_slope(phi, p)
    b = ratio / (2.0 * p.B) - slope
    c = 1.0 + (ratio / (2.0 * p.B)) * (-slope)
    return b, c


def discriminant(phi, p: CompressorParams = CompressorParams()):
    """``b**2 - 4c`` of the equilibrium characteristic polynomial."""
    b, c = poly_coefficients(phi, p)
    return b * b - 4.0 * c


def discriminant_expanded(phi, p: CompressorParams = CompressorParams()):
    """Discriminant in expanded form, term by term as it is usually quoted.

    ``q**2 * r**2 + a * (a - 2 q r) - 4`` with ``r = phi/psi_c``,
    ``q = 1/(2B)`` and ``a = -B psi_c'``; equals :func:`discriminant`
    identically.
    """
    phi = np.asarray(phi, dtype=float)
    r = phi / characteristic(phi, p)
    q = 1.0 / (2.0 * p.B)
    a = -p.B * characteristic_slope(phi, p)
    return q * q * r * r + a * (a - 2.0 * q * r) - 4.0


def real_part(phi, p: CompressorParams = CompressorParams()):
    """Eigenvalue real part at the equilibrium, ``trace / 2``."""
    b, _ = poly_coefficients(phi, p)
    return -0.5 * b


def realpart_bracket(phi, p: CompressorParams = CompressorParams()):
    """``-b`` (twice the true real part); same sign and zero as :func:`real_part`."""
    b, _ = poly_coefficients(phi, p)
    return -b


@dataclass(frozen=True)
class SweepRow:
    phi: float
    psi_c: float
    g: float
    real_part: float
    discriminant: float
    eigenvalues: tuple
    crosscheck_error: float


def _quadratic_roots(b, c):
    disc = b * b - 4.0 * c
    if disc < 0:
        im = 0.5 * math.sqrt(-disc)
        return (complex(-0.5 * b, -im), complex(-0.5 * b, im))
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    r1 = q
    r2 = c / q if q != 0 else 0.0
    return tuple(sorted((complex(r1), complex(r2)), key=lambda z: (z.real, z.imag)))


def eigen_sweep(phi_grid, p: CompressorParams = CompressorParams()) -> list:
    """Per-flow equilibrium spectrum, cross-checked against the numeric Jacobian."""
    rows = []
    lo, hi = WORKING_RANGE
    for phi in np.asarray(phi_grid, dtype=float):
        if not lo < phi <= hi:
            raise PreconditionError(f"phi={phi} outside the working range {WORKING_RANGE}")
        psi = characteristic(phi, p)
        g = g_for_equilibrium(phi, p)
        b, c = poly_coefficients(phi, p)
        roots = _quadratic_roots(float(b), float(c))
        numeric = eigenvalues(greitzer_jacobian(CompressorState(phi, psi), p.with_g(g)))
        err = max(abs(x - y) for x, y in zip(roots, numeric.values))
        rows.append(SweepRow(float(phi), float(psi), float(g), float(-0.5 * b),
                             float(b * b - 4.0 * c), roots, float(err)))
    return rows


@dataclass(frozen=True)
class SurgeBoundary:
    """Bracket ``[lower, upper]`` around the flow where the real part changes sign."""

    phi: float
    lower: float
    upper: float


def surge_boundary(p: CompressorParams = CompressorParams(), tol: float = 1e-6,
                   bracket=(0.2, 0.7)) -> SurgeBoundary:
    """Bisection for the zero of the real part within ``bracket``."""
    lo, hi = bracket
    f_lo = float(real_part(lo, p))
    f_hi = float(real_part(hi, p))
    if f_lo == 0:
        return SurgeBoundary(lo, lo, lo)
    if f_hi == 0:
        return SurgeBoundary(hi, hi, hi)
    if (f_lo > 0) == (f_hi > 0):
        raise PreconditionError(f"real part has no sign change on {bracket}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = float(real_part(mid, p))
        if f_mid == 0:
            lo = hi = mid
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return SurgeBoundary(0.5 * (lo + hi), lo, hi)


def divergence_R(s: CompressorState, p: CompressorParams) -> float:
    """Divergence ``d phi'/d phi + d psi'/d psi`` of the field at ``s``."""
    if not s.psi > 0:
        raise DomainError(f"pressure ratio must be positive, got psi={s.psi}")
    return float(p.B * characteristic_slope(s.phi, p) - p.g / (2.0 * p.B * math.sqrt(s.psi)))


def surge_experiment(g: float, p: CompressorParams = CompressorParams(), t_end: float = 300.0,
                     perturbation: float = 0.01, max_step: float = 0.05):
    """Simulate from the equilibrium for ``g`` with flow raised by ``perturbation`` (relative).

    Returns ``(trajectory, report)`` where ``report`` is the limit-cycle
    analysis of the flow component.
    """
    eq = equilibrium_for_g(g, p)
    sys = greitzer_system(p.with_g(g))
    x0 = [eq.phi * (1.0 + perturbation), eq.psi]
    traj = integrate(sys, x0, t_end, max_step=max_step)
    return traj, detect_limit_cycle(traj, 0)
