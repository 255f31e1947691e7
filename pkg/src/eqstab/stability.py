"""Equilibria, extended-Jacobian verdicts, Popov and Bendixson tests.

The extended-Jacobian method classifies an autonomous system with a single
equilibrium by the spectrum of its Jacobian at that point: any eigenvalue
with positive real part means global instability, all real parts negative
means global asymptotic stability.  The global claim is a conjecture; the
verdicts returned here say so in ``method_note`` and only ever certify
uniqueness on the sampled region.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._parallel import pmap
from .eig import Spectrum, eigenvalues
from .errors import ConvergenceError, DomainError, PreconditionError
from .expr import add, compile_expr
from .sysdef import DynamicalSystem, jacobian

__all__ = [
    "Equilibrium", "Uniqueness", "StabilityVerdict", "LureSystem", "PopovResult",
    "BendixsonVerdict", "EigenField", "refine_equilibrium", "find_equilibria",
    "verdict_kind", "classify", "eigen_field", "taylor_lure", "popov_margin",
    "popov_test", "bendixson_test", "region_grid", "TOL_ZERO", "METHOD_NOTE",
]

TOL_ZERO = 1e-8
METHOD_NOTE = ("extended-Jacobian method: sign pattern of the Jacobian spectrum at the "
               "unique equilibrium; the global claim is conjectural and uniqueness is "
               "evidence on the sampled region only")

GAS = "GloballyAsymptoticallyStable"
UNSTABLE = "GloballyUnstable"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Equilibrium:
    x: tuple
    residual: float


@dataclass(frozen=True)
class Uniqueness:
    """``status`` is ``"UniqueInRegion"``, ``"MultipleFound"`` or ``"Unknown"``."""

    status: str
    region: tuple
    count: int


@dataclass(frozen=True)
class StabilityVerdict:
    kind: str
    spectrum: Optional[Spectrum]
    uniqueness: Uniqueness
    equilibria: tuple = ()
    method_note: str = METHOD_NOTE
    tol_zero: float = TOL_ZERO


def _region(region, n):
    R = np.array(region, dtype=float).reshape(-1, 2)
    if R.shape != (n, 2):
        raise ValueError(f"region must give (lo, hi) for each of {n} variables")
    if np.any(R[:, 0] > R[:, 1]) or not np.all(np.isfinite(R)):
        raise ValueError("region bounds must be finite with lo <= hi")
    return R


def region_grid(region, grid):
    """All grid nodes of the box, last axis varying fastest."""
    R = np.asarray(region, dtype=float)
    counts = [grid] * len(R) if np.isscalar(grid) else list(grid)
    if any(c < 1 for c in counts):
        raise ValueError("grid counts must be >= 1")
    axes = [np.linspace(lo, hi, c) if c > 1 else np.array([0.5 * (lo + hi)])
            for (lo, hi), c in zip(R, counts)]
    return [np.array(p) for p in itertools.product(*axes)]


# ---------------------------------------------------------------------------
# Equilibria

def _residual_tol(x):
    return 1e-10 * max(1.0, float(np.linalg.norm(x)))


def _safe_norm(sys, x):
    try:
        return float(np.linalg.norm(sys.rhs(x)))
    except DomainError:
        return math.inf


def refine_equilibrium(sys: DynamicalSystem, x0, max_iter: int = 50,
                       margin: float = 1e-12) -> Equilibrium:
    """Damped Newton iteration from ``x0`` to a root of ``f``.

    Step halving guards each update; iterates are projected ``margin`` inside
    the domain.  A singular (or failing) Newton direction falls back to a
    gradient-descent step on ``|f|^2 / 2`` using a finite-difference Jacobian.
    Once the residual tolerance is met, iteration continues while it still
    improves the residual, which pins down multiple roots more tightly.
    """
    x = sys.project(x0, margin)
    if not sys.in_domain(np.asarray(x0, dtype=float)):
        raise DomainError(f"start point {list(x0)} outside the system domain")
    fx = sys.rhs(x)
    r = float(np.linalg.norm(fx))
    for _ in range(max_iter):
        if r == 0.0:
            break
        step = _newton_step(sys, x, fx)
        accepted = False
        for direction in ([step] if step is not None else []) + [None]:
            if direction is None:
                direction = _descent_step(sys, x, fx)
                if direction is None:
                    break
            lam = 1.0
            for _ in range(40):
                cand = sys.project(x + lam * direction, margin)
                rc = _safe_norm(sys, cand)
                if rc < r:
                    x, r = cand, rc
                    fx = sys.rhs(x)
                    accepted = True
                    break
                lam *= 0.5
            if accepted:
                break
        if not accepted:
            break
    if r <= _residual_tol(x):
        return Equilibrium(tuple(float(v) for v in x), r)
    raise ConvergenceError(
        f"Newton iteration from {list(map(float, x0))} stalled at residual {r:.3e}")


def _newton_step(sys, x, fx):
    try:
        J = jacobian(sys, x)
    except DomainError:
        return None
    if np.linalg.cond(J) > 1e12:
        return None
    return np.linalg.solve(J, -fx)


def _descent_step(sys, x, fx):
    try:
        J = jacobian(sys, x, method="finite_difference")
    except (DomainError, ValueError):
        return None
    grad = J.T @ fx
    gn = float(np.dot(grad, grad))
    if gn == 0.0 or not math.isfinite(gn):
        return None
    # Cauchy-like scaling: exact minimizer of the linearized residual along -grad
    Jg = J @ grad
    denom = float(np.dot(Jg, Jg))
    scale = gn / denom if denom > 0 else 1.0
    return -scale * grad


def find_equilibria(sys: DynamicalSystem, region, grid=None,
                    dedupe_tol: Optional[float] = None) -> list:
    """Multistart Newton from every grid node of ``region``.

    Converged points inside the region are merged when closer than
    ``dedupe_tol`` (default ``1e-6`` times the region diameter) and returned
    sorted lexicographically.
    """
    R = _region(region, sys.n)
    grid = _default_grid(sys.n) if grid is None else grid
    if np.any(np.asarray(grid) < 2):
        raise ValueError("grid must have at least 2 nodes per axis")
    diameter = float(np.linalg.norm(R[:, 1] - R[:, 0]))
    if dedupe_tol is None:
        dedupe_tol = 1e-6 * max(diameter, 1e-300)
    starts = [p for p in region_grid(R, grid) if sys.in_domain(p)]

    def attempt(p):
        try:
            return refine_equilibrium(sys, p)
        except (ConvergenceError, DomainError, np.linalg.LinAlgError):
            return None

    found = []
    slack = dedupe_tol
    for eq in pmap(attempt, starts):
        if eq is None:
            continue
        x = np.array(eq.x)
        if np.any(x < R[:, 0] - slack) or np.any(x > R[:, 1] + slack):
            continue
        for k, other in enumerate(found):
            if np.linalg.norm(x - np.array(other.x)) <= dedupe_tol:
                if eq.residual < other.residual:
                    found[k] = eq
                break
        else:
            found.append(eq)
    return sorted(found, key=lambda e: e.x)


def _default_grid(n):
    return {1: 21, 2: 9, 3: 7}.get(n, 4)


# ---------------------------------------------------------------------------
# Classification

def verdict_kind(spectrum: Optional[Spectrum], uniqueness: Uniqueness,
                 tol_zero: float = TOL_ZERO) -> str:
    """Pure verdict rule on the spectrum sign pattern and uniqueness evidence."""
    if spectrum is None:
        return INCONCLUSIVE
    top = spectrum.max_real
    if top > tol_zero:
        return UNSTABLE
    if top < -tol_zero and uniqueness.status == "UniqueInRegion":
        return GAS
    return INCONCLUSIVE


def classify(sys: DynamicalSystem, region, grid=None, tol_zero: float = TOL_ZERO,
             dedupe_tol: Optional[float] = None) -> StabilityVerdict:
    """Extended-Jacobian verdict for ``sys`` on the box ``region``."""
    R = _region(region, sys.n)
    eqs = find_equilibria(sys, R, grid, dedupe_tol)
    region_t = tuple(tuple(map(float, row)) for row in R)
    if len(eqs) == 1:
        uniq = Uniqueness("UniqueInRegion", region_t, 1)
        spectrum = eigenvalues(jacobian(sys, eqs[0].x))
    else:
        status = "MultipleFound" if eqs else "Unknown"
        uniq = Uniqueness(status, region_t, len(eqs))
        spectrum = None
    return StabilityVerdict(verdict_kind(spectrum, uniq, tol_zero), spectrum, uniq,
                            tuple(eqs), METHOD_NOTE, tol_zero)


@dataclass(frozen=True)
class EigenField:
    """Spectra at grid nodes; ``skipped`` lists nodes outside the admissible region."""

    points: tuple
    spectra: tuple
    skipped: tuple = ()


def eigen_field(sys: DynamicalSystem, region, grid) -> EigenField:
    """Jacobian spectrum at every node of a grid over ``region``."""
    R = _region(region, sys.n)

    def at(p):
        try:
            return eigenvalues(jacobian(sys, p))
        except DomainError:
            return None

    nodes = region_grid(R, grid)
    spectra = pmap(at, nodes)
    points, kept, skipped = [], [], []
    for p, s in zip(nodes, spectra):
        if s is None:
            skipped.append(tuple(map(float, p)))
        else:
            points.append(tuple(map(float, p)))
            kept.append(s)
    return EigenField(tuple(points), tuple(kept), tuple(skipped))


# ---------------------------------------------------------------------------
# Popov criterion

@dataclass(frozen=True)
class LureSystem:
    """``x' = A x + b u``, ``y = c x + d u``, ``u = -phi(y)`` with sector bound ``k``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: float = 0.0
    k: float = math.inf

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n) or b.shape != (n,) or c.shape != (n,):
            raise ValueError("inconsistent Lur'e system dimensions")
        if not self.k > 0:
            raise ValueError("sector bound k must be > 0")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "k", float(self.k))


@dataclass(frozen=True)
class PopovResult:
    feasible: bool
    gamma: Optional[float]
    margin: float
    frequencies: np.ndarray = field(repr=False)


def taylor_lure(sys: DynamicalSystem, eq: Equilibrium) -> LureSystem:
    """Scalar Lur'e form of ``sys`` about ``eq``: ``A = J(x*)``, ``b = c = 1``, ``d = 0``."""
    if sys.n != 1:
        raise PreconditionError(
            "the Taylor/Lur'e mapping is only defined for scalar systems (n = 1)")
    J = jacobian(sys, eq.x)
    return LureSystem(J, [1.0], [1.0], 0.0, math.inf)


def _transfer(L, w):
    n = L.A.shape[0]
    H = np.empty(len(w), dtype=complex)
    for i, wi in enumerate(w):
        H[i] = L.c @ np.linalg.solve(1j * wi * np.eye(n) - L.A, L.b.astype(complex))
        if L.d != 0.0:
            H[i] += L.d / (1j * wi)
    return H


def popov_margin(L: LureSystem, w, gamma: float) -> np.ndarray:
    """``1/k + Re H(jw) - w * gamma * Im H(jw)`` at each frequency ``w``."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    H = _transfer(L, w)
    inv_k = 0.0 if math.isinf(L.k) else 1.0 / L.k
    return inv_k + H.real - w * gamma * H.imag


def popov_test(L: LureSystem, freq_grid=None, gamma_grid=None) -> PopovResult:
    """Grid search for a Popov multiplier ``gamma`` with positive margin.

    Defaults: 400 log-spaced frequencies on [1e-3, 1e3] and 120 log-spaced
    ``gamma`` on [1e-3, 1e3].  The reported ``gamma`` maximizes the worst-case
    margin over the frequency grid; feasibility means that margin is positive.
    """
    spec = eigenvalues(L.A)
    if not spec.max_real < 0:
        raise PreconditionError(
            f"A is not Hurwitz (max real part {spec.max_real:g}); Popov test not applicable")
    w = np.logspace(-3, 3, 400) if freq_grid is None else np.asarray(freq_grid, dtype=float)
    gammas = np.logspace(-3, 3, 120) if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    H = _transfer(L, w)
    inv_k = 0.0 if math.isinf(L.k) else 1.0 / L.k
    margins = np.min(inv_k + H.real[None, :] - np.outer(gammas, w * H.imag), axis=1)
    i = int(np.argmax(margins))
    best = float(margins[i])
    if best > 0:
        return PopovResult(True, float(gammas[i]), best, w)
    return PopovResult(False, None, best, w)


# ---------------------------------------------------------------------------
# Bendixson criterion

@dataclass(frozen=True)
class BendixsonVerdict:
    kind: str
    div_min: float
    div_max: float
    nodes: int
    skipped: tuple = ()


def bendixson_test(sys: DynamicalSystem, region, grid=41) -> BendixsonVerdict:
    """Sample the divergence of a planar field over a box.

    A single strict sign over every node means no closed orbit lies wholly
    inside the box.  Nodes where the field is undefined are reported in
    ``skipped`` and force an ``Inconclusive`` verdict.
    """
    if sys.n != 2:
        raise PreconditionError("Bendixson test requires a planar (n = 2) system")
    R = _region(region, 2)
    J = sys.jacobian_exprs()
    div = compile_expr(add(J[0][0], J[1][1]))
    values, skipped = [], []
    for p in region_grid(R, grid):
        if not sys.in_domain(p):
            skipped.append(tuple(map(float, p)))
            continue
        try:
            values.append(div(p))
        except DomainError:
            skipped.append(tuple(map(float, p)))
    if not values:
        return BendixsonVerdict(INCONCLUSIVE, math.nan, math.nan, 0, tuple(skipped))
    lo, hi = min(values), max(values)
    uniform = (lo > 0 and hi > 0) or (lo < 0 and hi < 0)
    kind = "NoLimitCycleInRegion" if uniform and not skipped else INCONCLUSIVE
    return BendixsonVerdict(kind, lo, hi, len(values), tuple(skipped))
