"""Trajectories, asymptotic outcomes, phase portraits and limit-cycle detection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._parallel import pmap
from .errors import DomainError, EqstabError, StepSizeError
from .sysdef import DynamicalSystem

__all__ = [
    "Trajectory", "AsymptoticOutcome", "LimitCycleReport", "Portrait",
    "integrate", "outcome", "phase_portrait", "detect_limit_cycle",
    "REACHED_T_END", "DIVERGED", "LEFT_DOMAIN",
]

REACHED_T_END = "ReachedTEnd"
DIVERGED = "Diverged"
LEFT_DOMAIN = "LeftDomain"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution; ``termination`` is one of the three module constants.

    ``detail`` carries the divergence bound or the step index at which the
    domain was left.
    """

    t: np.ndarray
    x: np.ndarray
    termination: str
    detail: Optional[float] = None

    def __post_init__(self):
        self.t.setflags(write=False)
        self.x.setflags(write=False)

    @property
    def final(self):
        return self.x[-1]


class _Outside(Exception):
    pass


def _field(sys):
    def f(x):
        if not sys.in_domain(x):
            raise _Outside
        try:
            return sys.rhs(x)
        except DomainError:
            raise _Outside from None
    return f


# Fehlberg 4(5) tableau
_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_B4 = np.array([25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0])
_B5 = np.array([16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55])


def _rkf45_stages(f, x, h, k0):
    k = [k0]
    for i in range(1, 6):
        xi = x + h * sum(a * kj for a, kj in zip(_A[i], k))
        k.append(f(xi))
    K = np.array(k)
    return x + h * (_B5 @ K), h * ((_B5 - _B4) @ K)


def _rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(sys: DynamicalSystem, x0, t_end: float, method: str = "rkf45", *,
              h: float = 0.01, atol: float = 1e-9, rtol: float = 1e-7,
              divergence_bound: float = 1e6, max_step: float = math.inf) -> Trajectory:
    """Integrate ``x' = f(x)`` from ``x0`` over ``[0, t_end]``.

    ``method`` is ``"rk4"`` (fixed step ``h``) or ``"rkf45"`` (adaptive,
    tolerances ``atol``/``rtol``, step capped by ``max_step``).  Integration
    stops early when ``|x|`` exceeds ``divergence_bound`` (Diverged) or a step
    cannot be taken without leaving the domain (LeftDomain).
    """
    x = np.array(x0, dtype=float)
    if x.shape != (sys.n,):
        raise ValueError(f"initial state must have length {sys.n}")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    f = _field(sys)
    try:
        fx = f(x)
    except _Outside:
        raise DomainError(f"initial state {x.tolist()} outside the system domain") from None
    if method == "rk4":
        if not h > 0:
            raise ValueError("rk4 step h must be positive")
        return _integrate_rk4(f, x, t_end, h, divergence_bound)
    if method == "rkf45":
        if not (atol > 0 and rtol > 0):
            raise ValueError("tolerances must be positive")
        return _integrate_rkf45(f, x, fx, t_end, atol, rtol, divergence_bound, max_step)
    raise ValueError(f"unknown method {method!r}")


def _diverged(x, bound):
    return not np.all(np.isfinite(x)) or float(np.linalg.norm(x)) > bound


def _finish(ts, xs, kind, detail=None):
    return Trajectory(np.array(ts), np.array(xs), kind, detail)


def _integrate_rk4(f, x, t_end, h, bound):
    ts, xs = [0.0], [x]
    nsteps = int(math.ceil(t_end / h - 1e-9))
    for i in range(1, nsteps + 1):
        t_next = min(i * h, t_end)
        try:
            x_new = _rk4_step(f, x, t_next - ts[-1])
            f(x_new)
        except _Outside:
            return _finish(ts, xs, LEFT_DOMAIN, i)
        if _diverged(x_new, bound):
            if np.all(np.isfinite(x_new)):
                ts.append(t_next)
                xs.append(x_new)
            return _finish(ts, xs, DIVERGED, bound)
        ts.append(t_next)
        xs.append(x_new)
        x = x_new
    return _finish(ts, xs, REACHED_T_END)


def _integrate_rkf45(f, x, fx, t_end, atol, rtol, bound, max_step):
    ts, xs = [0.0], [x]
    t = 0.0
    scale = atol + rtol * np.abs(x)
    d0 = float(np.max(np.abs(x) / scale))
    d1 = float(np.max(np.abs(fx) / scale))
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h, max_step, t_end)
    step = 0
    while t < t_end:
        h = min(h, t_end - t, max_step)
        if h < 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise StepSizeError(f"step size underflow at t={t:.6g}", t, x.tolist())
        try:
            x_new, err = _rkf45_stages(f, x, h, fx)
            f_new = f(x_new)
        except _Outside:
            if h <= 1e-12 * max(1.0, abs(t)):
                return _finish(ts, xs, LEFT_DOMAIN, step + 1)
            h *= 0.25
            continue
        if not np.all(np.isfinite(x_new)):
            return _finish(ts, xs, DIVERGED, bound)
        sc = atol + rtol * np.maximum(np.abs(x), np.abs(x_new))
        enorm = float(np.max(np.abs(err) / sc))
        if enorm <= 1.0:
            t = t_end if t_end - (t + h) <= 1e-12 * max(1.0, t_end) else t + h
            x, fx = x_new, f_new
            step += 1
            ts.append(t)
            xs.append(x)
            if _diverged(x, bound):
                return _finish(ts, xs, DIVERGED, bound)
            growth = 5.0 if enorm == 0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
        else:
            growth = max(0.1, 0.9 * enorm ** -0.25)
        h *= growth
    return _finish(ts, xs, REACHED_T_END)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticOutcome:
    """``kind`` is ``"ConvergedTo"``, ``"Diverged"`` or ``"Undecided"``."""

    kind: str
    x_star: Optional[tuple] = None
    achieved_tol: Optional[float] = None


def outcome(traj: Trajectory, eq, tol: float = 1e-3) -> AsymptoticOutcome:
    """Classify the long-run behaviour of ``traj`` relative to the equilibrium ``eq``.

    Convergence needs the final distance within ``tol`` and a distance that
    does not grow over the last quarter of samples (up to ``1e-3 * tol`` of
    round-off slack).
    """
    if len(traj.t) == 0:
        raise ValueError("empty trajectory")
    if traj.termination == DIVERGED:
        return AsymptoticOutcome("Diverged")
    x_star = np.asarray(getattr(eq, "x", eq), dtype=float)
    d = np.linalg.norm(traj.x - x_star, axis=1)
    tail = d[-max(2, len(d) // 4):]
    slack = 1e-3 * tol
    if d[-1] <= tol and len(d) >= 2 and np.all(np.diff(tail) <= slack):
        return AsymptoticOutcome("ConvergedTo", tuple(map(float, x_star)), float(d[-1]))
    return AsymptoticOutcome("Undecided")


@dataclass(frozen=True)
class Portrait:
    """Trajectories of a phase portrait; ``failures`` maps seed index to an error message."""

    seeds: np.ndarray
    trajectories: tuple
    failures: dict = field(default_factory=dict)


def phase_portrait(sys: DynamicalSystem, region, seeds, t_end: float,
                   rng_seed: int = 0, **opts) -> Portrait:
    """One trajectory per seed.

    ``seeds`` is either an explicit ``(m, n)`` array of initial states or a
    count of states drawn uniformly from ``region`` with ``rng_seed``
    (draws outside the domain are rejected and redrawn).
    """
    R = np.array(region, dtype=float).reshape(sys.n, 2)
    if np.isscalar(seeds):
        rng = np.random.default_rng(rng_seed)
        pts = []
        tries = 0
        while len(pts) < int(seeds):
            p = rng.uniform(R[:, 0], R[:, 1])
            tries += 1
            if sys.in_domain(p):
                pts.append(p)
            elif tries > 1000 * int(seeds):
                raise ValueError("region and domain barely intersect; cannot draw seeds")
        S = np.array(pts).reshape(-1, sys.n)
    else:
        S = np.array(seeds, dtype=float).reshape(-1, sys.n)

    def run(p):
        try:
            return integrate(sys, p, t_end, **opts)
        except (EqstabError, ValueError) as exc:
            return exc

    results = pmap(run, list(S))
    trajectories = tuple(r if isinstance(r, Trajectory) else None for r in results)
    failures = {i: str(r) for i, r in enumerate(results) if not isinstance(r, Trajectory)}
    return Portrait(S, trajectories, failures)


# ---------------------------------------------------------------------------
# Limit cycles

@dataclass(frozen=True)
class LimitCycleReport:
    detected: bool
    amplitude: Optional[tuple] = None
    period: Optional[float] = None
    settle_index: Optional[int] = None
    peaks: int = 0
    reason: str = ""


def _vertex(t, y, i):
    """Quadratic-interpolated extremum through samples ``i-1, i, i+1``."""
    t0, t2 = t[i - 1] - t[i], t[i + 1] - t[i]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    det = t0 * t0 * t2 - t2 * t2 * t0
    if det == 0.0:
        return t[i], y1
    a = ((y0 - y1) * t2 - (y2 - y1) * t0) / det
    b = ((y2 - y1) * t0 * t0 - (y0 - y1) * t2 * t2) / det
    if a == 0.0:
        return t[i], y1
    tv = -b / (2.0 * a)
    if not t0 <= tv <= t2:
        return t[i], y1
    return t[i] + tv, y1 - b * b / (4.0 * a)


def detect_limit_cycle(traj: Trajectory, component: int = 0, *, amp_tol: float = 0.01,
                       period_tol: float = 0.02, min_cycles: int = 5,
                       min_peaks: int = 10, transient: float = 0.2) -> LimitCycleReport:
    """Look for a sustained oscillation in ``traj.x[:, component]`` (0-based).

    The first ``transient`` fraction of the time span is discarded.  A cycle
    is reported when the last ``min_cycles`` or more successive cycles have
    peak-to-trough amplitudes within ``amp_tol`` and peak spacings within
    ``period_tol`` (relative to their means).
    """
    t = np.asarray(traj.t)
    y = np.asarray(traj.x[:, component])
    if len(t) < 3:
        return LimitCycleReport(False, reason="too few samples")
    start = int(np.searchsorted(t, t[0] + transient * (t[-1] - t[0])))
    start = max(start, 1)
    peaks, troughs = [], []
    for i in range(start, len(t) - 1):
        if y[i - 1] < y[i] >= y[i + 1]:
            peaks.append((i,) + _vertex(t, y, i))
        elif y[i - 1] > y[i] <= y[i + 1]:
            troughs.append((i,) + _vertex(t, y, i))
    if len(peaks) < min_peaks:
        return LimitCycleReport(False, peaks=len(peaks),
                                reason=f"too few peaks ({len(peaks)} < {min_peaks})")

    amps, periods = [], []
    for (i0, t0, v0), (i1, t1, v1) in zip(peaks, peaks[1:]):
        between = [v for (j, _, v) in troughs if i0 < j < i1]
        low = min(between) if between else float(np.min(y[i0:i1 + 1]))
        amps.append(v1 - low)
        periods.append(t1 - t0)
    amps = np.array(amps)
    periods = np.array(periods)

    def consistent(a, p):
        ma, mp = a.mean(), p.mean()
        floor = 1e-9 * (1.0 + abs(float(np.mean(y[start:]))))
        return (ma > floor and np.all(np.abs(a - ma) <= amp_tol * ma)
                and np.all(np.abs(p - mp) <= period_tol * mp))

    s = len(amps) - min_cycles
    if s < 0 or not consistent(amps[s:], periods[s:]):
        return LimitCycleReport(False, peaks=len(peaks),
                                reason="peak amplitudes or spacings do not settle")
    while s > 0 and consistent(amps[s - 1:], periods[s - 1:]):
        s -= 1
    settle = peaks[s][0]
    window = traj.x[settle:peaks[-1][0] + 1]
    amplitude = tuple(float(v) for v in window.max(axis=0) - window.min(axis=0))
    return LimitCycleReport(True, amplitude, float(periods[s:].mean()), int(settle),
                            len(peaks), "sustained oscillation")
