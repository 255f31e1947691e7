"""Autonomous dynamical systems ``x' = f(x)`` built from expressions.

System-definition file format (UTF-8 text, one directive per line)::

    # comment
    name example2            (optional)
    dim 1
    x1' = -sqrt(x1) + 1
    domain x1 > 0            (optional, ops: > >= < <=)

Blank lines and ``#`` comments are ignored.  Every component ``x1'..xn'``
must be given exactly once.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, ExprSyntaxError, SystemDefinitionError
from .expr import compile_expr, diff_expr, parse_expr, to_text, variables

__all__ = [
    "Bound", "DynamicalSystem", "parse_system", "jacobian", "builtin",
    "BUILTINS", "fd_step",
]


@dataclass(frozen=True)
class Bound:
    """Per-variable bound ``x<var> <op> <value>`` (``var`` is 1-based)."""

    var: int
    op: str
    value: float

    def holds(self, x, margin=0.0):
        v = x[self.var - 1]
        if self.op == ">":
            return v > self.value + margin
        if self.op == ">=":
            return v >= self.value + margin
        if self.op == "<":
            return v < self.value - margin
        return v <= self.value - margin

    def __str__(self):
        return f"x{self.var} {self.op} {_num(self.value)}"


def _num(v):
    return str(int(v)) if float(v).is_integer() and abs(v) < 1e16 else repr(float(v))


@dataclass(frozen=True, eq=False)
class DynamicalSystem:
    """Vector field with ``n`` expression components and box-type domain bounds."""

    n: int
    f: tuple
    domain: tuple = ()
    name: Optional[str] = None
    _rhs: tuple = field(init=False, repr=False)
    _jac: tuple = field(init=False, repr=False)
    _jac_fn: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1 or len(self.f) != self.n:
            raise SystemDefinitionError(
                f"dimension mismatch: dim {self.n} but {len(self.f)} components")
        for i, comp in enumerate(self.f, start=1):
            bad = [k for k in variables(comp) if not 1 <= k <= self.n]
            if bad:
                raise SystemDefinitionError(
                    f"x{i}' references x{bad[0]} outside dimension {self.n}")
        for b in self.domain:
            if not 1 <= b.var <= self.n:
                raise SystemDefinitionError(f"domain bound on x{b.var} outside dimension {self.n}")
        _check_domain_consistent(self.domain, self.n)
        jac = tuple(tuple(diff_expr(fi, j) for j in range(1, self.n + 1)) for fi in self.f)
        object.__setattr__(self, "_rhs", tuple(compile_expr(c) for c in self.f))
        object.__setattr__(self, "_jac", jac)
        object.__setattr__(self, "_jac_fn", tuple(tuple(compile_expr(c) for c in row) for row in jac))

    def rhs(self, x) -> np.ndarray:
        """Evaluate ``f(x)``; raises :class:`DomainError` outside the admissible region."""
        return np.array([fn(x) for fn in self._rhs])

    def jacobian_exprs(self):
        """Symbolic Jacobian, ``[i][j] = d f_i / d x_j``."""
        return self._jac

    def in_domain(self, x, margin=0.0) -> bool:
        return all(b.holds(x, margin) for b in self.domain)

    def bounds_array(self):
        """Per-variable ``(lo, hi)`` implied by the domain (``inf`` when open)."""
        lo = np.full(self.n, -np.inf)
        hi = np.full(self.n, np.inf)
        for b in self.domain:
            k = b.var - 1
            if b.op in (">", ">="):
                lo[k] = max(lo[k], b.value)
            else:
                hi[k] = min(hi[k], b.value)
        return lo, hi

    def project(self, x, margin=1e-12):
        """Clip ``x`` into the domain, staying ``margin`` inside each bound."""
        x = np.array(x, dtype=float)
        lo, hi = self.bounds_array()
        return np.minimum(np.maximum(x, lo + margin), hi - margin)

    def to_text(self) -> str:
        lines = []
        if self.name:
            lines.append(f"name {self.name}")
        lines.append(f"dim {self.n}")
        lines += [f"x{i}' = {to_text(c)}" for i, c in enumerate(self.f, start=1)]
        lines += [f"domain {b}" for b in self.domain]
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def _check_domain_consistent(domain, n):
    for k in range(1, n + 1):
        lo, lo_strict, hi, hi_strict = -math.inf, False, math.inf, False
        for b in domain:
            if b.var != k:
                continue
            if b.op in (">", ">="):
                if b.value > lo or (b.value == lo and b.op == ">"):
                    lo, lo_strict = b.value, b.op == ">"
            elif b.value < hi or (b.value == hi and b.op == "<"):
                hi, hi_strict = b.value, b.op == "<"
        if lo > hi or (lo == hi and (lo_strict or hi_strict)):
            raise SystemDefinitionError(f"inconsistent domain: no admissible value for x{k}")


_COMP_RE = re.compile(r"x(\d+)\s*'\s*=(.*)\Z")
_DOMAIN_RE = re.compile(r"domain\s+x(\d+)\s*(>=|<=|>|<)\s*(\S+)\s*\Z")


def parse_system(text: str, name: Optional[str] = None) -> DynamicalSystem:
    """Parse the system-definition format into a validated system."""
    n = None
    comps = {}
    bounds = []
    pending = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split(None, 1)[0]
        if head == "dim":
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) < 1:
                raise SystemDefinitionError("expected 'dim <n>' with n >= 1", lineno)
            if n is not None:
                raise SystemDefinitionError("duplicate 'dim' line", lineno)
            n = int(parts[1])
        elif head == "name":
            parts = line.split()
            if len(parts) != 2:
                raise SystemDefinitionError("expected 'name <identifier>'", lineno)
            name = name or parts[1]
        elif head == "domain":
            m = _DOMAIN_RE.match(line)
            if m is None:
                raise SystemDefinitionError("expected 'domain x<i> <op> <value>'", lineno)
            try:
                value = float(m.group(3))
            except ValueError:
                raise SystemDefinitionError(f"bad bound value {m.group(3)!r}", lineno) from None
            if not math.isfinite(value):
                raise SystemDefinitionError("bound value must be finite", lineno)
            bounds.append((lineno, Bound(int(m.group(1)), m.group(2), value)))
        else:
            m = _COMP_RE.match(line)
            if m is None:
                raise SystemDefinitionError(f"unrecognized line {line!r}", lineno)
            pending.append((lineno, int(m.group(1)), m.group(2)))
    if n is None:
        raise SystemDefinitionError("missing 'dim <n>' line")
    for lineno, i, body in pending:
        if not 1 <= i <= n:
            raise SystemDefinitionError(f"component x{i}' outside dimension {n}", lineno)
        if i in comps:
            raise SystemDefinitionError(f"duplicate component x{i}'", lineno)
        try:
            comps[i] = parse_expr(body, n)
        except ExprSyntaxError as exc:
            raise SystemDefinitionError(str(exc), lineno) from exc
    missing = [i for i in range(1, n + 1) if i not in comps]
    if missing:
        raise SystemDefinitionError(
            f"dimension mismatch: missing component x{missing[0]}' for dim {n}")
    for lineno, b in bounds:
        if not 1 <= b.var <= n:
            raise SystemDefinitionError(
                f"variable index out of range: x{b.var} (dimension {n})", lineno)
    return DynamicalSystem(n, tuple(comps[i] for i in range(1, n + 1)),
                           tuple(b for _, b in bounds), name)


def fd_step(x):
    """Default central-difference step per coordinate: cbrt(eps) * max(1, |x_i|)."""
    return np.cbrt(np.finfo(float).eps) * np.maximum(1.0, np.abs(np.asarray(x, dtype=float)))


def jacobian(sys: DynamicalSystem, x: Sequence[float], method: str = "analytic",
             h=None) -> np.ndarray:
    """Jacobian ``J[i, j] = d f_i / d x_j`` at ``x``.

    ``method`` is ``"analytic"`` (evaluates the symbolic derivatives) or
    ``"finite_difference"`` (central differences with step ``h``; scalar or
    per-coordinate, default :func:`fd_step`).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.n,):
        raise ValueError(f"state must have length {sys.n}")
    if not sys.in_domain(x):
        raise DomainError(f"point {x.tolist()} outside the system domain")
    if method == "analytic":
        J = np.array([[fn(x) for fn in row] for row in sys._jac_fn])
    elif method in ("finite_difference", "fd"):
        steps = fd_step(x) if h is None else np.broadcast_to(np.asarray(h, dtype=float), (sys.n,))
        J = np.empty((sys.n, sys.n))
        for j in range(sys.n):
            hj = steps[j]
            xp, xm = x.copy(), x.copy()
            xp[j] += hj
            xm[j] -= hj
            if not hj > 0 or xp[j] == x[j] or xm[j] == x[j]:
                raise ValueError(f"finite-difference step underflow on x{j + 1} (h={hj})")
            if not (sys.in_domain(xp) and sys.in_domain(xm)):
                raise DomainError(f"finite-difference stencil on x{j + 1} leaves the domain")
            J[:, j] = (sys.rhs(xp) - sys.rhs(xm)) / (xp[j] - xm[j])
    else:
        raise ValueError(f"unknown Jacobian method {method!r}")
    if not np.all(np.isfinite(J)):
        raise DomainError(f"non-finite Jacobian at {x.tolist()}")
    return J


# ---------------------------------------------------------------------------
# Built-in systems

_EXAMPLES = {
    "example1": "dim 1\nx1' = sqrt(x1) - 1\ndomain x1 >= 0\n",
    "example2": "dim 1\nx1' = -sqrt(x1) + 1\ndomain x1 > 0\n",
    "example3": "dim 2\nx1' = (1 - x1^3)/3\nx2' = -(x1^2 + 1)*(x2 - 1)\n",
    "example4": "dim 3\nx1' = x3\nx2' = (x2 - x3)^2\nx3' = x1 - 1 + x2\n",
}


def greitzer_text(g, psi_c0=0.352, H=0.18, W=0.25, B=0.8):
    """System text for the Greitzer surge model with throttle parameter ``g``.

    State ``x1`` is the normalized mass flow, ``x2`` the plenum pressure ratio.
    """
    r = _num
    psi_c = (f"{r(psi_c0)} + {r(H)}*(1 + 1.5*(x1/{r(W)} - 1) "
             f"- 0.5*(x1/{r(W)} - 1)^3)")
    return (f"dim 2\n"
            f"x1' = {r(B)}*({psi_c} - x2)\n"
            f"x2' = (x1 - {r(g)}*sqrt(x2))/{r(B)}\n"
            f"domain x2 > 0\n")


def builtin(name: str, **params) -> DynamicalSystem:
    """Return a registered system.

    ``example1`` .. ``example4`` are the four worked examples; ``greitzer``
    takes ``g`` (required) and optionally ``psi_c0``, ``H``, ``W``, ``B``.
    """
    if name in _EXAMPLES:
        if params:
            raise TypeError(f"{name} takes no parameters")
        return parse_system(_EXAMPLES[name], name=name)
    if name == "greitzer":
        if "g" not in params:
            raise TypeError("greitzer requires the throttle parameter g")
        if params["g"] < 0:
            raise ValueError("throttle parameter g must be >= 0")
        return parse_system(greitzer_text(**params), name="greitzer")
    raise KeyError(f"unknown built-in system {name!r}; choose from {', '.join(BUILTINS)}")


BUILTINS = tuple(_EXAMPLES) + ("greitzer",)
