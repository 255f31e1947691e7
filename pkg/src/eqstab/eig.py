"""Eigenvalues of small dense real matrices.

:func:`eigenvalues` runs balancing, reduction to upper Hessenberg form and
Francis double-shift QR iteration.  :func:`char_roots_smalln` solves the
characteristic polynomial in closed form for n <= 3 and serves as an
independent oracle for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

__all__ = ["Spectrum", "eigenvalues", "char_roots_smalln", "char_poly"]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with multiplicity, sorted by ``(re, im)`` ascending."""

    values: tuple

    @classmethod
    def from_values(cls, values):
        cleaned = []
        for v in values:
            v = complex(v)
            # normalize -0.0 so ordering and serialization are stable
            cleaned.append(complex(v.real + 0.0, v.imag + 0.0))
        return cls(tuple(sorted(cleaned, key=lambda z: (z.real, z.imag))))

    @property
    def n(self):
        return len(self.values)

    @property
    def real(self):
        return np.array([z.real for z in self.values])

    @property
    def imag(self):
        return np.array([z.imag for z in self.values])

    @property
    def max_real(self):
        return max(z.real for z in self.values)

    def as_array(self):
        return np.array(self.values, dtype=complex)

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


def _as_square(M):
    A = np.array(M, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains NaN or infinite entries")
    return A


def _balance(a):
    """Parlett-Reinsch balancing (radix 2), in place on a list of lists."""
    n = len(a)
    radix, sqrdx = 2.0, 4.0
    done = False
    while not done:
        done = True
        for i in range(n):
            c = sum(abs(a[j][i]) for j in range(n) if j != i)
            r = sum(abs(a[i][j]) for j in range(n) if j != i)
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                g = 1.0 / f
                for j in range(n):
                    a[i][j] *= g
                for j in range(n):
                    a[j][i] *= f


def _hessenberg(a):
    """Reduce to upper Hessenberg form by stabilized elementary similarity transforms."""
    n = len(a)
    for m in range(1, n - 1):
        x = 0.0
        piv = m
        for j in range(m, n):
            if abs(a[j][m - 1]) > abs(x):
                x = a[j][m - 1]
                piv = j
        if piv != m:
            for j in range(m - 1, n):
                a[piv][j], a[m][j] = a[m][j], a[piv][j]
            for j in range(n):
                a[j][piv], a[j][m] = a[j][m], a[j][piv]
        if x != 0.0:
            for i in range(m + 1, n):
                y = a[i][m - 1]
                if y != 0.0:
                    y /= x
                    a[i][m - 1] = 0.0
                    for j in range(m, n):
                        a[i][j] -= y * a[m][j]
                    for j in range(n):
                        a[j][m] += y * a[j][i]


def _hqr(a, max_sweeps):
    """Eigenvalues of an upper Hessenberg matrix (list of lists, destroyed)."""
    n = len(a)
    wr = [0.0] * n
    wi = [0.0] * n
    anorm = sum(abs(a[i][j]) for i in range(n) for j in range(max(i - 1, 0), n))
    nn = n - 1
    t = 0.0
    sweeps = 0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = abs(a[l - 1][l - 1]) + abs(a[l][l])
                if s == 0.0:
                    s = anorm
                if abs(a[l][l - 1]) <= _EPS * s:
                    a[l][l - 1] = 0.0
                    break
                l -= 1
            x = a[nn][nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1][nn - 1]
            w = a[nn][nn - 1] * a[nn - 1][nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if sweeps >= max_sweeps:
                found = [complex(wr[k], wi[k]) for k in range(nn + 1, n)]
                raise ConvergenceError(
                    f"QR iteration did not converge within {max_sweeps} sweeps; "
                    f"{len(found)} of {n} eigenvalues found: {found}")
            if its in (10, 20):
                # exceptional shift breaks cycling
                t += x
                for i in range(nn + 1):
                    a[i][i] -= x
                s = abs(a[nn][nn - 1]) + abs(a[nn - 1][nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            sweeps += 1
            m = nn - 2
            while m >= l:
                z = a[m][m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1][m] + a[m][m + 1]
                q = a[m + 1][m + 1] - z - r - s
                r = a[m + 2][m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m][m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1][m - 1]) + abs(z) + abs(a[m + 1][m + 1]))
                if u <= _EPS * v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i][i - 2] = 0.0
                if i != m + 2:
                    a[i][i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k][k - 1]
                    q = a[k + 1][k - 1]
                    r = a[k + 2][k - 1] if k + 1 != nn else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k][k - 1] = -a[k][k - 1]
                else:
                    a[k][k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    p = a[k][j] + q * a[k + 1][j]
                    if k + 1 != nn:
                        p += r * a[k + 2][j]
                        a[k + 2][j] -= p * z
                    a[k + 1][j] -= p * y
                    a[k][j] -= p * x
                mmin = nn if nn < k + 3 else k + 3
                for i in range(l, mmin + 1):
                    p = x * a[i][k] + y * a[i][k + 1]
                    if k + 1 != nn:
                        p += z * a[i][k + 2]
                        a[i][k + 2] -= p * r
                    a[i][k + 1] -= p * q
                    a[i][k] -= p
    return [complex(wr[k], wi[k]) for k in range(n)]


def eigenvalues(M) -> Spectrum:
    """All eigenvalues of the real square matrix ``M``.

    Raises :class:`ConvergenceError` if QR iteration exceeds ``100 * n``
    sweeps, and ``ValueError`` on non-finite input.
    """
    A = _as_square(M)
    n = A.shape[0]
    if n == 1:
        return Spectrum.from_values([A[0, 0]])
    a = A.tolist()
    _balance(a)
    _hessenberg(a)
    return Spectrum.from_values(_hqr(a, 100 * n))


def char_poly(M):
    """Monic characteristic-polynomial coefficients ``[1, c1, .., cn]`` for n <= 3."""
    A = _as_square(M)
    n = A.shape[0]
    if n == 1:
        return [1.0, -A[0, 0]]
    tr = float(np.trace(A))
    if n == 2:
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        return [1.0, -tr, float(det)]
    if n == 3:
        minors = (A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
                  + A[0, 0] * A[2, 2] - A[0, 2] * A[2, 0]
                  + A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
        det = (A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
               - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
               + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0]))
        return [1.0, -tr, float(minors), float(-det)]
    raise ValueError("closed-form characteristic polynomial only for n <= 3")


def _quadratic(b, c):
    """Roots of s^2 + b s + c."""
    disc = b * b - 4.0 * c
    if disc >= 0.0:
        q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
        if q == 0.0:
            return [0.0, 0.0]
        return [q, c / q]
    re = -0.5 * b
    im = 0.5 * math.sqrt(-disc)
    return [complex(re, -im), complex(re, im)]


def _cbrt(v):
    return math.copysign(abs(v) ** (1.0 / 3.0), v)


def _polish(coef, s, steps=3):
    """Newton refinement of a real root of the monic cubic ``coef``."""
    _, a2, a1, a0 = coef

    def val(z):
        return ((z + a2) * z + a1) * z + a0

    for _ in range(steps):
        fz = val(s)
        dz = (3.0 * s + 2.0 * a2) * s + a1
        if dz == 0.0:
            break
        cand = s - fz / dz
        if abs(val(cand)) < abs(fz):
            s = cand
        else:
            break
    return s


def char_roots_smalln(M) -> Spectrum:
    """Eigenvalues of ``M`` (n <= 3) from closed-form roots of det(sI - M)."""
    coef = char_poly(M)
    n = len(coef) - 1
    if n == 1:
        return Spectrum.from_values([-coef[1]])
    if n == 2:
        return Spectrum.from_values(_quadratic(coef[1], coef[2]))

    _, a2, a1, a0 = coef
    shift = a2 / 3.0
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2 ** 3 / 27.0 - a2 * a1 / 3.0 + a0
    D = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if D < 0.0:
        # three distinct real roots: trigonometric method
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = (3.0 * q / (2.0 * p)) * math.sqrt(-3.0 / p)
        phi = math.acos(max(-1.0, min(1.0, arg)))
        roots = [r * math.cos(phi / 3.0 - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]
        return Spectrum.from_values([_polish(coef, s) for s in roots])
    # Cardano: one real root, then deflate to a quadratic
    sq = math.sqrt(D)
    u = _cbrt(-q / 2.0 + sq)
    v = _cbrt(-q / 2.0 - sq)
    s1 = _polish(coef, u + v - shift)
    b1 = a2 + s1
    b0 = a1 + s1 * b1
    return Spectrum.from_values([s1] + _quadratic(b1, b0))
