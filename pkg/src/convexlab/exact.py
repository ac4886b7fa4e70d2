"""Exact rational quantities and the first-order asymptotic of the convex-position probability."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce

import numpy as np

from .errors import DomainError, InvalidParameter
from .geometry import closure_lengths, make_polygon


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidParameter(msg)


def p_triangle(n: int) -> Fraction:
    """Probability that n uniform points in a triangle are in convex position."""
    _need(isinstance(n, (int, np.integer)) and n >= 3, "n must be an integer >= 3")
    n = int(n)
    num = 2**n * math.factorial(3 * n - 3)
    den = math.factorial(2 * n) * math.factorial(n - 1) ** 3
    return Fraction(num, den)


def p_square(n: int) -> Fraction:
    """Probability that n uniform points in a square are in convex position."""
    _need(isinstance(n, (int, np.integer)) and n >= 3, "n must be an integer >= 3")
    n = int(n)
    return Fraction(math.comb(2 * n - 2, n - 1) ** 2, math.factorial(n) ** 2)


def exact_probability(kappa: int, n: int) -> Fraction:
    if kappa == 3:
        return p_triangle(n)
    if kappa == 4:
        return p_square(n)
    raise InvalidParameter(f"no exact formula for kappa={kappa}")


def sigma_inverse(kappa: int) -> list[list[Fraction]]:
    """Inverse covariance of the limiting normalized size-vector, size (kappa-1).

    Entries are ``M / 2`` with ``M[i][i] = 8 - 2B(i)`` and, off the diagonal,
    ``M[i][j] = 4 + [|i-j| = 1] - B(i) - B(j)``, where ``B(i) = 1`` on the two
    boundary indices ``i in {1, kappa-1}`` (1-based) and 0 elsewhere.
    """
    _need(isinstance(kappa, (int, np.integer)) and kappa >= 3, "kappa must be an integer >= 3")
    size = int(kappa) - 1

    def bnd(i):
        return 1 if i in (0, size - 1) else 0

    out = []
    for i in range(size):
        row = []
        for j in range(size):
            if i == j:
                v = 8 - 2 * bnd(i)
            else:
                v = 4 + (abs(i - j) == 1) - bnd(i) - bnd(j)
            row.append(Fraction(v, 2))
        out.append(row)
    return out


def det_rational(m) -> Fraction:
    """Exact determinant by fraction-free (Bareiss) elimination.

    Rows are first cleared of denominators so the elimination runs on
    integers; the row scale factors are divided out at the end.
    """
    rows = [[Fraction(x) for x in row] for row in m]
    size = len(rows)
    if any(len(r) != size for r in rows):
        raise InvalidParameter("matrix must be square")
    if size == 0:
        return Fraction(1)
    scale = 1
    a = []
    for row in rows:
        lcm = reduce(math.lcm, (x.denominator for x in row), 1)
        scale *= lcm
        a.append([int(x * lcm) for x in row])

    sign = 1
    prev = 1
    for k in range(size - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, size) if a[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return Fraction(sign * a[-1][-1], scale)


def _a_sequence(k: int) -> int:
    """``(2 - sqrt 3)^k + (2 + sqrt 3)^k`` as an exact integer."""
    a0, a1 = 2, 4
    if k == 0:
        return a0
    for _ in range(k - 1):
        a0, a1 = a1, 4 * a1 - a0
    return a1


def d_kappa(kappa: int) -> Fraction:
    """Determinant of ``sigma_inverse(kappa)`` from its closed form."""
    _need(isinstance(kappa, (int, np.integer)) and kappa >= 3, "kappa must be an integer >= 3")
    kappa = int(kappa)
    return Fraction(kappa * (2 * (-1) ** (kappa - 1) + _a_sequence(kappa)), 3 * 2**kappa)


def l_det(m: int) -> Fraction:
    """Determinant of the m x m tridiagonal matrix with 4 on the diagonal and 1 beside it."""
    _need(isinstance(m, (int, np.integer)) and m >= 1, "m must be an integer >= 1")
    prev, cur = 1, 4
    for _ in range(int(m) - 1):
        prev, cur = cur, 4 * cur - prev
    return Fraction(cur)


def tridiagonal(m: int) -> list[list[int]]:
    return [[4 if i == j else (1 if abs(i - j) == 1 else 0) for j in range(m)] for i in range(m)]


def log_constant(kappa: int) -> float:
    """Logarithm of the multiplicative constant in the asymptotic probability."""
    poly = make_polygon(kappa)
    d = float(d_kappa(kappa))
    return (
        0.5 * (kappa + 1) * math.log(kappa)
        - 0.5 * kappa * math.log(math.pi)
        - 0.5 * math.log(d)
        - kappa * math.log(4.0)
        - kappa * math.log1p(math.cos(poly.theta))
    )


def log_p_asymptotic(kappa: int, n: int) -> float:
    """Natural log of the first-order equivalent of the convex-position probability."""
    _need(isinstance(kappa, (int, np.integer)) and kappa >= 3, "kappa must be an integer >= 3")
    _need(isinstance(n, (int, np.integer)) and n >= 3, "n must be an integer >= 3")
    poly = make_polygon(kappa)
    ln = math.log(n)
    return (
        log_constant(kappa)
        + 2 * n
        - n * math.log(4.0)
        + 3 * n * math.log(kappa)
        + 2 * n * math.log(poly.r)
        + n * math.log(math.sin(poly.theta))
        - (2 * n + kappa / 2) * ln
    )


def log_fraction(q: Fraction) -> float:
    """Natural log of a positive rational that may not fit in a float."""
    return math.log(q.numerator) - math.log(q.denominator)


def in_size_set(s, n: int) -> bool:
    """True iff ``s`` sums to n with no two cyclically adjacent zeros."""
    s = np.asarray(s)
    return bool(
        s.sum() == n and np.all(s >= 0) and np.all(s + np.roll(s, -1) >= 1)
    )


def p34_joint_density_log(kappa: int, n: int, ell, s):
    """Log of the joint density of boundary distances and size-vector for kappa in {3, 4}.

    Normalized by the exact convex-position probability.  Returns ``-inf``
    when ``s`` is not an admissible size-vector.  ``ell`` may also be a batch
    of shape ``(..., kappa)``, in which case an array of log densities is returned.
    """
    if kappa not in (3, 4):
        raise InvalidParameter("joint density is tabulated for kappa 3 and 4 only")
    poly = make_polygon(kappa)
    ell = np.asarray(ell, dtype=float)
    s = np.asarray(s, dtype=int)
    if ell.shape[-1:] != (kappa,) or s.shape != (kappa,):
        raise InvalidParameter("ell and s must have kappa entries")
    c = poly.r - closure_lengths(poly, ell)
    if np.any(ell < 0) or np.any(c <= 0):
        raise DomainError("boundary distances are outside the feasible region")
    if not in_size_set(s, n):
        return -math.inf if ell.ndim == 1 else np.full(ell.shape[:-1], -math.inf)
    cuts = s + np.roll(s, -1) - 1
    const = math.lgamma(n + 1) + (n - kappa) * math.log(math.sin(poly.theta))
    const -= log_fraction(exact_probability(kappa, n))
    const -= sum(math.lgamma(a + 1) + math.lgamma(b + 1) for a, b in zip(s, cuts))
    out = const + np.log(c) @ cuts
    return float(out) if ell.ndim == 1 else out
