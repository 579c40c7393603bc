"""Special functions used by the charge-dyon wavefunctions.

Jacobi polynomials are evaluated from the explicit finite sum, which stays
valid for negative parameters (the monopole harmonics need those).  The
confluent hypergeometric function only ever appears with a nonpositive
integer first argument, so it is a plain polynomial here.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from numbers import Rational

import numpy as np


@total_ordering
class HalfInt:
    """Exact integer or half-integer, stored as twice its value."""

    __slots__ = ("twice_value",)

    def __init__(self, twice_value: int):
        if isinstance(twice_value, bool) or not isinstance(twice_value, (int, np.integer)):
            raise TypeError(f"twice_value must be an integer, got {twice_value!r}")
        object.__setattr__(self, "twice_value", int(twice_value))

    def __setattr__(self, name, value):
        raise AttributeError("HalfInt is immutable")

    @classmethod
    def of(cls, value) -> "HalfInt":
        """Build from an int, HalfInt, Fraction, exact float or text like ``"13/2"``."""
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, str):
            try:
                value = Fraction(value.strip())
            except ValueError:
                raise ValueError(f"not a number: {value!r}") from None
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError(f"not a half-integer: {value!r}")
            value = Fraction(value)
        if isinstance(value, (int, np.integer, Rational)):
            twice = Fraction(value) * 2
            if twice.denominator != 1:
                raise ValueError(f"not a half-integer: {value}")
            return cls(int(twice))
        raise TypeError(f"cannot convert {type(value).__name__} to HalfInt")

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return HalfInt(self.twice_value + other.twice_value)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return HalfInt(self.twice_value - other.twice_value)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return HalfInt(other.twice_value - self.twice_value)

    def __neg__(self):
        return HalfInt(-self.twice_value)

    def __abs__(self):
        return HalfInt(abs(self.twice_value))

    def __float__(self):
        return self.twice_value / 2

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.twice_value == other.twice_value

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.twice_value < other.twice_value

    def __hash__(self):
        return hash(Fraction(self.twice_value, 2))

    def is_integer(self) -> bool:
        return self.twice_value % 2 == 0

    def as_int(self) -> int:
        if not self.is_integer():
            raise ValueError(f"{self} is not an integer")
        return self.twice_value // 2

    def as_fraction(self) -> Fraction:
        return Fraction(self.twice_value, 2)

    def __str__(self):
        if self.is_integer():
            return str(self.twice_value // 2)
        return f"{self.twice_value}/2"

    def __repr__(self):
        return f"HalfInt({self})"


def _coerce(value):
    try:
        return HalfInt.of(value)
    except (TypeError, ValueError):
        return NotImplemented


def _gbinom(z: float, k: int) -> float:
    """Binomial coefficient C(z, k) for real z and integer k."""
    if k < 0:
        return 0.0
    out = 1.0
    for i in range(k):
        out *= (z - i) / (i + 1)
    return out


def jacobi_poly(n: int, a: float, b: float, x):
    """Jacobi polynomial P_n^(a,b)(x).

    Uses ``sum_s C(n+a, n-s) C(n+b, s) ((x-1)/2)^s ((x+1)/2)^(n-s)``, which is
    a polynomial identity in (a, b) and so holds for negative parameters.
    Accepts scalar or array ``x``.
    """
    if n < 0 or int(n) != n:
        raise ValueError(f"degree must be a nonnegative integer, got {n}")
    n = int(n)
    x = np.asarray(x, dtype=float)
    lo = (x - 1.0) / 2.0
    hi = (x + 1.0) / 2.0
    total = np.zeros_like(x)
    for s in range(n + 1):
        coef = _gbinom(n + a, n - s) * _gbinom(n + b, s)
        if coef != 0.0:
            total = total + coef * lo**s * hi ** (n - s)
    return total[()] if total.ndim == 0 else total


def _kummer_coeffs(N: int, b, exact: bool = False) -> list:
    if N < 0 or int(N) != N:
        raise ValueError(f"N must be a nonnegative integer, got {N}")
    if b <= 0 and float(b).is_integer():
        raise ValueError(f"b = {b} is a pole of the Pochhammer symbol (b)_k")
    one = Fraction(1) if exact else 1.0
    if exact:
        b = Fraction(b)
    coeffs = [one]
    term = one
    for k in range(int(N)):
        term = term * (-N + k) / ((b + k) * (k + 1))
        coeffs.append(term)
    return coeffs


def kummer_poly(N: int, b, x):
    """1F1(-N; b; x), a degree-N polynomial in x.

    With rational ``b`` and ``x`` (int or Fraction) the sum is exact.
    """
    if isinstance(x, (int, Fraction)) and isinstance(b, (int, Fraction)):
        out = Fraction(0)
        for c in reversed(_kummer_coeffs(N, b, exact=True)):
            out = out * x + c
        return out
    coeffs = _kummer_coeffs(N, b)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for c in reversed(coeffs):
        out = out * x + c
    return out[()] if out.ndim == 0 else out


def kummer_poly_derivs(N: int, b: float, x):
    """Return (y, y', y'') of 1F1(-N; b; x) with respect to x."""
    coeffs = _kummer_coeffs(N, b)
    x = np.asarray(x, dtype=float)
    y = np.zeros_like(x)
    dy = np.zeros_like(x)
    d2y = np.zeros_like(x)
    # Horner with derivative tracking
    for c in reversed(coeffs):
        d2y = d2y * x + 2.0 * dy
        dy = dy * x + y
        y = y * x + c
    if y.ndim == 0:
        return y[()], dy[()], d2y[()]
    return y, dy, d2y


def _nonneg_int(value: HalfInt, what: str) -> int:
    if not value.is_integer() or value.twice_value < 0:
        raise ValueError(f"{what} = {value} must be a nonnegative integer")
    return value.as_int()


def monopole_harmonic(mu, l, mprime, theta, phi):
    """Monopole harmonic Y_{mu l m'}(theta, phi).

    Wu-Yang form with the Dirac string along the negative z axis::

        2^m' sqrt((2l+1)(l-m')!(l+m')! / (4 pi (l-mu)!(l+mu)!))
          * P_{l+m'}^(-mu-m', mu-m')(cos t) e^{i(m'+mu)phi}
          / ((1-cos t)^((mu+m')/2) (1+cos t)^((m'-mu)/2))

    ``theta`` must lie strictly inside (0, pi).  Reduces to the usual
    Condon-Shortley spherical harmonic at mu = 0.
    """
    mu, l, mprime = HalfInt.of(mu), HalfInt.of(l), HalfInt.of(mprime)
    l_minus_mu = _nonneg_int(l - mu, "l - mu")
    l_plus_mu = _nonneg_int(l + mu, "l + mu")
    l_minus_m = _nonneg_int(l - mprime, "l - m'")
    degree = _nonneg_int(l + mprime, "l + m'")

    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any((theta <= 0.0) | (theta >= math.pi)):
        raise ValueError("theta must lie strictly inside (0, pi)")

    fl, fmu, fm = float(l), float(mu), float(mprime)
    radicand = (2 * fl + 1) / (4 * math.pi)
    assert radicand > 0
    log_norm = 0.5 * (
        math.log(radicand)
        + math.lgamma(l_minus_m + 1)
        + math.lgamma(degree + 1)
        - math.lgamma(l_minus_mu + 1)
        - math.lgamma(l_plus_mu + 1)
    )
    c = np.cos(theta)
    # fold 2^m' and the normalization into one log to survive large indices
    log_amp = (
        fm * math.log(2.0)
        + log_norm
        - 0.5 * (fmu + fm) * np.log1p(-c)
        - 0.5 * (fm - fmu) * np.log1p(c)
    )
    jac = jacobi_poly(degree, -fmu - fm, fmu - fm, c)
    out = np.exp(log_amp) * jac * np.exp(1j * (fm + fmu) * phi)
    return out[()] if np.ndim(out) == 0 else out
