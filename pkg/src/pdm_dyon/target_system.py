"""Type-3 (j = mu - 1/2) bound states of a spin-1/2 charge in a dyon field.

Natural units, hbar = m_e = c = 1; the charge product is eQ = n * alpha_fs
with n <= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import HalfInt, kummer_poly_derivs, monopole_harmonic

ALPHA_FS = 1.0 / 137.0


class RadialNodeError(ArithmeticError):
    """The radial function vanishes, so F'/F is singular."""

    def __init__(self, r: float, message: str | None = None):
        super().__init__(message or f"radial function has a node near r = {r!r}")
        self.r = r


@dataclass(frozen=True)
class QuantumNumbers:
    mu: HalfInt
    m: HalfInt
    N: int = 0
    n: int = 0
    alpha_fs: float = ALPHA_FS
    m0: float = 1.0
    j: HalfInt = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        mu = HalfInt.of(self.mu)
        m = HalfInt.of(self.m)
        j = mu - HalfInt(1) if self.j is None else HalfInt.of(self.j)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "j", j)
        if mu.twice_value < 0:
            raise ValueError(f"mu must be nonnegative, got {mu}")
        if j != mu - HalfInt(1):
            raise ValueError(f"type-3 states need j = mu - 1/2, got j = {j} for mu = {mu}")
        # mu = 0 is a degenerate monopole-free limit; there is no m range to check.
        if mu.twice_value > 0:
            if not (m - j).is_integer():
                raise ValueError(f"m - j must be an integer (m = {m}, j = {j})")
            if abs(m) > j:
                raise ValueError(f"need -j <= m <= j (m = {m}, j = {j})")
        if int(self.N) != self.N or self.N < 0:
            raise ValueError(f"N must be a nonnegative integer, got {self.N}")
        if int(self.n) != self.n or self.n > 0:
            raise ValueError(f"n must be a nonpositive integer, got {self.n}")
        if self.alpha_fs <= 0 or self.m0 <= 0:
            raise ValueError("alpha_fs and m0 must be positive")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "n", int(self.n))

    @property
    def ell(self) -> float:
        """sqrt((j + 1/2)^2 - mu^2); zero for every type-3 state."""
        half = self.j + HalfInt(1)
        radicand = (half.as_fraction() ** 2) - self.mu.as_fraction() ** 2
        return math.sqrt(radicand)

    @property
    def eQ(self) -> float:
        return self.n * self.alpha_fs


def energy_level(q: QuantumNumbers) -> float:
    return -((q.n * q.alpha_fs) ** 2) / (2.0 * (q.N + 1) ** 2)


def wavenumber(q: QuantumNumbers) -> float:
    radicand = -2.0 * q.m0 * energy_level(q)
    if radicand < 0:
        raise ArithmeticError(f"negative radicand {radicand} for the wavenumber")
    return math.sqrt(radicand)


def _radial_norm(q: QuantumNumbers) -> float:
    # |n| alpha in place of n alpha keeps F real; it cancels from F'/F anyway.
    if q.n == 0:
        return 1.0
    return 2.0 * (abs(q.n) * q.alpha_fs / (q.N + 1)) ** 1.5


def radial_f3_derivs(r, q: QuantumNumbers):
    """Return (F, F', F'') at r, derivatives taken analytically."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    k = wavenumber(q)
    p, dp, d2p = kummer_poly_derivs(q.N, 2.0, 2.0 * k * r)
    c = _radial_norm(q) * np.exp(-k * r)
    f = c * p
    df = c * (-k * p + 2.0 * k * dp)
    d2f = c * (k * k * p - 4.0 * k * k * dp + 4.0 * k * k * d2p)
    return f, df, d2f


def radial_f3(r, q: QuantumNumbers):
    return radial_f3_derivs(r, q)[0]


def radial_logderiv(r: float, q: QuantumNumbers) -> float:
    """F'/F, computed from the Kummer polynomial and its derivative."""
    if r <= 0:
        raise ValueError("r must be positive")
    k = wavenumber(q)
    if q.N == 0 or k == 0.0:
        return -k
    p, dp, _ = kummer_poly_derivs(q.N, 2.0, 2.0 * k * r)
    # polynomial values are O(1) near the origin; scale the threshold by the
    # size of the derivative so a step of 1e-12 in r cannot cross the node
    if abs(p) <= 1e-12 * max(1.0, abs(2.0 * k * dp) * r):
        raise RadialNodeError(r)
    return float(-k + 2.0 * k * dp / p)


def radial_residual(r, q: QuantumNumbers, sign_convention: int = 1):
    """Relative residual of F'' + 2F'/r + 2 m0 (s|eQ|)/r F + 2 m0 E F.

    ``sign_convention=+1`` uses the attractive |eQ|; ``-1`` keeps the literal
    eQ = n alpha (negative for n < 0).
    """
    if sign_convention not in (1, -1):
        raise ValueError("sign_convention must be +1 or -1")
    f, df, d2f = radial_f3_derivs(r, q)
    r = np.asarray(r, dtype=float)
    e_n = energy_level(q)
    k = wavenumber(q)
    coulomb = 2.0 * q.m0 * sign_convention * abs(q.eQ) / r * f
    terms = (d2f, 2.0 * df / r, coulomb, 2.0 * q.m0 * e_n * f)
    expr = sum(terms)
    scale = np.maximum(np.abs(d2f), k * k * np.abs(f))
    fallback = np.max(np.abs(np.stack(np.broadcast_arrays(*terms))), axis=0)
    scale = np.where(scale > 0, scale, fallback)
    out = np.where(scale > 0, np.abs(expr) / np.where(scale > 0, scale, 1.0), 0.0)
    return out[()] if out.ndim == 0 else out


def spinor_coefficients(q: QuantumNumbers) -> tuple[float, float]:
    """Real prefactors of the upper and lower spinor components."""
    mu, m = q.mu.as_fraction(), q.m.as_fraction()
    up = (mu - m + HalfInt(1).as_fraction()) / (2 * mu + 1)
    down = (mu + m + HalfInt(1).as_fraction()) / (2 * mu + 1)
    return -math.sqrt(up), math.sqrt(down)


def azimuthal_eigenvalues(q: QuantumNumbers) -> tuple[float, float]:
    """mu + m -/+ 1/2: d/dphi of the upper/lower component is i times these."""
    half = HalfInt(1)
    return float(q.mu + q.m - half), float(q.mu + q.m + half)


def omega_components(q: QuantumNumbers):
    """(coefficient, m') pairs for the two spinor components."""
    c_up, c_down = spinor_coefficients(q)
    half = HalfInt(1)
    return ((c_up, q.m - half), (c_down, q.m + half))


def omega_spinor(q: QuantumNumbers, theta, phi) -> np.ndarray:
    """Angular bi-spinor; shape (2,) + broadcast(theta, phi).shape."""
    comps = []
    for coef, mprime in omega_components(q):
        comps.append(coef * monopole_harmonic(q.mu, q.mu, mprime, theta, phi))
    return np.stack(np.broadcast_arrays(*comps))


def psi3(r, theta, phi, q: QuantumNumbers) -> np.ndarray:
    return radial_f3(r, q) * omega_spinor(q, theta, phi)
