"""Residual checks for the analytic identities and the solved mass profiles.

Angular derivatives use 5-point central differences; radial derivatives of
the target wavefunction are analytic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .pdm_core import (
    ZHU_KROEMER,
    MappingParams,
    OrderingParams,
    SpinBranch,
    effective_potential,
    mapping_terms,
)
from .specfun import HalfInt, monopole_harmonic
from .target_system import QuantumNumbers, energy_level, omega_components, radial_f3_derivs

DEFAULT_FD_STEP = 1e-4


@dataclass(frozen=True)
class ResidualReport:
    max_rel_residual: float
    location_of_max: object
    samples: int
    notes: str = ""
    sign: int | None = None

    def __post_init__(self):
        if not self.max_rel_residual >= 0:
            raise ValueError("residual must be nonnegative")
        if self.samples < 1:
            raise ValueError("a report needs at least one sample")


@dataclass(frozen=True)
class AngularOperatorReport:
    """Measured coefficient of the leftover mu*Omega term, per component."""

    measured_s: tuple[float, ...]
    remainder: tuple[complex, ...]
    theta: float
    phi: float


def chebyshev_points(lo: float, hi: float, count: int) -> np.ndarray:
    """Chebyshev-Gauss nodes on (lo, hi), ascending, endpoints excluded."""
    k = np.arange(count)
    x = np.cos((2 * k + 1) * math.pi / (2 * count))
    return np.sort(0.5 * (lo + hi) + 0.5 * (hi - lo) * x)


def ode_pointwise_residual(profile, params: MappingParams, branch: SpinBranch, r: float) -> float:
    M, dM, d2M = (float(v) for v in profile.evaluate(r))
    terms = mapping_terms(r, M, dM, d2M, params, branch)
    scale = max(abs(t) for t in terms)
    if scale == 0.0:
        return 0.0
    return abs(math.fsum(terms)) / scale


def ode_residual(profile, params: MappingParams, branch: SpinBranch,
                 sample_count: int = 200) -> ResidualReport:
    if len(profile.r) < 3:
        raise ValueError("profile must cover at least two steps")
    lo, hi = profile.span
    worst, where = 0.0, None
    for r in chebyshev_points(lo, hi, sample_count):
        res = ode_pointwise_residual(profile, params, branch, float(r))
        if where is None or res > worst:
            worst, where = res, float(r)
    return ResidualReport(worst, where, sample_count, f"mapping equation, {branch.label} branch")


def branch_agreement(up, down, r_lo: float, r_hi: float, grid: int = 200) -> float:
    """sup |M_up - M_down| / max(M_up, M_down) over a uniform grid."""
    for name, prof in (("up", up), ("down", down)):
        if not prof.covers(r_lo, r_hi):
            lo, hi = prof.span
            raise ValueError(f"{name} profile [{lo}, {hi}] does not cover [{r_lo}, {r_hi}]")
    rs = np.linspace(r_lo, r_hi, grid)
    a = up.mass(rs)
    b = down.mass(rs)
    return float(np.max(np.abs(a - b) / np.maximum(a, b)))


def crossing_radius(profile, threshold: float = 10.0) -> float | None:
    """Smallest r at which M crosses ``threshold``, or None."""
    g = profile.M - threshold
    for i in range(len(g) - 1):
        if g[i] == 0.0:
            return float(profile.r[i])
        if (g[i] > 0) != (g[i + 1] > 0):
            lo, hi = float(profile.r[i]), float(profile.r[i + 1])
            g_lo = g[i]
            while hi - lo > 1e-12:
                mid = 0.5 * (lo + hi)
                g_mid = profile.mass(mid) - threshold
                if (g_mid > 0) == (g_lo > 0):
                    lo, g_lo = mid, g_mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
    if g[-1] == 0.0:
        return float(profile.r[-1])
    return None


# -- angular finite differences ---------------------------------------------

def _d1(f, x, h):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def _d2(f, x, h):
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def angular_laplacian(func, theta: float, phi: float, h: float = DEFAULT_FD_STEP):
    """(1/sin t) d_t(sin t d_t f) + (1/sin^2 t) d_phi^2 f by finite differences."""
    ft = lambda t: func(t, phi)  # noqa: E731
    fp = lambda p: func(theta, p)  # noqa: E731
    s = math.sin(theta)
    return _d2(ft, theta, h) + math.cos(theta) / s * _d1(ft, theta, h) + _d2(fp, phi, h) / s**2


def _check_fd(theta: float, h: float):
    if not 1e-6 <= h <= 1e-1:
        raise ValueError(f"fd_step {h} outside [1e-6, 1e-1]")
    if not 2 * h < theta < math.pi - 2 * h:
        raise ValueError("finite-difference stencil reaches a pole")


def _angular_components(q: QuantumNumbers):
    """(mu, l, m') for each harmonic entering the angular spinor.

    At mu = 0 the spinor is undefined; the l = 0 standard harmonic stands in.
    """
    if q.mu.twice_value == 0:
        zero = HalfInt(0)
        return [(zero, zero, zero)]
    return [(q.mu, q.mu, mprime) for _, mprime in omega_components(q)]


def angular_remainder(mu, l, mprime, theta: float, phi: float,
                      fd_step: float = DEFAULT_FD_STEP) -> complex:
    """What is left of the angular Laplacian after the monopole terms.

    Returns [Lap_ang Y - 2i mu (1-cos)/sin^2 d_phi Y - mu^2 (1-cos)^2/sin^2 Y] / Y,
    with d_phi Y taken from its exact eigenvalue i(m' + mu).  Equals
    mu^2 - l(l+1) for an L^2 eigenfunction.
    """
    _check_fd(theta, fd_step)
    mu, l, mprime = HalfInt.of(mu), HalfInt.of(l), HalfInt.of(mprime)
    fy = lambda t, p: monopole_harmonic(mu, l, mprime, t, p)  # noqa: E731
    y = fy(theta, phi)
    fmu = float(mu)
    c, s2 = math.cos(theta), math.sin(theta) ** 2
    dphi = 1j * (float(mprime) + fmu) * y
    lap = angular_laplacian(fy, theta, phi, fd_step)
    rest = lap - 2j * fmu * (1 - c) / s2 * dphi - fmu**2 * (1 - c) ** 2 / s2 * y
    return complex(rest / y)


def angular_operator_check(q: QuantumNumbers, theta: float, phi: float,
                           fd_step: float = DEFAULT_FD_STEP) -> AngularOperatorReport:
    rems = tuple(angular_remainder(mu, l, mp, theta, phi, fd_step)
                 for mu, l, mp in _angular_components(q))
    fmu = float(q.mu)
    s = tuple(r.real / fmu if fmu else math.nan for r in rems)
    return AngularOperatorReport(s, rems, theta, phi)


def l2_apply(mu, l, mprime, theta: float, phi: float, fd_step: float = DEFAULT_FD_STEP) -> complex:
    """The monopole L^2 operator applied to Y_{mu l m'}, all derivatives by FD."""
    _check_fd(theta, fd_step)
    fy = lambda t, p: monopole_harmonic(mu, l, mprime, t, p)  # noqa: E731
    fmu = float(HalfInt.of(mu))
    c, s2 = math.cos(theta), math.sin(theta) ** 2
    y = fy(theta, phi)
    dphi = _d1(lambda p: fy(theta, p), phi, fd_step)
    return complex(
        -angular_laplacian(fy, theta, phi, fd_step)
        + 2j * fmu * (1 - c) / s2 * dphi
        + fmu**2 * (1 - c) ** 2 / s2 * y
        + fmu**2 * y
    )


def k2_identity_check(q: QuantumNumbers, theta: float, phi: float,
                      fd_step: float = DEFAULT_FD_STEP, tol: float = 1e-4) -> ResidualReport:
    """Test mu^2 - L^2 = mu (sigma.r) on the spinor, given K Omega = -Omega.

    With K^2 + K vanishing on the spinor the right side is +mu Omega or
    -mu Omega depending on the sigma.r eigenvalue; both are tried.
    """
    fmu = float(q.mu)
    worst = {1: 0.0, -1: 0.0}
    for mu, l, mp in _angular_components(q):
        y = complex(monopole_harmonic(mu, l, mp, theta, phi))
        left = fmu**2 * y - l2_apply(mu, l, mp, theta, phi, fd_step)
        for s in (1, -1):
            right = s * fmu * y
            # |y| floors the scale so the mu = 0 case (both sides zero) stays finite
            scale = max(abs(left), abs(right), abs(y))
            res = abs(left - right) / scale
            worst[s] = max(worst[s], res)
    closing = [s for s in (1, -1) if worst[s] <= tol]
    note = f"residual(s=+1)={worst[1]:.3e}, residual(s=-1)={worst[-1]:.3e}"
    if len(closing) == 1:
        sign = closing[0]
        note += f"; closes with sigma.r = {sign:+d}"
    elif closing:
        sign = None
        note += "; both hypotheses close"
    else:
        sign = None
        note += "; neither hypothesis closes"
    best = min(worst.values()) if sign is None else worst[sign]
    return ResidualReport(best, (theta, phi), len(_angular_components(q)), note, sign)


def pde_residual_at_point(profile, params: MappingParams, branch: SpinBranch, r: float,
                          theta: float, phi: float, fd_step: float = DEFAULT_FD_STEP,
                          ordering: OrderingParams = ZHU_KROEMER) -> complex:
    """(H_pdm psi - E psi) / |E psi| for one spinor component at a point.

    H_pdm = -(1/M) Lap + (1/M^2) grad M . grad + U_eff, with M = M(r) from the
    profile's dense output.
    """
    _check_fd(theta, fd_step)
    q = params.q
    comps = _angular_components(q)
    mu, l, mp = comps[0] if len(comps) == 1 or branch is SpinBranch.UP else comps[1]
    fy = lambda t, p: monopole_harmonic(mu, l, mp, t, p)  # noqa: E731
    omega = complex(fy(theta, phi))
    lap_ang = complex(angular_laplacian(fy, theta, phi, fd_step))

    f, df, d2f = (float(v) for v in radial_f3_derivs(r, q))
    M, dM, d2M = (float(v) for v in profile.evaluate(r))
    e_n = energy_level(q)
    u = effective_potential(M, dM, d2M, r, ordering)

    psi = f * omega
    terms = (
        -(d2f + 2.0 * df / r) * omega / M,
        -f * lap_ang / (M * r * r),
        dM * df * omega / M**2,
        u * psi,
        -e_n * psi,
    )
    total = sum(terms)
    scale = abs(e_n * psi)
    if scale == 0.0:
        # E = 0: fall back to the kinetic scale of the operator
        scale = abs(psi) / (M * r * r)
    return total / scale if scale > 0 else complex(total)


def azimuthal_check(q: QuantumNumbers, theta: float, phi: float,
                    fd_step: float = DEFAULT_FD_STEP) -> float:
    """Max relative error of d_phi Omega = i(mu + m -/+ 1/2) Omega, by FD."""
    worst = 0.0
    for mu, l, mp in _angular_components(q):
        f = lambda p: monopole_harmonic(mu, l, mp, theta, p)  # noqa: E731
        fd = _d1(f, phi, fd_step)
        exact = 1j * (float(mp) + float(mu)) * f(phi)
        worst = max(worst, abs(fd - exact) / max(abs(exact), abs(f(phi))))
    return worst


def harmonic_norm(mu, l, mprime, n_theta: int = 200, n_phi: int = 16) -> float:
    """Integral of |Y|^2 over the sphere: Gauss-Legendre in cos t, trapezoid in phi."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phis = np.linspace(0.0, 2 * math.pi, n_phi, endpoint=False)
    tt, pp = np.meshgrid(theta, phis, indexing="ij")
    vals = np.abs(monopole_harmonic(mu, l, mprime, tt, pp)) ** 2
    return float(np.sum(w[:, None] * vals) * (2 * math.pi / n_phi))


def harmonic_inner(mu, l, m1, m2, n_theta: int = 200, n_phi: int = 64) -> complex:
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phis = np.linspace(0.0, 2 * math.pi, n_phi, endpoint=False)
    tt, pp = np.meshgrid(theta, phis, indexing="ij")
    vals = np.conj(monopole_harmonic(mu, l, m1, tt, pp)) * monopole_harmonic(mu, l, m2, tt, pp)
    return complex(np.sum(w[:, None] * vals) * (2 * math.pi / n_phi))


def kummer_ode_residual(N: int, b, x, h=1e-5, exact: bool = True):
    """Relative residual of x y'' + (b - x) y' + N y = 0 with central differences.

    In float64 the polynomial loses several digits to cancellation near
    x = 10, which swamps an h = 1e-5 second difference; ``exact=True``
    evaluates the stencil in rational arithmetic so only truncation remains.
    """
    from .specfun import kummer_poly

    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    for i, xv in enumerate(xs):
        if exact:
            X, H, B = Fraction(float(xv)), Fraction(h), Fraction(b)
        else:
            X, H, B = float(xv), float(h), float(b)
        y = kummer_poly(N, B, X)
        yp = kummer_poly(N, B, X + H)
        ym = kummer_poly(N, B, X - H)
        d1 = (yp - ym) / (2 * H)
        d2 = (yp - 2 * y + ym) / (H * H)
        terms = [X * d2, (B - X) * d1, N * y]
        scale = max(abs(t) for t in terms)
        out[i] = float(abs(sum(terms)) / scale) if scale else 0.0
    return out if np.ndim(x) else out[0]
