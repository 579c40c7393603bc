"""Adaptive integration of the second-order mapping equation.

``integrate_ivp`` is a Dormand-Prince 5(4) integrator with PI step-size
control working on the first-order system (M, M').  Each accepted step keeps
(M, M', M'') at both ends, which defines a quintic Hermite interpolant; that
is the dense output of a :class:`MassProfile`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .pdm_core import MappingParams, MassSingularityError, SpinBranch, effective_potential, mapping_rhs
from .target_system import RadialNodeError

Rhs = Callable[[float, float, float], float]

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6] + (0.0,)
_B_HAT = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b - bh for b, bh in zip(_B, _B_HAT))

# PI controller constants (Hairer-Wanner DOPRI5 defaults)
_SAFETY = 0.9
_BETA = 0.04
_EXPO1 = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0


class Termination(enum.Enum):
    REACHED_END = "reached_end"
    BLOW_UP = "blow_up"
    MASS_VANISHED = "mass_vanished"
    STEP_UNDERFLOW = "step_underflow"
    RADIAL_NODE = "radial_node"


@dataclass(frozen=True)
class TerminationReason:
    kind: Termination
    r_event: float | None = None

    @property
    def completed(self) -> bool:
        return self.kind is Termination.REACHED_END

    def __str__(self):
        if self.r_event is None:
            return self.kind.value
        return f"{self.kind.value}@{self.r_event:.10g}"


def _hermite_eval(x0, x1, y0, y1, order=0, x=None):
    """Quintic Hermite through (M, M', M'') at x0 and x1, evaluated at x."""
    h = x1 - x0
    t = (x - x0) / h
    f0, d0, s0 = y0
    f1, d1, s1 = y1
    t2, t3 = t * t, t * t * t
    if order == 0:
        h00 = 1 - 10 * t3 + 15 * t3 * t - 6 * t3 * t2
        h10 = t - 6 * t3 + 8 * t3 * t - 3 * t3 * t2
        h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t3 * t - 0.5 * t3 * t2
        h01 = 10 * t3 - 15 * t3 * t + 6 * t3 * t2
        h11 = -4 * t3 + 7 * t3 * t - 3 * t3 * t2
        h21 = 0.5 * t3 - t3 * t + 0.5 * t3 * t2
        return f0 * h00 + h * d0 * h10 + h * h * s0 * h20 + f1 * h01 + h * d1 * h11 + h * h * s1 * h21
    if order == 1:
        h00 = -30 * t2 + 60 * t3 - 30 * t3 * t
        h10 = 1 - 18 * t2 + 32 * t3 - 15 * t3 * t
        h20 = t - 4.5 * t2 + 6 * t3 - 2.5 * t3 * t
        h01 = 30 * t2 - 60 * t3 + 30 * t3 * t
        h11 = -12 * t2 + 28 * t3 - 15 * t3 * t
        h21 = 1.5 * t2 - 4 * t3 + 2.5 * t3 * t
        return (f0 * h00 + f1 * h01) / h + d0 * h10 + d1 * h11 + h * (s0 * h20 + s1 * h21)
    h00 = -60 * t + 180 * t2 - 120 * t3
    h10 = -36 * t + 96 * t2 - 60 * t3
    h20 = 1 - 9 * t + 18 * t2 - 10 * t3
    h01 = 60 * t - 180 * t2 + 120 * t3
    h11 = -24 * t + 84 * t2 - 60 * t3
    h21 = 3 * t - 12 * t2 + 10 * t3
    return (f0 * h00 + f1 * h01) / (h * h) + (d0 * h10 + d1 * h11) / h + s0 * h20 + s1 * h21


@dataclass(frozen=True, eq=False)
class MassProfile:
    """A solved mass distribution, immutable once built.

    ``r``, ``M``, ``dM`` and ``d2M`` are node arrays sorted by increasing r;
    consecutive nodes bound one integration step.
    """

    r: np.ndarray
    M: np.ndarray
    dM: np.ndarray
    d2M: np.ndarray
    termination: TerminationReason
    err_estimate: float = 0.0

    def __post_init__(self):
        for name in ("r", "M", "dM", "d2M"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if len(self.r) >= 2 and not np.all(np.diff(self.r) > 0):
            raise ValueError("profile nodes must be strictly increasing in r")

    @property
    def span(self) -> tuple[float, float]:
        return float(self.r[0]), float(self.r[-1])

    @property
    def nodes(self):
        return list(zip(self.r.tolist(), self.M.tolist(), self.dM.tolist()))

    def covers(self, lo: float, hi: float) -> bool:
        a, b = self.span
        return a <= lo and hi <= b

    def evaluate(self, r):
        """Return (M, M', M'') at r (scalar or array) from the dense output."""
        r_arr = np.asarray(r, dtype=float)
        lo, hi = self.span
        if np.any((r_arr < lo) | (r_arr > hi)):
            raise ValueError(f"r outside profile span [{lo}, {hi}]")
        if len(self.r) == 1:
            shape = r_arr.shape
            return (np.full(shape, self.M[0])[()], np.full(shape, self.dM[0])[()],
                    np.full(shape, self.d2M[0])[()])
        idx = np.clip(np.searchsorted(self.r, r_arr, side="right") - 1, 0, len(self.r) - 2)
        x0, x1 = self.r[idx], self.r[idx + 1]
        y0 = (self.M[idx], self.dM[idx], self.d2M[idx])
        y1 = (self.M[idx + 1], self.dM[idx + 1], self.d2M[idx + 1])
        out = tuple(_hermite_eval(x0, x1, y0, y1, order, r_arr) for order in range(3))
        return tuple(o[()] if np.ndim(o) == 0 else o for o in out)

    def mass(self, r):
        return self.evaluate(r)[0]


def _error_norm(err, y0, y1, rel_tol, abs_tol):
    scale = abs_tol + rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return math.sqrt(float(np.mean((err / scale) ** 2)))


class _StageFailure(Exception):
    def __init__(self, cause):
        self.cause = cause


def _f(rhs, r, y):
    try:
        d2 = rhs(r, y[0], y[1])
    except (RadialNodeError, MassSingularityError, ZeroDivisionError, OverflowError) as exc:
        raise _StageFailure(exc) from exc
    if not math.isfinite(d2):
        raise _StageFailure(OverflowError(f"non-finite M'' at r = {r}"))
    return np.array([y[1], d2])


def _dp_step(rhs, r, y, k1, h):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
        ks.append(_f(rhs, r + _C[i] * h, yi))
    y_new = y + h * sum(b * k for b, k in zip(_B, ks) if b)
    err = h * sum(e * k for e, k in zip(_E, ks) if e)
    # stage 7 sits at r + h with y_new (FSAL)
    return y_new, err, ks[6]


def _bisect_event(x0, x1, y0, y1, g, tol=1e-10):
    """Locate g(r) = 0 on the Hermite interpolant of one step."""
    lo, hi = x0, x1
    g_lo = g(_hermite_eval(x0, x1, y0, y1, 0, lo))
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        g_mid = g(_hermite_eval(x0, x1, y0, y1, 0, mid))
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return hi


def integrate_ivp(rhs: Rhs, r_start: float, M0: float, dM0: float, r_end: float,
                  rel_tol: float = 1e-10, abs_tol: float = 1e-12,
                  blowup_threshold: float = 1e6, mass_floor: float | None = 1e-8,
                  singular_points: Sequence[float] = (), max_steps: int = 200_000) -> MassProfile:
    """Integrate M'' = rhs(r, M, M') from r_start toward r_end.

    Stops early on |M| >= blowup_threshold, M <= mass_floor (``None``
    disables the floor), step underflow, or a singular point of the rhs.
    ``singular_points`` are radii the integration must not cross; reaching
    one ends the run with ``RADIAL_NODE``.
    """
    if r_start == r_end:
        raise ValueError("r_start and r_end must differ")
    if not (rel_tol > 0 and abs_tol > 0):
        raise ValueError("tolerances must be positive")
    if mass_floor is not None and M0 <= mass_floor:
        raise ValueError(f"initial mass {M0} is not above the floor {mass_floor}")

    direction = 1.0 if r_end > r_start else -1.0
    target = r_end
    barrier = None
    for p in singular_points:
        if (p - r_start) * direction > 0 and (p - target) * direction < 0:
            target, barrier = p, p
    # stop short of a singular point; the rhs is not defined on it
    if barrier is not None:
        target = barrier - direction * 1e-9 * max(1.0, abs(barrier))

    rs, ys, d2s = [r_start], [np.array([M0, dM0], dtype=float)], []
    r = r_start
    y = ys[0]

    def finish(kind, r_event=None, err=0.0):
        arr_r = np.array(rs)
        arr = np.array(ys)
        order = np.argsort(arr_r)
        return MassProfile(arr_r[order], arr[order, 0], arr[order, 1], np.array(d2s)[order],
                           TerminationReason(kind, r_event), err)

    try:
        k_cur = _f(rhs, r, y)
    except _StageFailure as exc:
        raise ValueError(f"rhs cannot be evaluated at the initial point: {exc.cause}") from exc.cause
    d2s.append(k_cur[1])

    h = direction * 1e-4 * abs(r_end - r_start)
    facold = 1e-4
    max_err = 0.0
    for _ in range(max_steps):
        remaining = target - r
        if remaining * direction <= 0:
            break
        if abs(h) > abs(remaining):
            h = remaining
        if abs(h) < 1e-14 * max(abs(r), 1e-300):
            near_node = barrier is not None and abs(r - barrier) < 1e-6 * max(1.0, abs(barrier))
            return finish(Termination.RADIAL_NODE if near_node else Termination.STEP_UNDERFLOW,
                          r, max_err)
        try:
            y_new, err_vec, k_new = _dp_step(rhs, r, y, k_cur, h)
        except _StageFailure as exc:
            if isinstance(exc.cause, RadialNodeError) and abs(h) < 1e-12 * max(abs(r), 1.0):
                return finish(Termination.RADIAL_NODE, exc.cause.r, max_err)
            h *= 0.5
            continue
        err = _error_norm(err_vec, y, y_new, rel_tol, abs_tol)
        if not math.isfinite(err):
            h *= 0.5
            continue
        fac11 = err**_EXPO1 if err > 0 else 0.0
        if err <= 1.0:
            fac = fac11 / facold**_BETA
            fac = min(1.0 / _FAC_MIN, max(1.0 / _FAC_MAX, fac / _SAFETY))
            facold = max(err, 1e-4)
            r_new = r + h
            if abs(target - r_new) <= 1e-13 * max(abs(target), 1.0):
                r_new = target
            max_err = max(max_err, float(np.max(np.abs(err_vec))))
            y0 = (y[0], y[1], k_cur[1])
            y1 = (y_new[0], y_new[1], k_new[1])
            event = None
            if abs(y_new[0]) >= blowup_threshold:
                event = (Termination.BLOW_UP, lambda M: abs(M) - blowup_threshold)
            elif mass_floor is not None and y_new[0] <= mass_floor:
                event = (Termination.MASS_VANISHED, lambda M: M - mass_floor)
            if event is not None:
                r_ev = _bisect_event(r, r_new, y0, y1, event[1])
                rs.append(r_new)
                ys.append(y_new)
                d2s.append(k_new[1])
                return finish(event[0], r_ev, max_err)
            rs.append(r_new)
            ys.append(y_new)
            d2s.append(k_new[1])
            r, y, k_cur = r_new, y_new, k_new
            h = h / fac
        else:
            h = h / min(1.0 / _FAC_MIN, fac11 / _SAFETY)
    else:
        return finish(Termination.STEP_UNDERFLOW, r, max_err)

    if barrier is not None:
        return finish(Termination.RADIAL_NODE, barrier, max_err)
    return finish(Termination.REACHED_END, None, max_err)


def stitch(backward: MassProfile, forward: MassProfile) -> MassProfile:
    """Join a backward and a forward solve that share their starting node."""
    b_end = backward.r[-1]
    f_start = forward.r[0]
    if b_end != f_start:
        raise ValueError("profiles do not share a starting node")
    cat = lambda a, b: np.concatenate([a[:-1], b])  # noqa: E731
    return MassProfile(cat(backward.r, forward.r), cat(backward.M, forward.M),
                       cat(backward.dM, forward.dM), cat(backward.d2M, forward.d2M),
                       forward.termination, max(backward.err_estimate, forward.err_estimate))


@dataclass(frozen=True, eq=False)
class BranchResult:
    branch: SpinBranch
    profile: MassProfile
    u_eff_samples: list
    residual: object
    termination: TerminationReason
    backward_termination: TerminationReason
    forward_span: tuple = field(default=(0.0, 0.0))

    def covers(self, lo: float, hi: float) -> bool:
        return self.profile.covers(lo, hi)


def kummer_nodes(params: MappingParams) -> list[float]:
    """Positive radii where the radial function vanishes."""
    from .specfun import _kummer_coeffs
    from .target_system import wavenumber

    q = params.q
    k = wavenumber(q)
    if q.N == 0 or k == 0.0:
        return []
    roots = np.roots(_kummer_coeffs(q.N, 2.0)[::-1])
    real = sorted(float(x.real) / (2.0 * k) for x in roots if abs(x.imag) < 1e-9 and x.real > 0)
    return real


def branch_rhs(params: MappingParams, branch: SpinBranch) -> Rhs:
    return lambda r, M, dM: mapping_rhs(r, M, dM, params, branch)


def solve_branch(params: MappingParams, branch: SpinBranch, scenario,
                 residual_samples: int = 200, potential_samples: int = 200) -> BranchResult:
    """Solve one spin branch forward to r_max and backward to r_min, then stitch."""
    from .verification import ode_residual

    rhs = branch_rhs(params, branch)
    nodes = kummer_nodes(params)
    common = dict(rel_tol=scenario.rel_tol, abs_tol=scenario.abs_tol,
                  blowup_threshold=scenario.blowup_threshold, mass_floor=scenario.mass_floor,
                  singular_points=nodes)
    fwd = integrate_ivp(rhs, scenario.r_i, scenario.M_i, scenario.dM_i, scenario.r_max, **common)
    bwd = integrate_ivp(rhs, scenario.r_i, scenario.M_i, scenario.dM_i, scenario.r_min, **common)
    profile = stitch(bwd, fwd)

    lo, hi = fwd.span
    u_samples = []
    for r in np.linspace(lo, hi, potential_samples):
        M, dM, d2M = profile.evaluate(r)
        u_samples.append((float(r), float(effective_potential(M, dM, d2M, r, params.ordering))))
    residual = ode_residual(profile, params, branch, residual_samples)
    return BranchResult(branch, profile, u_samples, residual, fwd.termination, bwd.termination,
                        (float(lo), float(hi)))
