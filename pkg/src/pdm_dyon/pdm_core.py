"""Position-dependent-mass side of the mapping.

The mass profile M(r) must satisfy, on the cone theta = theta0,

    M'' + 2M'/r - 3M'^2/(2M) + 2(F'/F)M' + A M/r^2 + 4 m0 eQ M/r
        = 2M(M - 2 m0) E_N

where A collects the angular terms of the spinor branch.  ``mapping_rhs``
returns that equation solved for M''.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import HalfInt
from .target_system import QuantumNumbers, energy_level, radial_logderiv


class MassSingularityError(ArithmeticError):
    """M reached zero or went negative; the 1/M terms are undefined."""

    def __init__(self, r: float, mass: float):
        super().__init__(f"mass {mass!r} is not positive at r = {r!r}")
        self.r = r
        self.mass = mass


@dataclass(frozen=True)
class OrderingParams:
    """von Roos ambiguity exponents with a + b + c = -1."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if abs(self.a + self.b + self.c + 1.0) > 1e-12:
            raise ValueError(
                f"ordering exponents must sum to -1, got {self.a} + {self.b} + {self.c}"
            )

    @property
    def laplacian_coefficient(self) -> float:
        return (self.b + 1.0) / 2.0

    @property
    def gradient_coefficient(self) -> float:
        return self.a * (self.a + self.b + 1.0) + self.b + 1.0


ZHU_KROEMER = OrderingParams(-0.5, 0.0, -0.5)
MUSTAFA_MAZHARIMOUSAVI = OrderingParams(-0.25, -0.5, -0.25)

ORDERINGS = {
    "zhu-kroemer": ZHU_KROEMER,
    "mustafa-mazharimousavi": MUSTAFA_MAZHARIMOUSAVI,
}


def effective_potential(M, dM, d2M, r, ordering: OrderingParams = ZHU_KROEMER):
    """U_eff for a radial mass profile; the Laplacian is M'' + 2M'/r.

    Accepts scalars or broadcastable arrays.
    """
    if np.any(np.asarray(M) <= 0):
        raise ValueError(f"effective potential needs a positive mass, got {M}")
    if np.any(np.asarray(r) <= 0):
        raise ValueError("r must be positive")
    lap = d2M + 2.0 * dM / r
    return (
        ordering.laplacian_coefficient * lap / M**2
        - ordering.gradient_coefficient * dM**2 / M**3
    )


class SpinBranch(enum.Enum):
    UP = -1
    DOWN = 1

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class MappingParams:
    q: QuantumNumbers
    theta0: float = math.pi / 6
    ordering: OrderingParams = ZHU_KROEMER
    sigma_r_eigenvalue: int = 1
    # -1 keeps eQ = n alpha as printed; +1 swaps in the attractive |eQ|
    radial_sign: int = -1
    condition: tuple[bool, float] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.theta0 < math.pi or math.sin(self.theta0) == 0.0:
            raise ValueError(f"theta0 must lie strictly inside (0, pi), got {self.theta0}")
        if self.sigma_r_eigenvalue not in (1, -1):
            raise ValueError("sigma_r_eigenvalue must be +1 or -1")
        if self.radial_sign not in (1, -1):
            raise ValueError("radial_sign must be +1 or -1")
        object.__setattr__(self, "condition", mapping_condition_check(self.q.mu, self.q.m))

    @property
    def coulomb_charge(self) -> float:
        """The eQ that enters the Coulomb term."""
        if self.radial_sign == -1:
            return self.q.eQ
        return abs(self.q.eQ)


def angular_factor(q: QuantumNumbers, branch: SpinBranch) -> float:
    """mu + m -/+ 1/2 for the upper/lower branch."""
    return float(q.mu + q.m + HalfInt(branch.value))


def angular_coefficient(q: QuantumNumbers, theta0: float, branch: SpinBranch,
                        sigma_r_eigenvalue: int = 1) -> float:
    s2 = math.sin(theta0) ** 2
    if s2 == 0.0 or not 0.0 < theta0 < math.pi:
        raise ValueError("theta0 must lie strictly inside (0, pi)")
    mu = float(q.mu)
    one_minus_cos = 1.0 - math.cos(theta0)
    return (
        4.0 * mu * angular_factor(q, branch) * one_minus_cos / s2
        - 2.0 * sigma_r_eigenvalue * mu
        - 2.0 * mu**2 * one_minus_cos**2 / s2
    )


def mapping_rhs(r: float, M: float, dM: float, params: MappingParams,
                branch: SpinBranch) -> float:
    if M <= 0:
        raise MassSingularityError(r, M)
    q = params.q
    A = angular_coefficient(q, params.theta0, branch, params.sigma_r_eigenvalue)
    logd = radial_logderiv(r, q)
    e_n = energy_level(q)
    return (
        -2.0 * dM / r
        + 1.5 * dM * dM / M
        - 2.0 * logd * dM
        - A * M / r**2
        - 4.0 * q.m0 * params.coulomb_charge * M / r
        + 2.0 * M * (M - 2.0 * q.m0) * e_n
    )


def mapping_terms(r: float, M: float, dM: float, d2M: float, params: MappingParams,
                  branch: SpinBranch) -> tuple[float, ...]:
    """Individual terms of the mapping equation moved to one side (sum = 0)."""
    q = params.q
    A = angular_coefficient(q, params.theta0, branch, params.sigma_r_eigenvalue)
    return (
        d2M,
        2.0 * dM / r,
        -1.5 * dM * dM / M,
        2.0 * radial_logderiv(r, q) * dM,
        A * M / r**2,
        4.0 * q.m0 * params.coulomb_charge * M / r,
        -2.0 * M * (M - 2.0 * q.m0) * energy_level(q),
    )


def mapping_condition_check(mu, m) -> tuple[bool, float]:
    """Whether 10 <= |mu + m| <= 20, and the distance to the nearest edge."""
    total = abs(float(HalfInt.of(mu) + HalfInt.of(m)))
    margin = min(abs(total - 10.0), abs(total - 20.0))
    return 10.0 <= total <= 20.0, margin
