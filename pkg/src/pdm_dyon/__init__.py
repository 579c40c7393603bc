"""Mass profiles mapping a spin-1/2 charge-dyon bound state onto a PDM Pauli system."""

from .pdm_core import (
    MUSTAFA_MAZHARIMOUSAVI,
    ZHU_KROEMER,
    MappingParams,
    OrderingParams,
    SpinBranch,
    angular_coefficient,
    effective_potential,
    mapping_condition_check,
    mapping_rhs,
)
from .specfun import HalfInt, jacobi_poly, kummer_poly, monopole_harmonic
from .target_system import QuantumNumbers, energy_level, psi3, radial_f3, wavenumber

__version__ = "0.1.0"
