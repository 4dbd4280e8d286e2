"""Circuit and eigenmode models of magnetically coupled resonator arrays."""

from mrcarray._backend import BACKEND
from mrcarray.analysis import (
    damping_study,
    detect_peaks,
    find_peaks,
    fit_coupling,
    match_peaks_to_modes,
    quality_factors,
)
from mrcarray.eigenmodes import classify_modes, solve_modes
from mrcarray.errors import ArrayValidationError, EmptySpectrum, NumericalError
from mrcarray.model import (
    ArrayModel,
    CoilCircuit,
    FrequencyGrid,
    build_close_packed,
    build_linear_chain,
    identical_coils,
    mutual_inductance_matrix,
    natural_frequencies,
    validate_array,
)
from mrcarray.sweep import DriveSpec, sweep
from mrcarray.twocoil import (
    dispersion_curve,
    estimate_k_from_split,
    identical_coupled_frequencies,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ArrayModel",
    "ArrayValidationError",
    "CoilCircuit",
    "DriveSpec",
    "EmptySpectrum",
    "FrequencyGrid",
    "NumericalError",
    "build_close_packed",
    "build_linear_chain",
    "classify_modes",
    "damping_study",
    "detect_peaks",
    "dispersion_curve",
    "estimate_k_from_split",
    "find_peaks",
    "fit_coupling",
    "identical_coils",
    "identical_coupled_frequencies",
    "match_peaks_to_modes",
    "mutual_inductance_matrix",
    "natural_frequencies",
    "quality_factors",
    "solve_modes",
    "sweep",
    "validate_array",
]
