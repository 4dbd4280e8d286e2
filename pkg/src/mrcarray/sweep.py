"""Driven-array frequency response from the full coupled loop equations.

The measured element is a parallel LC: its coil branch (``R + j w L``) sits in
parallel with its capacitor and is fed by a unit current source. Every other
element is a passive series RLC loop. Element indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mrcarray import _backend
from mrcarray.errors import SingularAtFrequency
from mrcarray.model import ArrayModel, CoilCircuit, FrequencyGrid, as_validated, mutual_inductance_matrix

# Relative pivot threshold below which the passive subsystem counts as singular.
PIVOT_TOL = 1e-12
# Relative threshold on the parallel-combination denominator (lossless pole).
POLE_TOL = 1e-12


@dataclass(frozen=True)
class DriveSpec:
    driven: int
    grid: FrequencyGrid | None = None


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Response over a frequency grid for one driven element.

    ``element_currents`` and ``element_voltages`` have shape (N, points) and are
    normalised to a 1 A source, so ``element_voltages[driven]`` equals
    ``input_impedance``. ``singular`` flags lossless poles (values are NaN).
    """

    frequencies: np.ndarray
    input_impedance: np.ndarray
    element_currents: np.ndarray
    element_voltages: np.ndarray
    singular: np.ndarray
    driven: int

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.input_impedance)


def passive_impedance(coil: CoilCircuit, omega: float) -> complex:
    """Series RLC loop impedance ``R + 1/(j w C) + j w L``."""
    return coil.resistance + 1.0 / (1j * omega * coil.capacitance) + 1j * omega * coil.inductance


def _check_drive(model, driven):
    if not (0 <= driven < model.n):
        raise IndexError(f"driven element {driven} out of range for {model.n} coils")


def assemble_system(model: ArrayModel, driven: int, omega: float) -> np.ndarray:
    """Loop-impedance matrix ``Z`` with ``Z @ I = V_d * e_driven``.

    Off-diagonals are ``j w M``; the driven diagonal omits the (parallel)
    capacitor, passive diagonals include their series capacitor.
    """
    v = as_validated(model)
    _check_drive(v, driven)
    z = 1j * omega * mutual_inductance_matrix(v).astype(complex)
    z[np.diag_indices(v.n)] += v.resistance + 1.0 / (1j * omega * v.capacitance)
    z[driven, driven] = v.resistance[driven] + 1j * omega * v.inductance[driven]
    return z


def _kernel_call(v, driven, omegas, backend):
    kernel = _backend.get_kernel(backend)
    return kernel(
        np.ascontiguousarray(mutual_inductance_matrix(v)),
        np.ascontiguousarray(v.resistance, dtype=float),
        np.ascontiguousarray(v.capacitance, dtype=float),
        int(driven),
        np.ascontiguousarray(omegas, dtype=float),
        PIVOT_TOL,
    )


def solve_at(model: ArrayModel, driven: int, omega: float, *, backend=None):
    """Coil-branch impedance and loop currents for 1 A in the driven coil.

    Returns ``(z_coil, currents)`` where ``z_coil = V_d / I_d``.
    """
    v = as_validated(model)
    _check_drive(v, driven)
    zc, cur, status = _kernel_call(v, driven, np.array([omega], dtype=float), backend)
    if status[0]:
        raise SingularAtFrequency(f"passive subsystem singular at omega={omega}", omega)
    return complex(zc[0]), cur[0].copy()


def _parallel_with_cap(z_coil, omegas, cap):
    denom = 1.0 + 1j * omegas * cap * z_coil
    pole = np.abs(denom) <= POLE_TOL * np.maximum(1.0, np.abs(1j * omegas * cap * z_coil))
    with np.errstate(divide="ignore", invalid="ignore"):
        z0 = z_coil / np.where(pole, np.nan, denom)
    return z0, pole


def input_impedance(model: ArrayModel, driven: int, omega: float, *, backend=None) -> complex:
    """Impedance across the driven element's parallel LC at one frequency."""
    v = as_validated(model)
    zc, _ = solve_at(v, driven, omega, backend=backend)
    z0, pole = _parallel_with_cap(np.array([zc]), np.array([omega]), v.capacitance[driven])
    if pole[0]:
        raise SingularAtFrequency(f"lossless resonance at omega={omega}", omega)
    return complex(z0[0])


def sweep(model: ArrayModel, drive: DriveSpec, *, frequencies=None, backend=None) -> SweepResult:
    """Evaluate the driven response over ``drive.grid``.

    ``frequencies`` (Hz) overrides the grid when given. Singular points are
    flagged per-point rather than raised.
    """
    v = as_validated(model)
    d = drive.driven
    _check_drive(v, d)
    if frequencies is None:
        if drive.grid is None:
            raise ValueError("sweep needs either drive.grid or explicit frequencies")
        frequencies = drive.grid.values()
    f = np.atleast_1d(np.asarray(frequencies, dtype=float))
    omegas = 2.0 * np.pi * f
    zc, cur, status = _kernel_call(v, d, omegas, backend)
    z0, pole = _parallel_with_cap(zc, omegas, v.capacitance[d])
    singular = (status != 0) | pole

    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(singular, np.nan, z0 / zc)
        # zc == 0 only for a shorted lossless coil branch; then all source current
        # flows in the coil.
        scale = np.where(zc == 0, 1.0, scale)
        currents = cur * scale[:, None]
    m = mutual_inductance_matrix(v)
    volts = currents * v.resistance[None, :] + 1j * omegas[:, None] * (currents @ m)
    return SweepResult(
        frequencies=f,
        input_impedance=z0,
        element_currents=currents.T.copy(),
        element_voltages=volts.T.copy(),
        singular=singular,
        driven=d,
    )


def transfer_impedance(model: ArrayModel, source: int, target: int, omega: float, *, backend=None) -> complex:
    """Voltage on ``target`` per amp injected at ``source`` (all else passive)."""
    res = sweep(model, DriveSpec(source), frequencies=[omega / (2 * np.pi)], backend=backend)
    return complex(res.element_voltages[target, 0])
