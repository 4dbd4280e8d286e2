"""Lumped-element data model for coupled resonator arrays.

All quantities are SI (henries, farads, ohms, rad/s); hertz only appear in
the helpers that are explicitly named ``*_frequencies`` or in
:class:`FrequencyGrid`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from mrcarray.errors import (
    CouplingOutOfRange,
    DiagonalNotUnity,
    DimensionMismatch,
    KOutOfRange,
    NonPositiveComponent,
    NonSymmetricCoupling,
    NotPositiveDefinite,
)

# Absolute tolerance for symmetry / unit-diagonal checks on K.
COUPLING_ATOL = 1e-12


@dataclass(frozen=True)
class CoilCircuit:
    """One resonator: coil inductance, tuning capacitance, series resistance."""

    inductance: float
    capacitance: float
    resistance: float = 0.0

    @property
    def natural_omega(self) -> float:
        return 1.0 / math.sqrt(self.inductance * self.capacitance)

    @property
    def natural_frequency(self) -> float:
        return self.natural_omega / (2.0 * math.pi)


def identical_coils(n: int, inductance: float, capacitance: float, resistance: float = 0.0):
    return tuple(CoilCircuit(inductance, capacitance, resistance) for _ in range(n))


def _readonly(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ArrayModel:
    """Ordered coils plus the dimensionless coupling-coefficient matrix ``K``.

    Construction does not validate; pass the model through
    :func:`validate_array` (every solver does this implicitly).
    """

    coils: tuple[CoilCircuit, ...]
    coupling: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coils", tuple(self.coils))
        object.__setattr__(self, "coupling", _readonly(np.atleast_2d(self.coupling)))

    @property
    def n(self) -> int:
        return len(self.coils)


@dataclass(frozen=True, eq=False)
class ValidatedArray(ArrayModel):
    """An :class:`ArrayModel` whose invariants have been checked.

    Exposes the per-coil parameters as read-only vectors.
    """

    inductance: np.ndarray = field(init=False, repr=False)
    capacitance: np.ndarray = field(init=False, repr=False)
    resistance: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "inductance", _readonly([c.inductance for c in self.coils]))
        object.__setattr__(self, "capacitance", _readonly([c.capacitance for c in self.coils]))
        object.__setattr__(self, "resistance", _readonly([c.resistance for c in self.coils]))

    def with_resistance(self, resistance) -> "ValidatedArray":
        """Copy with every coil's resistance replaced (scalar or per-coil)."""
        r = np.broadcast_to(np.asarray(resistance, dtype=float), (self.n,))
        coils = [CoilCircuit(c.inductance, c.capacitance, float(ri)) for c, ri in zip(self.coils, r)]
        return validate_array(ArrayModel(coils, self.coupling))

    def with_coupling(self, coupling) -> "ValidatedArray":
        return validate_array(ArrayModel(self.coils, coupling))


def validate_array(model: ArrayModel) -> ValidatedArray:
    """Check every physical invariant of ``model``.

    Raises one of the :class:`~mrcarray.errors.ArrayValidationError`
    subclasses naming the first violated invariant.
    """
    n = len(model.coils)
    k = np.asarray(model.coupling, dtype=float)
    if n < 1:
        raise DimensionMismatch("array needs at least one coil")
    if k.shape != (n, n):
        raise DimensionMismatch(f"coupling matrix has shape {k.shape}, expected ({n}, {n})")

    for i, coil in enumerate(model.coils):
        l, c, r = coil.inductance, coil.capacitance, coil.resistance
        if not all(math.isfinite(v) for v in (l, c, r)):
            raise NonPositiveComponent(f"coil {i}: non-finite component value")
        if l <= 0 or c <= 0:
            raise NonPositiveComponent(f"coil {i}: inductance and capacitance must be > 0")
        if r < 0:
            raise NonPositiveComponent(f"coil {i}: resistance must be >= 0")

    if not np.all(np.isfinite(k)):
        raise CouplingOutOfRange("coupling matrix contains non-finite entries")
    if not np.allclose(k, k.T, rtol=0.0, atol=COUPLING_ATOL):
        i, j = np.unravel_index(np.argmax(np.abs(k - k.T)), k.shape)
        raise NonSymmetricCoupling(f"k[{i},{j}]={k[i, j]} differs from k[{j},{i}]={k[j, i]}")
    if not np.allclose(np.diag(k), 1.0, rtol=0.0, atol=COUPLING_ATOL):
        raise DiagonalNotUnity(f"coupling diagonal must be 1, got {np.diag(k)}")
    off = k[~np.eye(n, dtype=bool)]
    if off.size and np.max(np.abs(off)) >= 1.0:
        raise CouplingOutOfRange(f"|k| must be < 1, got max {np.max(np.abs(off))}")
    try:
        np.linalg.cholesky(0.5 * (k + k.T))
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("coupling matrix is not positive-definite") from None

    coupling = 0.5 * (k + k.T)
    np.fill_diagonal(coupling, 1.0)
    return ValidatedArray(model.coils, coupling)


def as_validated(model: ArrayModel) -> ValidatedArray:
    if isinstance(model, ValidatedArray):
        return model
    return validate_array(model)


def mutual_inductance_matrix(model: ArrayModel) -> np.ndarray:
    """``M[n, m] = k[n, m] * sqrt(L[n] * L[m])``; the diagonal is ``L``."""
    v = as_validated(model)
    sl = np.sqrt(v.inductance)
    m = v.coupling * np.outer(sl, sl)
    return 0.5 * (m + m.T)


def natural_omegas(model: ArrayModel) -> np.ndarray:
    v = as_validated(model)
    return 1.0 / np.sqrt(v.inductance * v.capacitance)


def natural_frequencies(model: ArrayModel) -> np.ndarray:
    """Uncoupled resonance of each coil in Hz. Ignores K and R."""
    return natural_omegas(model) / (2.0 * np.pi)


def _check_k(k: float, name: str = "k"):
    if not (0.0 < k < 1.0):
        raise KOutOfRange(f"{name} must lie in (0, 1), got {k}")


def build_linear_chain(
    coils: Sequence[CoilCircuit], k_nn: float, decay_exponent: float = math.inf
) -> ValidatedArray:
    """Linear array with ``k = k_nn / d**decay_exponent`` at index separation ``d``.

    ``decay_exponent=math.inf`` keeps nearest-neighbour coupling only.
    """
    _check_k(k_nn, "k_nn")
    if not decay_exponent >= 0:
        raise ValueError(f"decay_exponent must be >= 0, got {decay_exponent}")
    n = len(coils)
    d = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(float)
    k = np.zeros((n, n))
    if math.isinf(decay_exponent):
        k[d == 1] = k_nn
    else:
        far = d > 0
        k[far] = k_nn / d[far] ** decay_exponent
    np.fill_diagonal(k, 1.0)
    return validate_array(ArrayModel(coils, k))


def build_close_packed(coils: Sequence[CoilCircuit], k: float) -> ValidatedArray:
    """All-pairs-equal coupling (the N=3 triangle and its generalisation)."""
    _check_k(k)
    n = len(coils)
    mat = np.full((n, n), k)
    np.fill_diagonal(mat, 1.0)
    return validate_array(ArrayModel(coils, mat))


@dataclass(frozen=True)
class FrequencyGrid:
    """Sweep band in hertz."""

    start: float
    stop: float
    points: int = 2000
    spacing: str = "linear"

    def __post_init__(self):
        if not (0 < self.start < self.stop) or not math.isfinite(self.stop):
            raise ValueError(f"need 0 < start < stop, got {self.start}, {self.stop}")
        if int(self.points) != self.points or self.points < 2:
            raise ValueError(f"points must be an integer >= 2, got {self.points}")
        if self.spacing not in ("linear", "logarithmic"):
            raise ValueError(f"spacing must be 'linear' or 'logarithmic', got {self.spacing!r}")

    def values(self) -> np.ndarray:
        if self.spacing == "linear":
            return np.linspace(self.start, self.stop, int(self.points))
        return np.geomspace(self.start, self.stop, int(self.points))

    @classmethod
    def around(cls, frequencies, margin: float = 0.15, points: int = 2000) -> "FrequencyGrid":
        """Linear band from ``(1 - margin) * min`` to ``(1 + margin) * max``."""
        f = np.asarray(frequencies, dtype=float)
        return cls(float(f.min()) * (1 - margin), float(f.max()) * (1 + margin), points)
