"""Closed-form analytics for a pair of coupled resonators.

Branch naming: ``omega_minus`` is always the upper branch (it carries the
``1 - k`` denominator in the identical-coil case), ``omega_plus`` the lower.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from mrcarray.errors import KOutOfRange
from mrcarray.model import ArrayModel, CoilCircuit, validate_array
from mrcarray.sweep import DriveSpec, sweep

DEFAULT_DIP_FACTOR = 0.9


def _check_k(k):
    if not (0.0 <= k < 1.0):
        raise KOutOfRange(f"k must lie in [0, 1), got {k}")


@dataclass(frozen=True)
class SplitPair:
    """Coupled resonant angular frequencies (rad/s)."""

    omega_plus: float
    omega_minus: float

    @property
    def f_plus(self) -> float:
        return self.omega_plus / (2 * math.pi)

    @property
    def f_minus(self) -> float:
        return self.omega_minus / (2 * math.pi)


class RatioBranches(NamedTuple):
    """Coupled frequencies relative to the first coil's natural frequency."""

    r_minus: float  # upper branch
    r_plus: float  # lower branch


def frequency_ratio_branches(omega_ratio: float, k: float) -> RatioBranches:
    """Dimensionless split ``r = w / w1`` for ``omega_ratio = w2 / w1``.

    Roots of ``(1 - k^2) r^4 - (1 + rho^2) r^2 + rho^2 = 0``.
    """
    _check_k(k)
    if not omega_ratio > 0:
        raise ValueError(f"omega_ratio must be positive, got {omega_ratio}")
    rho2 = omega_ratio * omega_ratio
    s = 1.0 + rho2
    disc = math.sqrt(max(s * s - 4.0 * (1.0 - k * k) * rho2, 0.0))
    denom = 2.0 * (1.0 - k * k)
    upper = (s + disc) / denom
    # product of roots is rho^2 / (1 - k^2); avoids cancellation in s - disc
    lower = rho2 / (1.0 - k * k) / upper
    return RatioBranches(math.sqrt(upper), math.sqrt(lower))


def coupled_frequencies_general(coil1: CoilCircuit, coil2: CoilCircuit, k: float) -> SplitPair:
    """Split frequencies of two arbitrary lossless resonators at coupling ``k``."""
    _check_k(k)
    for c in (coil1, coil2):
        if c.inductance <= 0 or c.capacitance <= 0:
            raise ValueError("inductance and capacitance must be positive")
    w1, w2 = coil1.natural_omega, coil2.natural_omega
    rho = w2 / w1
    root = math.sqrt(max(rho**2 + rho**-2 + 4.0 * k * k - 2.0, 0.0))
    pref = 0.5 * w1 * w1 / (1.0 - k * k)
    upper2 = pref * (1.0 + rho**2 * (1.0 + root / rho))
    lower2 = pref * (1.0 + rho**2 * (1.0 - root / rho))
    return SplitPair(omega_plus=math.sqrt(lower2), omega_minus=math.sqrt(upper2))


def identical_coupled_frequencies(L: float, C: float, k: float) -> SplitPair:
    _check_k(k)
    return SplitPair(
        omega_plus=1.0 / math.sqrt(L * C * (1.0 + k)),
        omega_minus=1.0 / math.sqrt(L * C * (1.0 - k)),
    )


def estimate_k_from_split(pair: SplitPair) -> float:
    """Coupling from the two split frequencies of identical resonators.

    Works equally with angular or ordinary frequencies. Equal inputs give 0.
    """
    lo, hi = pair.omega_plus, pair.omega_minus
    if not (lo > 0 and hi > 0):
        raise ValueError("split frequencies must be positive")
    hi2, lo2 = hi * hi, lo * lo
    return (hi2 - lo2) / (hi2 + lo2)


@dataclass(frozen=True, eq=False)
class DispersionCurve:
    k_values: np.ndarray
    upper_branch: np.ndarray  # Hz
    lower_branch: np.ndarray  # Hz
    resolvable: np.ndarray


def is_resolvable(
    model: ArrayModel,
    f_lower: float,
    f_upper: float,
    *,
    dip_factor: float = DEFAULT_DIP_FACTOR,
    points: int = 2001,
) -> bool:
    """Whether coil 0's |Z0| shows two separate peaks around the given branches.

    Requires a local minimum between ``f_lower`` and ``f_upper`` no higher than
    ``dip_factor`` times the smaller of the maxima on either side of it.
    """
    if not f_upper > f_lower:
        return False
    v = validate_array(model)
    f0 = 0.5 * (f_lower + f_upper)
    c0 = v.coils[0]
    q = c0.natural_omega * c0.inductance / c0.resistance if c0.resistance > 0 else math.inf
    pad = max(f_upper - f_lower, 4.0 * f0 / q)
    f = np.linspace(max(f_lower - pad, 0.05 * f_lower), f_upper + pad, points)
    mag = np.abs(sweep(v, DriveSpec(0), frequencies=f).input_impedance)
    if np.any(~np.isfinite(mag)):
        f, mag = f[np.isfinite(mag)], mag[np.isfinite(mag)]
    inside = np.flatnonzero((f >= f_lower) & (f <= f_upper))
    if inside.size == 0:
        return False
    i_min = inside[np.argmin(mag[inside])]
    if i_min == 0 or i_min == mag.size - 1:
        return False
    if not (mag[i_min] < mag[i_min - 1] and mag[i_min] < mag[i_min + 1]):
        return False
    i_left = int(np.argmax(mag[:i_min]))
    i_right = i_min + 1 + int(np.argmax(mag[i_min + 1 :]))
    if i_left == 0 or i_right == mag.size - 1:
        return False
    return bool(mag[i_min] <= dip_factor * min(mag[i_left], mag[i_right]))


def dispersion_curve(
    L: float,
    C: float,
    R: float,
    k_max: float,
    steps: int,
    *,
    dip_factor: float = DEFAULT_DIP_FACTOR,
    points: int = 2001,
) -> DispersionCurve:
    """Identical-pair branches on ``linspace(0, k_max, steps)`` plus resolvability."""
    if not (0.0 < k_max < 1.0):
        raise KOutOfRange(f"k_max must lie in (0, 1), got {k_max}")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    ks = np.linspace(0.0, k_max, steps)
    upper, lower, ok = np.empty(steps), np.empty(steps), np.zeros(steps, dtype=bool)
    coil = CoilCircuit(L, C, R)
    for i, k in enumerate(ks):
        pair = identical_coupled_frequencies(L, C, float(k))
        upper[i], lower[i] = pair.f_minus, pair.f_plus
        if k > 0:
            model = ArrayModel((coil, coil), [[1.0, k], [k, 1.0]])
            ok[i] = is_resolvable(model, lower[i], upper[i], dip_factor=dip_factor, points=points)
    return DispersionCurve(ks, upper, lower, ok)
