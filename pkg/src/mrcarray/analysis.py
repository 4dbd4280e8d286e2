"""Peak extraction, peak-to-mode matching, damping studies and coupling fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.optimize
import scipy.signal

from mrcarray.eigenmodes import DEFAULT_NODE_TOLERANCE, ModeSet, group_visible, predicted_peak_count, solve_modes
from mrcarray.errors import ArrayValidationError, EmptySpectrum, NoBracket, NumericalError, UnmatchedPeak
from mrcarray.model import (
    ArrayModel,
    CoilCircuit,
    FrequencyGrid,
    as_validated,
    build_close_packed,
    build_linear_chain,
    natural_omegas,
)
from mrcarray.sweep import DriveSpec, SweepResult, sweep
from mrcarray.twocoil import SplitPair, estimate_k_from_split

DEFAULT_PROMINENCE_FLOOR = 0.01
DEFAULT_GRID_POINTS = 2000
REFINE_POINTS = 50
REFINE_SPAN_STEPS = 2


@dataclass(frozen=True)
class Peak:
    frequency: float
    magnitude: float
    prominence: float
    index: int  # grid index of the unrefined maximum
    matched_mode: int | None = None
    deviation: float = math.nan  # |f_peak - f_mode| / f_mode


@dataclass(frozen=True)
class PeakList:
    peaks: tuple[Peak, ...] = ()

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    def __getitem__(self, i):
        return self.peaks[i]

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([p.frequency for p in self.peaks])

    @property
    def magnitudes(self) -> np.ndarray:
        return np.array([p.magnitude for p in self.peaks])

    @property
    def prominences(self) -> np.ndarray:
        return np.array([p.prominence for p in self.peaks])

    @property
    def deviations(self) -> np.ndarray:
        return np.array([p.deviation for p in self.peaks])


def _parabolic_vertex(x, y):
    """Vertex of the parabola through three (possibly unevenly spaced) points."""
    x0, x1, x2 = x
    y0, y1, y2 = y
    d0, d2 = x0 - x1, x2 - x1
    s0, s2 = (y0 - y1) / d0, (y2 - y1) / d2
    curv = (s2 - s0) / (d2 - d0)
    if curv >= 0:  # not a maximum; keep the sample
        return x1, y1
    slope = s0 - curv * d0
    dx = -slope / (2 * curv)
    dx = min(max(dx, d0), d2)
    return x1 + dx, y1 + slope * dx + curv * dx * dx


def _finite_spectrum(spectrum: SweepResult):
    ok = np.isfinite(spectrum.input_impedance) & ~spectrum.singular
    f = spectrum.frequencies[ok]
    mag = np.abs(spectrum.input_impedance[ok])
    if f.size < 3:
        raise EmptySpectrum(f"need >= 3 finite spectrum points, got {f.size}")
    return f, mag, np.flatnonzero(ok)


def find_peaks(spectrum: SweepResult, prominence_floor: float = DEFAULT_PROMINENCE_FLOOR) -> PeakList:
    """Local maxima of |Z0| with prominence >= ``prominence_floor * max|Z0|``.

    Each peak is refined by a parabola through log|Z0| at the maximum and its
    two neighbours. Singular (NaN) grid points are dropped first.
    """
    if not (0 < prominence_floor < 1):
        raise ValueError(f"prominence_floor must lie in (0, 1), got {prominence_floor}")
    f, mag, kept = _finite_spectrum(spectrum)
    idx, props = scipy.signal.find_peaks(mag, prominence=prominence_floor * mag.max())
    logm = np.log(np.maximum(mag, np.finfo(float).tiny))
    peaks = []
    for i, prom in zip(idx, props["prominences"]):
        fv, lv = _parabolic_vertex(f[i - 1 : i + 2], logm[i - 1 : i + 2])
        peaks.append(Peak(float(fv), float(np.exp(lv)), float(prom), int(kept[i])))
    return PeakList(tuple(peaks))


def refine_peaks(
    model: ArrayModel,
    spectrum: SweepResult,
    peaks: PeakList,
    *,
    points: int = REFINE_POINTS,
    span_steps: int = REFINE_SPAN_STEPS,
    passes: int = 1,
    backend=None,
) -> PeakList:
    """Re-sample ``points`` frequencies within +-``span_steps`` grid steps of each
    peak and re-interpolate.

    Each further pass zooms in the same way around the previous pass's maximum.
    Prominence is kept from the coarse spectrum.
    """
    f = spectrum.frequencies
    out = []
    for p in peaks:
        i = p.index
        centre = f[i]
        h = max(f[min(i + 1, f.size - 1)] - f[i], f[i] - f[max(i - 1, 0)])
        best = None
        for _ in range(passes):
            fine = np.linspace(centre - span_steps * h, centre + span_steps * h, points)
            mag = np.abs(sweep(model, DriveSpec(spectrum.driven), frequencies=fine, backend=backend).input_impedance)
            j = int(np.nanargmax(mag))
            if not (0 < j < points - 1 and np.all(np.isfinite(mag[j - 1 : j + 2]))):
                break
            best = (fine[j - 1 : j + 2], np.log(mag[j - 1 : j + 2]))
            centre, h = fine[j], fine[1] - fine[0]
        if best is None:
            out.append(p)
            continue
        fv, lv = _parabolic_vertex(*best)
        out.append(replace(p, frequency=float(fv), magnitude=float(np.exp(lv))))
    return PeakList(tuple(out))


def default_grid(model: ArrayModel, points: int = DEFAULT_GRID_POINTS) -> FrequencyGrid:
    """Linear band 15% beyond the outermost eigenfrequencies."""
    return FrequencyGrid.around(solve_modes(model).frequencies, 0.15, points)


def detect_peaks(
    model: ArrayModel,
    driven: int,
    grid: FrequencyGrid | None = None,
    *,
    prominence_floor: float = DEFAULT_PROMINENCE_FLOOR,
    refine: bool = True,
    refine_passes: int = 1,
    backend=None,
):
    """Sweep, find peaks and (optionally) refine them.

    Returns ``(spectrum, peaks)``.
    """
    v = as_validated(model)
    grid = grid or default_grid(v)
    spectrum = sweep(v, DriveSpec(driven, grid), backend=backend)
    peaks = find_peaks(spectrum, prominence_floor)
    if refine:
        peaks = refine_peaks(v, spectrum, peaks, passes=refine_passes, backend=backend)
    return spectrum, peaks


def match_peaks_to_modes(
    peaks: PeakList, modes: ModeSet, drive_index: int, node_tolerance: float = DEFAULT_NODE_TOLERANCE
) -> PeakList:
    """Greedy nearest-frequency assignment of peaks to drive-visible modes.

    A degenerate group counts as a single candidate (its first mode index).
    Raises :class:`UnmatchedPeak` when there are more peaks than candidates.
    """
    candidates = [g[0] for g in modes.degeneracy_groups if group_visible(modes, g, drive_index, node_tolerance)]
    if len(peaks) > len(candidates):
        raise UnmatchedPeak(f"{len(peaks)} peaks but only {len(candidates)} modes visible from element {drive_index}")
    fm = modes.frequencies
    pairs = sorted(
        (abs(p.frequency - fm[m]) / fm[m], i, m) for i, p in enumerate(peaks) for m in candidates
    )
    used_p, used_m, assign = set(), set(), {}
    for dev, i, m in pairs:
        if i in used_p or m in used_m:
            continue
        assign[i] = (m, dev)
        used_p.add(i)
        used_m.add(m)
    return PeakList(
        tuple(replace(p, matched_mode=assign[i][0], deviation=assign[i][1]) for i, p in enumerate(peaks))
    )


@dataclass(frozen=True, eq=False)
class DampingRow:
    resistance: float
    peak_count: int
    deviations: np.ndarray  # per mode, NaN where no peak matched
    merged: bool  # fewer peaks than the drive can see


@dataclass(frozen=True, eq=False)
class DampingStudy:
    rows: tuple[DampingRow, ...]
    mode_frequencies: np.ndarray
    predicted_peaks: int
    driven: int

    def deviation_table(self) -> np.ndarray:
        """Shape (len(R_values), N)."""
        return np.array([r.deviations for r in self.rows])


def damping_study(
    model: ArrayModel,
    r_values: Sequence[float],
    driven: int,
    grid: FrequencyGrid | None = None,
    *,
    prominence_floor: float = DEFAULT_PROMINENCE_FLOOR,
    backend=None,
) -> DampingStudy:
    """Peak-vs-eigenfrequency deviation as every coil's resistance is varied."""
    r = np.asarray(r_values, dtype=float)
    if r.size == 0 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise ValueError("R values must be positive and strictly ascending")
    v = as_validated(model)
    modes = solve_modes(v)
    grid = grid or default_grid(v)
    expected = predicted_peak_count(modes, driven)
    rows = []
    for ri in r:
        _, peaks = detect_peaks(v.with_resistance(ri), driven, grid, prominence_floor=prominence_floor, backend=backend)
        matched = match_peaks_to_modes(peaks, modes, driven)
        dev = np.full(modes.n, np.nan)
        for p in matched:
            dev[p.matched_mode] = p.deviation
        rows.append(DampingRow(float(ri), len(peaks), dev, len(peaks) < expected))
    return DampingStudy(tuple(rows), modes.frequencies, expected, driven)


@dataclass(frozen=True)
class QualityFactor:
    values: np.ndarray
    infinite: np.ndarray


def quality_factors(model: ArrayModel) -> QualityFactor:
    """``Q_n = w_n L_n / R_n``; ``inf`` (and flagged) where ``R_n == 0``."""
    v = as_validated(model)
    x = natural_omegas(v) * v.inductance
    inf = v.resistance == 0
    with np.errstate(divide="ignore"):
        q = np.where(inf, np.inf, x / np.where(inf, 1.0, v.resistance))
    return QualityFactor(q, inf)


@dataclass(frozen=True, eq=False)
class CouplingFit:
    k: float
    residual: float
    model_frequencies: np.ndarray
    k_grid: np.ndarray = field(default=None, repr=False)
    residual_curve: np.ndarray = field(default=None, repr=False)


def _builder(coils, layout, decay_exponent):
    if layout == "chain":
        return lambda k: build_linear_chain(coils, k, decay_exponent)
    if layout == "close_packed":
        return lambda k: build_close_packed(coils, k)
    raise ValueError(f"unknown layout {layout!r}")


def _paired_residual(model_f, observed):
    if observed.size == model_f.size:
        rel = (np.sort(model_f) - observed) / observed
    else:
        nearest = model_f[np.argmin(np.abs(model_f[None, :] / observed[:, None] - 1.0), axis=1)]
        rel = (nearest - observed) / observed
    return float(np.sum(rel * rel))


def fit_coupling(
    observed: Sequence[float],
    coils: Sequence[CoilCircuit],
    *,
    layout: str = "chain",
    decay_exponent: float = math.inf,
    bracket: tuple[float, float] = (1e-3, 0.95),
    samples: int = 200,
) -> CouplingFit:
    """Fit a single coupling coefficient to observed resonant frequencies (Hz).

    Two coils with two observations are inverted in closed form; otherwise the
    sum of squared relative frequency errors is minimised over ``bracket``.
    """
    obs = np.sort(np.asarray(observed, dtype=float))
    n = len(coils)
    if obs.size == 0:
        raise ValueError("need at least one observed frequency")
    if obs.size > n:
        raise ValueError(f"{obs.size} observed frequencies but the model has only {n} modes")
    if np.any(obs <= 0) or not np.all(np.isfinite(obs)):
        raise ValueError("observed frequencies must be positive and finite")
    lo, hi = bracket
    if not (0 < lo < hi < 1):
        raise ValueError(f"bracket must lie inside (0, 1), got {bracket}")
    build = _builder(tuple(coils), layout, decay_exponent)

    if n == 2 and obs.size == 2:
        w1, w2 = (c.natural_omega for c in coils)
        if math.isclose(w1, w2, rel_tol=1e-12):
            k = estimate_k_from_split(SplitPair(obs[0], obs[1]))
        else:
            # product of the two squared roots is w1^2 w2^2 / (1 - k^2)
            x = (2 * math.pi) ** 2 * obs[0] * obs[1]
            k = math.sqrt(max(0.0, 1.0 - (w1 * w2 / x) ** 2))
        fm = solve_modes(build(k)).frequencies
        return CouplingFit(float(k), _paired_residual(fm, obs), fm)

    def residual(k):
        try:
            return _paired_residual(solve_modes(build(float(k))).frequencies, obs)
        except (ArrayValidationError, NumericalError):
            return math.inf

    ks = np.linspace(lo, hi, samples)
    curve = np.array([residual(k) for k in ks])
    finite = np.flatnonzero(np.isfinite(curve))
    if finite.size < 3 or np.any(np.diff(finite) != 1):
        raise NoBracket("residual not finite on a contiguous part of the bracket", ks, curve)
    seg = curve[finite]
    i = int(np.argmin(seg))
    slack = 1e-12 * max(seg.max(), 1e-300)
    if np.any(np.diff(seg[: i + 1]) > slack) or np.any(np.diff(seg[i:]) < -slack):
        raise NoBracket("residual is not unimodal in the bracket", ks, curve)
    a = ks[finite[max(i - 1, 0)]]
    b = ks[finite[min(i + 1, seg.size - 1)]]
    opt = scipy.optimize.minimize_scalar(residual, bounds=(a, b), method="bounded", options={"xatol": 1e-14})
    k = float(opt.x)
    return CouplingFit(k, float(opt.fun), solve_modes(build(k)).frequencies, ks, curve)
