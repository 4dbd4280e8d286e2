import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mrcarray import _backend
from mrcarray.analysis import detect_peaks
from mrcarray.eigenmodes import classify_modes, solve_modes
from mrcarray.errors import SingularAtFrequency
from mrcarray.model import ArrayModel, CoilCircuit, FrequencyGrid, build_linear_chain, identical_coils, validate_array
from mrcarray.sweep import (
    DriveSpec,
    assemble_system,
    input_impedance,
    passive_impedance,
    solve_at,
    sweep,
    transfer_impedance,
)
from mrcarray.twocoil import identical_coupled_frequencies

from oracles import dense_z0, two_coil_z0

L, C = 10e-6, 150e-12
W0 = 1 / math.sqrt(L * C)
BACKENDS = sorted(_backend.KERNELS)

coil_st = st.builds(CoilCircuit, st.floats(1e-6, 1e-4), st.floats(1e-11, 1e-8), st.floats(0.01, 20))


@st.composite
def driven_arrays(draw, min_n=1, max_n=6):
    coils = draw(st.lists(coil_st, min_size=min_n, max_size=max_n))
    n = len(coils)
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    a = rng.normal(size=(n, n))
    g = a @ a.T + n * np.eye(n)
    d = 1 / np.sqrt(np.diag(g))
    model = validate_array(ArrayModel(coils, d[:, None] * g * d[None, :]))
    w0 = float(np.median(1 / np.sqrt(model.inductance * model.capacitance)))
    omega = w0 * draw(st.floats(0.3, 3.0))
    return model, draw(st.integers(0, n - 1)), omega


@pytest.mark.parametrize("backend", BACKENDS)
def test_single_coil_branch_impedance(backend):
    model = validate_array(ArrayModel((CoilCircuit(L, C, 10.0),), np.eye(1)))
    w = 2 * math.pi * 3e6
    zc, cur = solve_at(model, 0, w, backend=backend)
    assert zc == pytest.approx(10.0 + 1j * w * L, rel=1e-15)
    assert cur == pytest.approx([1.0])


def test_single_coil_peak_at_natural_frequency():
    model = validate_array(ArrayModel((CoilCircuit(L, C, 10.0),), np.eye(1)))
    grid = FrequencyGrid(3e6, 5.5e6, 2000)
    res = sweep(model, DriveSpec(0, grid))
    step = grid.values()[1] - grid.values()[0]
    assert abs(res.frequencies[np.argmax(res.magnitude)] - W0 / (2 * math.pi)) <= step


def test_passive_impedance_formula():
    coil = CoilCircuit(L, C, 2.0)
    assert passive_impedance(coil, W0) == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
@given(case=driven_arrays())
def test_input_impedance_matches_dense_oracle(backend, case):
    model, d, w = case
    ref, _ = dense_z0(model.inductance, model.capacitance, model.resistance, model.coupling, d, w)
    assert input_impedance(model, d, w, backend=backend) == pytest.approx(ref, rel=1e-9)


@given(case=driven_arrays())
def test_backends_agree(case):
    model, d, w = case
    f = np.linspace(0.5, 2.0, 64) * w / (2 * math.pi)
    runs = [sweep(model, DriveSpec(d), frequencies=f, backend=b) for b in BACKENDS]
    for other in runs[1:]:
        assert np.allclose(other.input_impedance, runs[0].input_impedance, rtol=1e-12, atol=0)
        assert np.allclose(other.element_currents, runs[0].element_currents, rtol=1e-10, atol=1e-14)


def test_two_coil_closed_form():
    c1, c2 = CoilCircuit(10e-6, 150e-12, 2.0), CoilCircuit(12e-6, 140e-12, 3.0)
    model = build_linear_chain((c1, c2), 0.1)
    f = np.linspace(3e6, 5e6, 101)
    res = sweep(model, DriveSpec(0), frequencies=f)
    ref = [two_coil_z0(10e-6, 150e-12, 2.0, 12e-6, 140e-12, 3.0, 0.1, 2 * math.pi * x) for x in f]
    assert np.allclose(res.input_impedance, ref, rtol=1e-10, atol=0)


@given(case=driven_arrays())
def test_loop_equations_hold(case):
    model, d, w = case
    zc, cur = solve_at(model, d, w)
    z = assemble_system(model, d, w)
    v = np.zeros(model.n, dtype=complex)
    v[d] = zc
    assert cur[d] == 1.0
    assert np.linalg.norm(z @ cur - v) / np.linalg.norm(v) <= 1e-10


@given(case=driven_arrays(min_n=2), other=st.integers(0, 5))
def test_reciprocity(case, other):
    model, n, w = case
    m = other % model.n
    forward = transfer_impedance(model, n, m, w)
    backward = transfer_impedance(model, m, n, w)
    assert abs(forward - backward) <= 1e-10 * abs(forward)


@given(case=driven_arrays())
def test_passivity(case):
    model, d, w = case
    f = np.geomspace(0.2, 5.0, 200) * w / (2 * math.pi)
    z = sweep(model, DriveSpec(d), frequencies=f).input_impedance
    assert np.all(z.real >= -1e-12 * np.abs(z))


def test_driven_voltage_equals_input_impedance():
    model = build_linear_chain(identical_coils(4, L, C, 1.0), 0.1)
    res = sweep(model, DriveSpec(2, FrequencyGrid(3e6, 5e6, 50)))
    assert np.allclose(res.element_voltages[2], res.input_impedance, rtol=1e-12)
    assert res.element_currents.shape == (4, 50)


def test_uncoupled_array_is_single_parallel_rlc():
    model = validate_array(ArrayModel(identical_coils(3, L, C, 5.0), np.eye(3)))
    f = np.linspace(3e6, 5e6, 40)
    res = sweep(model, DriveSpec(1), frequencies=f)
    w = 2 * math.pi * f
    zc = 5.0 + 1j * w * L
    assert np.allclose(res.input_impedance, zc / (1 + 1j * w * C * zc), rtol=1e-13)
    assert np.all(res.element_currents[[0, 2]] == 0)
    assert np.all(res.element_voltages[[0, 2]] == 0)


@given(k=st.floats(1e-6, 1e-3))
def test_weak_coupling_limit(k):
    model = build_linear_chain(identical_coils(3, L, C, 5.0), k)
    w = W0 * 1.01
    zc, cur = solve_at(model, 0, w)
    # induced current is first order in k
    assert np.max(np.abs(cur[1:])) <= 2 * k * W0 * L / 5.0


@pytest.mark.parametrize("backend", BACKENDS)
def test_lossless_poles_are_flagged(backend):
    model = validate_array(ArrayModel(identical_coils(2, L, C), np.eye(2)))
    with pytest.raises(SingularAtFrequency) as info:
        solve_at(model, 0, W0, backend=backend)
    assert info.value.omega == W0
    res = sweep(model, DriveSpec(0), frequencies=[W0 / (2 * math.pi), 3e6], backend=backend)
    assert res.singular.tolist() == [True, False]
    assert np.isnan(res.input_impedance[0]) and np.isfinite(res.input_impedance[1])


def test_lossless_two_coil_diverges_at_split_frequencies():
    model = build_linear_chain(identical_coils(2, L, C), 0.14)
    pair = identical_coupled_frequencies(L, C, 0.14)
    for w in (pair.omega_plus, pair.omega_minus):
        mags = [abs(input_impedance(model, 0, w * (1 + eps))) for eps in (1e-2, 1e-4, 1e-6)]
        assert mags[0] < mags[1] < mags[2]
        # simple pole: |Z| ~ 1/eps
        assert mags[2] / mags[1] == pytest.approx(100, rel=1e-2)


def test_high_q_convergence_is_monotone_in_resistance_scale():
    base = build_linear_chain(identical_coils(3, L, C, 10.0), 0.14)
    fm = solve_modes(base).frequencies
    devs = []
    for s in (1.0, 0.3, 0.1, 0.03):
        _, peaks = detect_peaks(base.with_resistance(10.0 * s), 0)
        assert len(peaks) == 3
        devs.append(np.abs(peaks.frequencies - fm) / fm)
    devs = np.array(devs)
    assert np.all(np.diff(devs, axis=0) <= 0)


def test_mode_suppression_at_node():
    model = build_linear_chain(identical_coils(5, L, C, 0.5), 0.14)
    modes = solve_modes(model)
    cls = classify_modes(modes)
    half_gap = 0.5 * np.min(np.diff(modes.frequencies))
    for drive in range(5):
        _, peaks = detect_peaks(model, drive)
        for i, nodes in enumerate(cls.nodes):
            if drive in nodes:
                assert np.all(np.abs(peaks.frequencies - modes.frequencies[i]) >= half_gap)


def test_sweep_argument_errors():
    model = build_linear_chain(identical_coils(2, L, C, 1.0), 0.1)
    with pytest.raises(IndexError):
        sweep(model, DriveSpec(2), frequencies=[1e6])
    with pytest.raises(ValueError):
        sweep(model, DriveSpec(0))
