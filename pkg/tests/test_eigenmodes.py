import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mrcarray.eigenmodes import (
    characteristic_matrix,
    classify_modes,
    group_visible,
    predicted_peak_count,
    solve_modes,
)
from mrcarray.model import ArrayModel, CoilCircuit, build_close_packed, build_linear_chain, identical_coils
from mrcarray.twocoil import identical_coupled_frequencies

from oracles import brute_eigenfrequencies, chain_frequencies, chain_mode, close_packed_frequencies

L, C = 10e-6, 150e-12
F0 = 4109362.9604099984

coil_st = st.builds(CoilCircuit, st.floats(1e-6, 1e-4), st.floats(1e-11, 1e-8), st.floats(0, 20))


def chain(n, k=0.14, r=0.0):
    return build_linear_chain(identical_coils(n, L, C, r), k)


def test_three_coil_chain_frozen():
    modes = solve_modes(chain(3))
    assert modes.frequencies == pytest.approx([3754463.8238, 4109362.96041, 4588646.30115], rel=1e-11)
    assert np.allclose(modes.mode_shapes[:, 0], [1 / math.sqrt(2), 1, 1 / math.sqrt(2)], atol=1e-12)
    assert np.allclose(modes.mode_shapes[:, 1], [1, 0, -1], atol=1e-12)
    assert np.allclose(modes.mode_shapes[:, 2], [-1 / math.sqrt(2), 1, -1 / math.sqrt(2)], atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
@pytest.mark.parametrize("k", [0.02, 0.14, 0.3])
def test_identical_chain_matches_analytic_spectrum(n, k):
    modes = solve_modes(chain(n, k))
    assert modes.frequencies == pytest.approx(chain_frequencies(F0, k, n), rel=1e-12)
    # mode j (1-based, descending K-eigenvalue) has the sine shape with j - 1 sign changes
    for i in range(n):
        ref = chain_mode(i + 1, n)
        ref = ref / ref[np.argmax(np.abs(ref) >= np.abs(ref).max() * (1 - 1e-9))]
        assert np.allclose(modes.mode_shapes[:, i], ref, atol=1e-10)


def test_close_packed_degenerate_pair():
    modes = solve_modes(build_close_packed(identical_coils(3, L, C), 0.14))
    assert modes.frequencies == pytest.approx(close_packed_frequencies(F0, 0.14, 3), rel=1e-12)
    assert modes.degeneracy_groups == ((0,), (1, 2))
    shapes = modes.mode_shapes
    assert np.allclose(shapes[:, 0], 1.0)
    assert abs(shapes[:, 1] @ shapes[:, 2]) < 1e-12
    assert np.allclose(shapes[:, 1:].sum(axis=0), 0.0, atol=1e-12)


def test_degenerate_basis_is_deterministic():
    a = solve_modes(build_close_packed(identical_coils(4, L, C), 0.2)).mode_shapes
    b = solve_modes(build_close_packed(identical_coils(4, L, C, 3.0), 0.2)).mode_shapes
    assert np.array_equal(a, b)


def test_two_coil_matches_closed_form():
    for k in (0.01, 0.05, 0.14, 0.3, 0.6):
        f = solve_modes(chain(2, k)).frequencies
        pair = identical_coupled_frequencies(L, C, k)
        assert f[0] == pytest.approx(pair.f_plus, rel=1e-10)
        assert f[1] == pytest.approx(pair.f_minus, rel=1e-10)


def test_table1_against_brute_force():
    coils = [CoilCircuit(l * 1e-6, c * 1e-9) for l, c in zip((16.7, 17.4, 12.7, 17.3, 17.9), (1.72, 1.72, 1.73, 1.72, 1.72))]
    model = build_linear_chain(coils, 0.2, 2.0)
    brute = brute_eigenfrequencies([c.inductance for c in coils], [c.capacitance for c in coils], model.coupling)
    assert solve_modes(model).frequencies == pytest.approx(brute, rel=1e-10)


def test_classification_and_visibility():
    modes = solve_modes(chain(3))
    cls = classify_modes(modes)
    assert cls.nodes == (frozenset(), frozenset({1}), frozenset())
    assert cls.visible_from[1] == frozenset({0, 2})
    assert predicted_peak_count(modes, 0) == 3
    assert predicted_peak_count(modes, 1) == 2
    five = solve_modes(chain(5))
    assert [predicted_peak_count(five, d) for d in range(5)] == [5, 4, 3, 4, 5]
    cp = solve_modes(build_close_packed(identical_coils(3, L, C), 0.14))
    assert all(group_visible(cp, (1, 2), e) for e in range(3))
    assert [predicted_peak_count(cp, d) for d in range(3)] == [2, 2, 2]
    with pytest.raises(ValueError):
        classify_modes(modes, 0.5)
    with pytest.raises(IndexError):
        predicted_peak_count(modes, 3)


def _random_pd_model(coils, seed):
    rng = np.random.default_rng(seed)
    n = len(coils)
    a = rng.normal(size=(n, n))
    g = a @ a.T + n * np.eye(n)
    d = 1 / np.sqrt(np.diag(g))
    return ArrayModel(coils, d[:, None] * g * d[None, :])


@given(coils=st.lists(coil_st, min_size=1, max_size=7), seed=st.integers(0, 2**32 - 1))
def test_characteristic_matrix_is_spd_and_eigenpairs_hold(coils, seed):
    model = _random_pd_model(coils, seed)
    omega = characteristic_matrix(model)
    assert np.array_equal(omega, omega.T)
    modes = solve_modes(model)
    assert np.all(modes.eigenvalues > 0)
    assert np.all(np.diff(modes.frequencies) >= 0)
    norm = np.linalg.norm(omega, 2)
    for i in range(modes.n):
        v = modes.mode_shapes[:, i]
        assert np.max(v) == pytest.approx(1.0) and np.max(np.abs(v)) == pytest.approx(1.0)
        assert np.linalg.norm(omega @ v - modes.eigenvalues[i] * v) / norm <= 1e-9


@given(coils=st.lists(coil_st, min_size=2, max_size=6), seed=st.integers(0, 2**32 - 1))
def test_brute_force_oracle_agreement(coils, seed):
    model = _random_pd_model(coils, seed)
    brute = brute_eigenfrequencies([c.inductance for c in coils], [c.capacitance for c in coils], model.coupling)
    assert solve_modes(model).frequencies == pytest.approx(brute, rel=1e-8)


@given(n=st.integers(2, 8), eps=st.floats(1e-6, 1e-2))
def test_weak_coupling_spread_scales_with_coupling(n, eps):
    modes = solve_modes(chain(n, eps))
    spread = (modes.frequencies.max() - modes.frequencies.min()) / F0
    kdev = np.linalg.norm(chain(n, eps).coupling - np.eye(n), 2)
    # first order: f = f0 (1 - lambda/2) for the eigenvalues lambda of K - I
    assert spread == pytest.approx(kdev, rel=5 * eps + 1e-6)


@given(n=st.integers(1, 6), r=st.floats(0, 100), k=st.floats(0.01, 0.45))
def test_modes_ignore_resistance(n, r, k):
    coils = identical_coils(n, L, C)
    model = build_linear_chain(coils, k) if n > 1 else ArrayModel(coils, np.eye(1))
    from mrcarray.model import validate_array

    a = solve_modes(validate_array(model))
    b = solve_modes(validate_array(model).with_resistance(r))
    assert np.array_equal(a.frequencies, b.frequencies)


@given(n=st.integers(2, 9), k=st.floats(0.01, 0.45), decay=st.sampled_from([math.inf, 2.0, 3.0]))
def test_symmetric_chain_modes_have_definite_parity(n, k, decay):
    modes = solve_modes(build_linear_chain(identical_coils(n, L, C), k, decay))
    for i in range(n):
        v = modes.mode_shapes[:, i]
        sym, anti = np.allclose(v, v[::-1], atol=1e-9), np.allclose(v, -v[::-1], atol=1e-9)
        assert sym != anti
        if anti and n % 2:
            assert abs(v[n // 2]) < 1e-12
