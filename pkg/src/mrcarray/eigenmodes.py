"""Lossless resonant modes of a coupled array.

The squared resonant angular frequencies are the eigenvalues of the symmetric
characteristic matrix ``W K^-1 W`` (``W`` the diagonal of uncoupled natural
angular frequencies); its eigenvectors give the relative element voltages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from mrcarray.errors import SingularCoupling
from mrcarray.model import ArrayModel, as_validated, mutual_inductance_matrix, natural_omegas

DEGENERACY_RTOL = 1e-9
ROUTE_RTOL = 1e-10
DEFAULT_NODE_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Resonant modes sorted by ascending frequency.

    Attributes
    ----------
    frequencies : ndarray, shape (N,)
        Hz.
    eigenvalues : ndarray, shape (N,)
        Squared angular frequencies, (rad/s)^2.
    mode_shapes : ndarray, shape (N, N)
        Column ``i`` is the voltage shape of mode ``i``, scaled so its
        largest-magnitude component is +1.
    degeneracy_groups : tuple of tuple of int
        Partition of mode indices by (relatively) equal eigenvalue.
    matrix : ndarray, shape (N, N)
        The characteristic matrix the modes were computed from.
    """

    frequencies: np.ndarray
    eigenvalues: np.ndarray
    mode_shapes: np.ndarray
    degeneracy_groups: tuple
    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.frequencies.size

    def group_of(self, mode: int) -> tuple:
        for g in self.degeneracy_groups:
            if mode in g:
                return g
        raise IndexError(mode)


@dataclass(frozen=True)
class ModeClassification:
    """Per-mode node sets and the drive elements each mode is visible from."""

    nodes: tuple
    visible_from: tuple


def characteristic_matrix(model: ArrayModel) -> np.ndarray:
    """Symmetric characteristic matrix, (rad/s)^2.

    Computed both as ``W K^-1 W`` and as ``(S M S)^-1`` with ``S = diag(sqrt(C))``;
    the two must agree to ``ROUTE_RTOL``.
    """
    v = as_validated(model)
    w = natural_omegas(v)
    try:
        k_factor = scipy.linalg.cho_factor(v.coupling)
        k_inv = scipy.linalg.cho_solve(k_factor, np.eye(v.n))
        sc = np.sqrt(v.capacitance)
        via_m = np.linalg.inv(sc[:, None] * mutual_inductance_matrix(v) * sc[None, :])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularCoupling(f"coupling matrix not invertible: {exc}") from None
    via_k = w[:, None] * k_inv * w[None, :]
    via_k = 0.5 * (via_k + via_k.T)

    err = np.linalg.norm(via_k - via_m) / np.linalg.norm(via_k)
    if not err <= ROUTE_RTOL:
        raise SingularCoupling(f"coupling matrix too ill-conditioned: routes disagree by {err:.2e}")
    return via_k


def _normalise(vec):
    mags = np.abs(vec)
    peak = mags.max()
    # first component within rounding of the peak fixes the sign
    lead = np.flatnonzero(mags >= peak * (1 - 1e-9))[0]
    return vec / vec[lead]


def _group(eigenvalues):
    groups, current = [], [0]
    for i in range(1, eigenvalues.size):
        prev = eigenvalues[current[-1]]
        if abs(eigenvalues[i] - prev) < DEGENERACY_RTOL * max(abs(eigenvalues[i]), abs(prev)):
            current.append(i)
        else:
            groups.append(tuple(current))
            current = [i]
    groups.append(tuple(current))
    return tuple(groups)


def _canonical_basis(subspace):
    # Pivoted Gram-Schmidt of the projected unit vectors: basis-independent and
    # deterministic for a given degenerate subspace.
    n, dim = subspace.shape
    proj = subspace @ subspace.T
    basis = []
    candidates = [proj[:, j].copy() for j in range(n)]
    for _ in range(dim):
        best, best_norm = None, 0.0
        for c in candidates:
            r = c - sum((b @ c) * b for b in basis) if basis else c
            nr = np.linalg.norm(r)
            if nr > best_norm * (1 + 1e-9):
                best, best_norm = r, nr
        basis.append(best / best_norm)
    return np.column_stack(basis)


def solve_modes(model: ArrayModel) -> ModeSet:
    omega_mat = characteristic_matrix(model)
    evals, evecs = np.linalg.eigh(omega_mat)
    if np.any(evals <= 0):
        raise SingularCoupling("characteristic matrix has non-positive eigenvalues")
    groups = _group(evals)
    shapes = evecs.copy()
    for g in groups:
        if len(g) > 1:
            q, _ = np.linalg.qr(evecs[:, list(g)])
            shapes[:, list(g)] = _canonical_basis(q)
    for i in range(shapes.shape[1]):
        shapes[:, i] = _normalise(shapes[:, i])
    return ModeSet(
        frequencies=np.sqrt(evals) / (2.0 * np.pi),
        eigenvalues=evals,
        mode_shapes=shapes,
        degeneracy_groups=groups,
        matrix=omega_mat,
    )


def classify_modes(modes: ModeSet, node_tolerance: float = DEFAULT_NODE_TOLERANCE) -> ModeClassification:
    """Nodes are elements with ``|v[n]| < node_tolerance * max|v|``."""
    if not (0 < node_tolerance <= 0.1):
        raise ValueError(f"node_tolerance must lie in (0, 0.1], got {node_tolerance}")
    n = modes.n
    nodes, visible = [], []
    for i in range(n):
        col = np.abs(modes.mode_shapes[:, i])
        is_node = col < node_tolerance * col.max()
        nodes.append(frozenset(np.flatnonzero(is_node).tolist()))
        visible.append(frozenset(np.flatnonzero(~is_node).tolist()))
    return ModeClassification(tuple(nodes), tuple(visible))


def group_visible(modes: ModeSet, group, element: int, node_tolerance: float = DEFAULT_NODE_TOLERANCE) -> bool:
    """Whether ``element`` couples to any mode of a degenerate group.

    Uses the projection of the element's unit vector onto the group's
    eigenspace, so the answer does not depend on the basis chosen inside it.
    """
    if len(group) == 1:
        col = np.abs(modes.mode_shapes[:, group[0]])
        return bool(col[element] >= node_tolerance * col.max())
    q, _ = np.linalg.qr(modes.mode_shapes[:, list(group)])
    return float(np.linalg.norm(q[element, :])) >= node_tolerance


def predicted_peak_count(modes: ModeSet, drive_index: int, node_tolerance: float = DEFAULT_NODE_TOLERANCE) -> int:
    """Number of distinct eigenvalue groups observable from ``drive_index``."""
    if not (0 <= drive_index < modes.n):
        raise IndexError(f"drive index {drive_index} out of range for {modes.n} elements")
    return sum(group_visible(modes, g, drive_index, node_tolerance) for g in modes.degeneracy_groups)
