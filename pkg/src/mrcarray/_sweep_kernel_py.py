"""Pure-numpy fallback for the compiled sweep kernel.

Runs the same partial-pivoting elimination as the Cython version, batched over
the frequency axis, so both back-ends make identical pivot and singularity
decisions.
"""

import numpy as np


def solve_unit_drive(mutual, resistance, capacitance, drive, omegas, pivot_tol):
    """Solve the coupled loop equations with unit current in the driven coil.

    The driven row carries ``R + j w L`` (its capacitor sits in parallel and is
    handled by the caller); passive rows carry ``R + j w L + 1/(j w C)``.

    Returns
    -------
    z_coil : (P,) complex
        Driven coil-branch impedance ``V_d / I_d``.
    currents : (P, N) complex
        Loop currents, normalised so the driven coil carries 1 A.
    status : (P,) int8
        1 where the passive subsystem is singular to within ``pivot_tol``
        (NaN results), 0 otherwise.
    """
    mutual = np.asarray(mutual, dtype=float)
    resistance = np.asarray(resistance, dtype=float)
    capacitance = np.asarray(capacitance, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    n_el = resistance.shape[0]
    n_pts = omegas.shape[0]
    jw = 1j * omegas

    z_coil = resistance[drive] + jw * mutual[drive, drive]
    currents = np.zeros((n_pts, n_el), dtype=complex)
    currents[:, drive] = 1.0
    status = np.zeros(n_pts, dtype=np.int8)
    if n_el == 1:
        return z_coil, currents, status

    idx = np.array([e for e in range(n_el) if e != drive])
    n = idx.size
    a = jw[:, None, None] * mutual[np.ix_(idx, idx)][None, :, :]
    diag = np.arange(n)
    a[:, diag, diag] += resistance[idx] + 1.0 / (jw[:, None] * capacitance[idx])
    b = -jw[:, None] * mutual[idx, drive][None, :]
    # the diagonal reactances cancel at resonance; measure against their size
    react = omegas[:, None] * mutual[idx, idx][None, :] + 1.0 / (omegas[:, None] * capacitance[idx][None, :])
    scale = np.maximum(np.max(np.abs(a) ** 2, axis=(1, 2)), np.max(react**2, axis=1))
    tol2 = pivot_tol**2 * scale

    rows = np.arange(n_pts)
    bad = np.zeros(n_pts, dtype=bool)
    for j in range(n):
        mag = np.abs(a[:, j:, j]) ** 2
        piv = j + np.argmax(mag, axis=1)
        best = mag[rows, piv - j]
        swap = piv != j
        if swap.any():
            r = rows[swap]
            tmp = a[r, j, :].copy()
            a[r, j, :] = a[r, piv[swap], :]
            a[r, piv[swap], :] = tmp
            tmpb = b[r, j].copy()
            b[r, j] = b[r, piv[swap]]
            b[r, piv[swap]] = tmpb
        bad |= best <= tol2
        pivot = np.where(bad, 1.0, a[:, j, j])
        f = a[:, j + 1 :, j] / pivot[:, None]
        a[:, j + 1 :, j:] -= f[:, :, None] * a[:, None, j, j:]
        b[:, j + 1 :] -= f * b[:, j : j + 1]

    x = np.empty((n_pts, n), dtype=complex)
    for i in range(n - 1, -1, -1):
        acc = b[:, i] - np.einsum("pj,pj->p", a[:, i, i + 1 :], x[:, i + 1 :])
        x[:, i] = acc / np.where(bad, 1.0, a[:, i, i])

    currents[:, idx] = x
    z_coil = z_coil + jw * (x @ mutual[drive, idx])
    z_coil[bad] = np.nan
    currents[bad] = np.nan
    status[bad] = 1
    return z_coil, currents, status
