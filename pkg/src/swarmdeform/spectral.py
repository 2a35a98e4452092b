"""Closed-form eigenvalues of symmetric 3x3 matrices, batched.

The characteristic cubic is solved trigonometrically (Cardano form) after
shifting by the mean eigenvalue and scaling by the largest entry, which keeps
the arccos argument well conditioned. Exactly diagonal inputs short-circuit to
their sorted diagonal so constructed fixtures stay bitwise exact. When the
roots cluster the closed form is replaced by a few cyclic Jacobi sweeps, which
converge to machine precision for 3x3 problems.
"""

from __future__ import annotations

import numpy as np

_CLUSTER_RTOL = 1e-6


def _jacobi_eigvals(mats: np.ndarray, sweeps: int = 6) -> np.ndarray:
    """Cyclic Jacobi rotations on a batch of symmetric 3x3 matrices."""
    a = mats.copy()
    m = a.shape[0]
    for _ in range(sweeps):
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[:, p, q]
            # rotation angle zeroing entry (p, q); arctan2 handles app == aqq
            theta = 0.5 * np.arctan2(2.0 * apq, a[:, q, q] - a[:, p, p])
            c = np.cos(theta)
            s = np.sin(theta)
            rot = np.broadcast_to(np.eye(3), (m, 3, 3)).copy()
            rot[:, p, p] = c
            rot[:, q, q] = c
            rot[:, p, q] = s
            rot[:, q, p] = -s
            a = np.swapaxes(rot, 1, 2) @ a @ rot
    vals = np.stack([a[:, 0, 0], a[:, 1, 1], a[:, 2, 2]], axis=1)
    return -np.sort(-vals, axis=1)


def eigvals_sym3(mats: np.ndarray) -> np.ndarray:
    """Eigenvalues of symmetric 3x3 matrices, descending, batched over axis 0.

    Accepts shape (3, 3) or (m, 3, 3); returns (3,) or (m, 3).
    """
    a = np.asarray(mats, dtype=float)
    single = a.ndim == 2
    if single:
        a = a[None]
    a = 0.5 * (a + np.swapaxes(a, 1, 2))
    m = a.shape[0]
    out = np.empty((m, 3))

    offdiag = np.abs(a[:, 0, 1]) + np.abs(a[:, 0, 2]) + np.abs(a[:, 1, 2])
    diag_rows = offdiag == 0.0
    if diag_rows.any():
        d = np.stack([a[diag_rows, 0, 0], a[diag_rows, 1, 1], a[diag_rows, 2, 2]], axis=1)
        out[diag_rows] = -np.sort(-d, axis=1)

    rows = ~diag_rows
    if rows.any():
        b = a[rows]
        scale = np.abs(b).max(axis=(1, 2))
        b = b / scale[:, None, None]
        q = (b[:, 0, 0] + b[:, 1, 1] + b[:, 2, 2]) / 3.0
        c = b - q[:, None, None] * np.eye(3)
        p2 = (c * c).sum(axis=(1, 2)) / 6.0
        p = np.sqrt(p2)
        detc = (c[:, 0, 0] * (c[:, 1, 1] * c[:, 2, 2] - c[:, 1, 2] * c[:, 2, 1])
                - c[:, 0, 1] * (c[:, 1, 0] * c[:, 2, 2] - c[:, 1, 2] * c[:, 2, 0])
                + c[:, 0, 2] * (c[:, 1, 0] * c[:, 2, 1] - c[:, 1, 1] * c[:, 2, 0]))
        safe_p = np.where(p > 0.0, p, 1.0)
        r = np.clip(detc / (2.0 * safe_p ** 3), -1.0, 1.0)
        phi = np.arccos(r) / 3.0
        e1 = q + 2.0 * p * np.cos(phi)
        e3 = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
        e2 = 3.0 * q - e1 - e3
        vals = np.stack([e1, e2, e3], axis=1)

        span = np.maximum(np.abs(vals).max(axis=1), 1e-300)
        gap = np.minimum(e1 - e2, e2 - e3)
        clustered = gap < _CLUSTER_RTOL * span
        if clustered.any():
            vals[clustered] = _jacobi_eigvals(b[clustered])
        out[rows] = vals * scale[:, None]

    return out[0] if single else out
