"""Safety window and deformation-based collision certification.

The lower edge of the scale window keeps every within-cell pair at least
2*(delta + epsilon) apart under a pure contraction; the upper edge keeps the
farthest boundary leader inside the motion-space ball of radius a_max. A
configuration at time t is certified by the smallest singular value of each
cell's deformation Jacobian (separation shrinks by at most that factor) plus
a direct minimum-distance sweep of the commanded positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.spatial.distance import pdist

from .errors import NumericalError, SafetyWindowError
from .qp import Schedule
from .spectral import eigvals_sym3
from .team import SafetyParameters, TeamConfiguration, TriangleCell, cell_vertex_positions


@dataclass(frozen=True)
class SafetyBounds:
    alpha_min: float
    alpha_max: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.alpha_min, self.alpha_max)


def safety_window(separations: Iterable[float], safety: SafetyParameters) -> SafetyBounds:
    """Scale window from per-cell minimum separations and clearance margins."""
    seps = [float(s) for s in separations]
    if not seps or min(seps) <= 0.0:
        raise SafetyWindowError("cell separations must be positive")
    clearance = safety.clearance
    alpha_min = max(clearance / s for s in seps)
    alpha_max = (safety.a_max - clearance) / safety.a0
    if alpha_min > alpha_max:
        raise SafetyWindowError(
            f"safety window empty: alpha_min {alpha_min:.6g} > alpha_max {alpha_max:.6g}")
    return SafetyBounds(alpha_min, alpha_max)


def alpha_bounds(team: TeamConfiguration) -> SafetyBounds:
    return safety_window((cell.p_min for cell in team.cells), team.safety)


@dataclass(frozen=True, eq=False)
class CellBasis:
    """Affine pieces of one cell's deformation Jacobian.

    Q(t) = alpha_a(t) * k1 + alpha_b(t) * k2 + k3 where (alpha_a, alpha_b) are
    the scale factors of the cell's two boundary vertices.
    """

    cell_id: int
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    alpha_index: tuple[int, int]


def cell_basis(team: TeamConfiguration, cell: TriangleCell) -> CellBasis:
    core, va, vb = cell_vertex_positions(team, cell)
    a1 = va - core
    a2 = vb - core
    normal = np.cross(a1, a2)
    norm = np.linalg.norm(normal)
    scale = np.linalg.norm(a1) * np.linalg.norm(a2)
    if norm <= 1e-12 * scale:
        raise NumericalError(f"cell {cell.cell_id} basis is degenerate")
    normal = normal / norm
    m = np.column_stack([a1, a2, normal])
    m_inv = np.linalg.inv(m)
    k1 = np.outer(a1, m_inv[0])
    k2 = np.outer(a2, m_inv[1])
    k3 = np.outer(normal, m_inv[2])
    ia, ib = cell.vertices[1] - 1, cell.vertices[2] - 1
    return CellBasis(cell.cell_id, k1, k2, k3, (ia, ib))


def triangle_jacobian(team: TeamConfiguration, cell: TriangleCell,
                      alpha: np.ndarray, shift: np.ndarray | None = None
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Deformation Jacobian and offset of one cell for a full alpha vector."""
    alpha = np.asarray(alpha, dtype=float)
    basis = cell_basis(team, cell)
    ia, ib = basis.alpha_index
    q = alpha[ia] * basis.k1 + alpha[ib] * basis.k2 + basis.k3
    b = np.zeros(3) if shift is None else np.asarray(shift, dtype=float)
    return q, b


def pure_deformation_spectrum(q: np.ndarray) -> np.ndarray:
    """Singular values of Jacobian(s), descending; accepts (3,3) or (..,3,3)."""
    q = np.asarray(q, dtype=float)
    single = q.ndim == 2
    mats = q[None] if single else q.reshape(-1, 3, 3)
    scale = np.abs(mats).max(axis=(1, 2))
    dets = np.linalg.det(mats)
    if np.any(np.abs(dets) <= 1e-12 * np.maximum(scale, 1e-300) ** 3):
        raise NumericalError("deformation Jacobian is singular")
    gram = mats.swapaxes(1, 2) @ mats
    vals = np.sqrt(np.maximum(eigvals_sym3(gram), 0.0))
    if single:
        return vals[0]
    return vals.reshape(q.shape[:-2] + (3,))


def min_pairwise_distance(positions: np.ndarray) -> tuple[float, tuple[int, int]]:
    """Smallest pairwise distance and the first achieving index pair."""
    positions = np.asarray(positions, dtype=float)
    n = positions.shape[0]
    if n < 2:
        raise ValueError("need at least two positions")
    d = pdist(positions)
    k = int(np.argmin(d))

    def row_start(i: int) -> int:
        return i * (2 * n - i - 1) // 2

    i = min(max(int((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8 * k)) / 2), 0), n - 2)
    while i + 1 <= n - 2 and row_start(i + 1) <= k:
        i += 1
    while row_start(i) > k:
        i -= 1
    j = k - row_start(i) + i + 1
    return float(d[k]), (i, j)


@dataclass(eq=False)
class CertificationReport:
    t: np.ndarray
    lambdas: np.ndarray            # (n, n_cells, 3) descending per cell
    cell_bounds: np.ndarray        # (n_cells,) required smallest singular value
    margins: np.ndarray            # (n, n_cells) lambda_3 - bound
    margins_ok: bool
    distance_trace: np.ndarray     # (n,) min pairwise distance of the team
    distance_threshold: float
    distance_ok: bool
    positions_kind: str
    margin_tol: float
    worst_margin: float
    worst_margin_cell: int
    worst_margin_index: int
    min_distance: float
    min_distance_pair: tuple[int, int]   # 1-based agent ids
    min_distance_index: int

    @property
    def verdict(self) -> bool:
        return self.margins_ok and self.distance_ok

    def summary(self) -> str:
        state = "SAFE" if self.verdict else "UNSAFE"
        return (f"{state}: worst margin {self.worst_margin:.3e} "
                f"(cell {self.worst_margin_cell}, sample {self.worst_margin_index}), "
                f"min {self.positions_kind} distance {self.min_distance:.6f} "
                f"(threshold {self.distance_threshold:.6f}, agents "
                f"{self.min_distance_pair[0]}-{self.min_distance_pair[1]})")


def certify_configuration(team: TeamConfiguration, schedule: Schedule,
                          positions: np.ndarray, positions_kind: str = "desired",
                          margin_tol: float = 1e-9) -> CertificationReport:
    """Certify a planned schedule against deformation and distance limits.

    `positions` is the (n_samples, n_agents, 3) stack the schedule produces
    (commanded positions) or the simulated actual positions; the distance
    threshold is 2*(delta+eps) for commanded and 2*eps for actual motion.
    """
    if positions_kind not in ("desired", "actual"):
        raise ValueError("positions_kind must be 'desired' or 'actual'")
    positions = np.asarray(positions, dtype=float)
    n = schedule.n_samples
    if positions.shape != (n, team.n_agents, 3):
        raise ValueError(f"positions shape {positions.shape} does not match "
                         f"{(n, team.n_agents, 3)}")

    cells = team.cells
    n_cells = len(cells)
    lambdas = np.empty((n, n_cells, 3))
    for c, cell in enumerate(cells):
        basis = cell_basis(team, cell)
        ia, ib = basis.alpha_index
        a = schedule.alpha[:, ia]
        b = schedule.alpha[:, ib]
        q = (a[:, None, None] * basis.k1 + b[:, None, None] * basis.k2 + basis.k3)
        lambdas[:, c, :] = pure_deformation_spectrum(q)

    clearance = team.safety.clearance
    cell_bounds = np.array([clearance / cell.p_min for cell in cells])
    margins = lambdas[:, :, 2] - cell_bounds[None, :]
    margins_ok = bool(margins.min() >= -margin_tol)
    flat = int(np.argmin(margins))
    worst_idx, worst_cell = divmod(flat, n_cells)

    distance_trace = np.empty(n)
    min_distance = np.inf
    min_pair = (0, 0)
    min_index = 0
    for i in range(n):
        d, pair = min_pairwise_distance(positions[i])
        distance_trace[i] = d
        if d < min_distance:
            min_distance = d
            min_pair = pair
            min_index = i
    threshold = clearance if positions_kind == "desired" else 2.0 * team.safety.epsilon
    distance_ok = bool(min_distance >= threshold - margin_tol)

    ids = team.partition.all_ids()
    pair_ids = (ids[min_pair[0]], ids[min_pair[1]])
    return CertificationReport(
        schedule.t.copy(), lambdas, cell_bounds, margins, margins_ok,
        distance_trace, threshold, distance_ok, positions_kind, margin_tol,
        float(margins.min()), cells[worst_cell].cell_id, worst_idx,
        float(min_distance), pair_ids, min_index)
