"""Leader-follower weight hierarchy: per-layer weight matrices and forward pass.

Layer k's positions are a row-stochastic combination of layer k-1's positions.
Under the nested convention each matrix carries identity rows for agents
already present in the previous layer; rows of newly added agents hold the
barycentric weights of their material position over the vertices of the
triangular cell enclosing it. The whole team's desired geometry is therefore
driven by the boundary-leader scale factors and the core translation alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ScenarioError
from .team import (CONTAINMENT_TOL, TeamConfiguration, TriangleCell,
                   cell_vertex_positions, enclosing_triangle, projected_weights)

ROW_SUM_TOL = 1e-12


def barycentric_weights(point: np.ndarray, cell: TriangleCell,
                        team: TeamConfiguration) -> np.ndarray:
    """Weights of `point` over the cell's vertices (core, boundary_a, boundary_b).

    The point must lie inside or on the cell under the projected test.
    """
    v0, v1, v2 = cell_vertex_positions(team, cell)
    w = projected_weights(v0, v1, v2, np.asarray(point, dtype=float))
    if np.any(w < -CONTAINMENT_TOL):
        raise ScenarioError(
            f"point {np.asarray(point).tolist()} lies outside cell {cell.cell_id}")
    # roundoff from the projection solve may leave weights a hair outside [0, 1]
    return np.clip(w, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class LayerWeights:
    """Stacked per-layer matrices; matrices[k-2] maps W_{k-1} positions to W_k."""

    matrices: tuple[np.ndarray, ...]
    layer_ids: tuple[tuple[int, ...], ...]  # nested sorted ids of W_1 .. W_p

    @property
    def depth(self) -> int:
        return len(self.layer_ids)


def _validate_rows(matrix: np.ndarray, new_rows: list[int], layer: int):
    if np.any(matrix < -1e-12) or np.any(matrix > 1.0 + 1e-12):
        raise ScenarioError(f"layer {layer} weights fall outside [0, 1]")
    sums = matrix.sum(axis=1)
    bad = np.where(np.abs(sums - 1.0) > ROW_SUM_TOL)[0]
    if bad.size:
        raise ScenarioError(
            f"layer {layer} weights not row-stochastic (row sums {sums[bad][:3]})")
    for i in new_rows:
        if np.count_nonzero(matrix[i]) > 3:
            raise ScenarioError(
                f"layer {layer} row {i} has more than 3 supporting agents")


def build_layer_weights(team: TeamConfiguration, settings=None) -> LayerWeights:
    """Construct the per-layer weight matrices for a team.

    Auto mode derives each new agent's row from the barycentric weights of its
    material position over its enclosing cell's vertices. Explicit mode takes
    the new-agent rows from the scenario and validates them.
    """
    part = team.partition
    layer_ids = tuple(part.nested(k) for k in range(1, part.depth + 1))
    explicit = {}
    if settings is not None and getattr(settings, "mode", "auto") == "explicit":
        explicit = {layer: rows for layer, rows in settings.matrices}

    matrices = []
    for k in range(2, part.depth + 1):
        prev_ids = layer_ids[k - 2]
        cur_ids = layer_ids[k - 1]
        col = {agent: j for j, agent in enumerate(prev_ids)}
        matrix = np.zeros((len(cur_ids), len(prev_ids)))
        new_rows = []
        for i, agent in enumerate(cur_ids):
            if agent in col:
                matrix[i, col[agent]] = 1.0
                continue
            new_rows.append(i)
            if k in explicit:
                row = explicit[k].get(agent)
                if row is None:
                    raise ScenarioError(f"layer {k}: no weights given for agent {agent}")
                for leader, w in row.items():
                    if leader not in col:
                        raise ScenarioError(
                            f"layer {k}: agent {agent} references agent {leader} "
                            f"not present in layer {k - 1}")
                    matrix[i, col[leader]] = w
            else:
                cell = enclosing_triangle(team, team.positions[agent - 1])
                if any(v not in col for v in cell.vertices):
                    raise ScenarioError(
                        f"layer {k}: enclosing vertices of agent {agent} are "
                        f"not all in layer {k - 1}")
                w = barycentric_weights(team.positions[agent - 1], cell, team)
                for v, wv in zip(cell.vertices, w):
                    matrix[i, col[v]] += wv
        _validate_rows(matrix, new_rows, k)
        matrices.append(matrix)
    return LayerWeights(tuple(matrices), layer_ids)


def averaging_ids(team: TeamConfiguration, weights: LayerWeights,
                  average: str = "all") -> tuple[int, ...]:
    """Agent ids averaged into the nominal position (all of W_p, or the new set)."""
    if average == "new":
        return tuple(sorted(team.partition.new_sets[-1]))
    if average != "all":
        raise ScenarioError(f"averaging mode must be all or new, got {average!r}")
    return weights.layer_ids[-1]


def forward_pass(team: TeamConfiguration, weights: LayerWeights,
                 alpha: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """Desired positions of all agents, shape (N, 3), ordered by agent id.

    Leaders move to alpha_l * a_l0 + shift; deeper layers are produced by the
    successive weight-matrix products.
    """
    alpha = np.asarray(alpha, dtype=float)
    shift = np.asarray(shift, dtype=float)
    if alpha.shape != (team.n_pl,):
        raise ScenarioError(f"alpha must have length {team.n_pl}")
    if shift.shape != (3,):
        raise ScenarioError("shift must be an [x, y, z] triple")
    positions = alpha[:, None] * team.leader_positions + shift
    for matrix in weights.matrices:
        positions = matrix @ positions
    return positions


def trajectory_positions(team: TeamConfiguration, weights: LayerWeights,
                         alphas: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Forward pass at every sample of a schedule, shape (n_steps, N, 3)."""
    alphas = np.asarray(alphas, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    out = np.empty((alphas.shape[0], team.n_agents, 3))
    for i in range(alphas.shape[0]):
        out[i] = forward_pass(team, weights, alphas[i], shifts[i])
    return out


@dataclass(frozen=True, eq=False)
class CompositeRows:
    """Per-axis composite rows mapping the decision vector to the nominal position.

    delta has shape (3, n_pl); row `a` dotted with the scale factors gives the
    nominal offset from the shift along axis `a`. The full decision vector is
    X = [alpha_1 .. alpha_{n_pl}, s_x, s_y, s_z].
    """

    delta: np.ndarray
    n_avg: int

    @property
    def n_pl(self) -> int:
        return self.delta.shape[1]

    @property
    def delta_x(self) -> np.ndarray:
        return self.delta[0]

    @property
    def delta_y(self) -> np.ndarray:
        return self.delta[1]

    @property
    def delta_z(self) -> np.ndarray:
        return self.delta[2]

    def r_matrix(self) -> np.ndarray:
        """Rows [delta_a | e_a], shape (3, n_pl + 3)."""
        return np.hstack([self.delta, np.eye(3)])


def compose_delta_rows(team: TeamConfiguration, weights: LayerWeights,
                       average: str = "all") -> CompositeRows:
    """Collapse the layer products into the three composite planner rows."""
    avg_ids = averaging_ids(team, weights, average)
    n_avg = len(avg_ids)
    sel = np.zeros(len(weights.layer_ids[-1]))
    index = {agent: i for i, agent in enumerate(weights.layer_ids[-1])}
    for agent in avg_ids:
        sel[index[agent]] = 1.0
    for matrix in reversed(weights.matrices):
        sel = sel @ matrix
    delta = (sel[None, :] * team.leader_positions.T) / n_avg
    return CompositeRows(delta, n_avg)


def nominal_position(team: TeamConfiguration, weights: LayerWeights,
                     alpha: np.ndarray, shift: np.ndarray,
                     average: str = "all") -> np.ndarray:
    """Average desired position of the output layer (forward-pass route)."""
    positions = forward_pass(team, weights, alpha, shift)
    avg_ids = averaging_ids(team, weights, average)
    idx = [weights.layer_ids[-1].index(a) for a in avg_ids]
    return positions[idx].mean(axis=0)


def composite_weight_matrix(weights: LayerWeights) -> np.ndarray:
    """Full product of the layer matrices, shape (N, n_pl)."""
    out = np.eye(len(weights.layer_ids[0]))
    for matrix in weights.matrices:
        out = matrix @ out
    return out
