import numpy as np
import pytest

import swarmdeform as sd
from swarmdeform.hierarchy import (ROW_SUM_TOL, averaging_ids, barycentric_weights,
                                   composite_weight_matrix)
from swarmdeform.scenario import WeightsSettings


def assert_stochastic_structure(team, weights):
    for k, matrix in enumerate(weights.matrices, start=2):
        prev_ids = weights.layer_ids[k - 2]
        cur_ids = weights.layer_ids[k - 1]
        assert matrix.shape == (len(cur_ids), len(prev_ids))
        assert np.all(matrix >= 0.0) and np.all(matrix <= 1.0)
        assert np.max(np.abs(matrix.sum(axis=1) - 1.0)) <= ROW_SUM_TOL
        col = {agent: j for j, agent in enumerate(prev_ids)}
        for i, agent in enumerate(cur_ids):
            if agent in col:
                expected = np.zeros(len(prev_ids))
                expected[col[agent]] = 1.0
                assert np.array_equal(matrix[i], expected)
            else:
                assert np.count_nonzero(matrix[i]) <= 3


def test_square_weight_structure(square_team, square_weights):
    assert square_weights.depth == 3
    assert_stochastic_structure(square_team, square_weights)


def test_helix_weight_structure(helix_team, helix_weights):
    assert_stochastic_structure(helix_team, helix_weights)


@pytest.mark.parametrize("fixture", ["square", "helix"])
def test_unit_scale_reproduces_material_positions(fixture, request):
    team = request.getfixturevalue(f"{fixture}_team")
    weights = request.getfixturevalue(f"{fixture}_weights")
    desired = sd.forward_pass(team, weights, np.ones(team.n_pl), np.zeros(3))
    assert np.max(np.abs(desired - team.positions)) < 1e-13


def test_forward_pass_affine_in_shift(square_team, square_weights):
    rng = np.random.default_rng(3)
    alpha = rng.uniform(0.5, 1.1, size=square_team.n_pl)
    shift = rng.normal(size=3)
    moved = sd.forward_pass(square_team, square_weights, alpha, shift)
    base = sd.forward_pass(square_team, square_weights, alpha, np.zeros(3))
    assert np.max(np.abs(moved - (base + shift))) < 1e-12


def test_forward_pass_shape_validation(square_team, square_weights):
    with pytest.raises(sd.ScenarioError, match="alpha must have length 5"):
        sd.forward_pass(square_team, square_weights, np.ones(4), np.zeros(3))
    with pytest.raises(sd.ScenarioError, match="shift"):
        sd.forward_pass(square_team, square_weights, np.ones(5), np.zeros(2))


def test_composite_matrix_matches_forward_pass(helix_team, helix_weights):
    rng = np.random.default_rng(11)
    w_full = composite_weight_matrix(helix_weights)
    assert w_full.shape == (67, 7)
    assert np.max(np.abs(w_full.sum(axis=1) - 1.0)) < 1e-12
    for _ in range(5):
        alpha = rng.uniform(0.6, 5.0, size=7)
        shift = rng.normal(size=3)
        leaders = alpha[:, None] * helix_team.leader_positions + shift
        assert np.max(np.abs(w_full @ leaders
                             - sd.forward_pass(helix_team, helix_weights, alpha, shift))) < 1e-12


def test_nominal_position_matches_composite_rows(helix_team, helix_weights):
    rng = np.random.default_rng(19)
    rows = sd.compose_delta_rows(helix_team, helix_weights)
    assert rows.n_avg == 67
    r = rows.r_matrix()
    assert r.shape == (3, 10)
    for _ in range(10):
        alpha = rng.uniform(0.6, 5.0, size=7)
        shift = rng.normal(size=3)
        x = np.concatenate([alpha, shift])
        nominal = sd.nominal_position(helix_team, helix_weights, alpha, shift)
        assert np.max(np.abs(r @ x - nominal)) < 1e-12


def test_averaging_new_set(square_team, square_weights):
    assert averaging_ids(square_team, square_weights, "new") == (10, 11, 12, 13)
    rng = np.random.default_rng(2)
    alpha = rng.uniform(0.5, 1.1, size=5)
    shift = rng.normal(size=3)
    desired = sd.forward_pass(square_team, square_weights, alpha, shift)
    direct = desired[9:13].mean(axis=0)
    nominal = sd.nominal_position(square_team, square_weights, alpha, shift,
                                  average="new")
    assert np.max(np.abs(nominal - direct)) < 1e-15
    rows = sd.compose_delta_rows(square_team, square_weights, average="new")
    assert rows.n_avg == 4
    with pytest.raises(sd.ScenarioError, match="averaging mode"):
        averaging_ids(square_team, square_weights, "outer")


def test_trajectory_positions_stacks_forward_pass(square_team, square_weights):
    rng = np.random.default_rng(5)
    alphas = rng.uniform(0.5, 1.1, size=(4, 5))
    shifts = rng.normal(size=(4, 3))
    stacked = sd.trajectory_positions(square_team, square_weights, alphas, shifts)
    assert stacked.shape == (4, 13, 3)
    for i in range(4):
        assert np.array_equal(
            stacked[i], sd.forward_pass(square_team, square_weights, alphas[i], shifts[i]))


def test_explicit_weights_round_trip(square_team, square_weights):
    settings = WeightsSettings(
        mode="explicit",
        matrices=(
            (2, {6: {5: 0.25, 1: 0.375, 2: 0.375},
                 7: {5: 0.25, 2: 0.375, 3: 0.375},
                 8: {5: 0.25, 3: 0.375, 4: 0.375},
                 9: {5: 0.25, 4: 0.375, 1: 0.375}}),
            (3, {10: {1: 0.5, 6: 0.5},
                 11: {2: 0.5, 7: 0.5},
                 12: {3: 0.5, 8: 0.5},
                 13: {4: 0.5, 9: 0.5}}),
        ))
    weights = sd.build_layer_weights(square_team, settings)
    assert_stochastic_structure(square_team, weights)
    # layer 2 rows coincide with the auto barycentric derivation
    assert np.max(np.abs(weights.matrices[0] - square_weights.matrices[0])) < 1e-15
    alpha = np.array([0.8, 0.9, 1.0, 1.1, 1.0])
    desired = sd.forward_pass(square_team, weights, alpha, np.array([1.0, -2.0, 0.5]))
    assert np.allclose(desired[9], 0.5 * desired[0] + 0.5 * desired[5], atol=1e-15)


def test_explicit_weights_validation(square_team):
    bad_sum = WeightsSettings(mode="explicit", matrices=(
        (2, {6: {5: 0.5, 1: 0.2}, 7: {5: 1.0}, 8: {5: 1.0}, 9: {5: 1.0}}),
        (3, {10: {6: 1.0}, 11: {7: 1.0}, 12: {8: 1.0}, 13: {9: 1.0}}),
    ))
    with pytest.raises(sd.ScenarioError, match="not row-stochastic"):
        sd.build_layer_weights(square_team, bad_sum)

    missing = WeightsSettings(mode="explicit", matrices=(
        (2, {6: {5: 1.0}, 7: {5: 1.0}, 8: {5: 1.0}}),
        (3, {10: {6: 1.0}, 11: {7: 1.0}, 12: {8: 1.0}, 13: {9: 1.0}}),
    ))
    with pytest.raises(sd.ScenarioError, match="no weights given for agent 9"):
        sd.build_layer_weights(square_team, missing)

    unknown_leader = WeightsSettings(mode="explicit", matrices=(
        (2, {6: {10: 1.0}, 7: {5: 1.0}, 8: {5: 1.0}, 9: {5: 1.0}}),
        (3, {10: {6: 1.0}, 11: {7: 1.0}, 12: {8: 1.0}, 13: {9: 1.0}}),
    ))
    with pytest.raises(sd.ScenarioError, match="references agent 10"):
        sd.build_layer_weights(square_team, unknown_leader)

    too_wide = WeightsSettings(mode="explicit", matrices=(
        (2, {6: {1: 0.25, 2: 0.25, 3: 0.25, 4: 0.25}, 7: {5: 1.0},
             8: {5: 1.0}, 9: {5: 1.0}}),
        (3, {10: {6: 1.0}, 11: {7: 1.0}, 12: {8: 1.0}, 13: {9: 1.0}}),
    ))
    with pytest.raises(sd.ScenarioError, match="more than 3 supporting"):
        sd.build_layer_weights(square_team, too_wide)


def test_barycentric_weights_outside_raises(square_team):
    cell = square_team.cells[0]
    with pytest.raises(sd.ScenarioError, match="outside cell 1"):
        barycentric_weights(np.array([-1.0, -1.0, 0.0]), cell, square_team)
