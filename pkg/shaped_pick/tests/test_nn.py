from __future__ import annotations

import numpy as np
import pytest

from shaped_pick.core.errors import NonFiniteGradientError, ShapeMismatchError
from shaped_pick.core.seeding import derive_rng
from shaped_pick.utils import nn

STEP = 1e-5


def _loss(params: nn.MlpParams, inputs: np.ndarray, weights: np.ndarray) -> float:
    outputs, _ = nn.forward(params, inputs)
    return float(np.sum(outputs * weights))


def _relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))


def test_gradients_match_central_differences() -> None:
    rng = derive_rng(99)
    for trial in range(100):
        depth = int(rng.integers(1, 4))
        sizes = [int(size) for size in rng.integers(1, 9, size=depth + 1)]
        activation = "tanh" if trial % 2 else "identity"
        params = nn.init(sizes, activation, rng)
        # nudge biases off zero so relu kinks are unlikely to sit at the probe point
        params = params.with_arrays(
            [
                array if index % 2 == 0 else rng.normal(0.0, 0.1, size=array.shape)
                for index, array in enumerate(params.arrays())
            ]
        )
        inputs = rng.normal(size=(3, sizes[0]))
        weights = rng.normal(size=(3, sizes[-1]))

        _, cache = nn.forward(params, inputs)
        grads, input_grad = nn.backward(params, cache, weights)

        arrays = params.arrays()
        for array_index, (array, grad) in enumerate(
            zip(arrays, grads.arrays(), strict=True)
        ):
            for flat_index in range(array.size):
                bumped_up = [a.copy() for a in arrays]
                bumped_down = [a.copy() for a in arrays]
                bumped_up[array_index].flat[flat_index] += STEP
                bumped_down[array_index].flat[flat_index] -= STEP
                numeric = (
                    _loss(params.with_arrays(bumped_up), inputs, weights)
                    - _loss(params.with_arrays(bumped_down), inputs, weights)
                ) / (2 * STEP)
                analytic = float(grad.flat[flat_index])
                assert _relative_error(analytic, numeric) <= 1e-4 or abs(
                    analytic - numeric
                ) <= 1e-9

        probe = inputs.copy()
        probe[0, 0] += STEP
        down = inputs.copy()
        down[0, 0] -= STEP
        numeric_input = (_loss(params, probe, weights) - _loss(params, down, weights)) / (
            2 * STEP
        )
        assert abs(input_grad[0, 0] - numeric_input) <= 1e-6


def test_forward_single_vector_matches_batch_row() -> None:
    params = nn.init([5, 7, 3], "tanh", derive_rng(1))
    batch = derive_rng(2).normal(size=(4, 5))

    batched, _ = nn.forward(params, batch)
    single, _ = nn.forward(params, batch[2])

    assert single.shape == (3,)
    np.testing.assert_allclose(single, batched[2], rtol=0, atol=1e-12)
    assert np.all(np.abs(batched) < 1.0)


def test_init_uses_glorot_bounds_and_zero_biases() -> None:
    params = nn.init([17, 64, 4], "tanh", derive_rng(4))

    assert params.weights[0].shape == (64, 17)
    assert np.max(np.abs(params.weights[0])) <= np.sqrt(6.0 / (17 + 64))
    assert all(np.all(bias == 0.0) for bias in params.biases)


@pytest.mark.parametrize("sizes", [[4], [4, 0, 2], []])
def test_init_rejects_bad_layer_sizes(sizes: list[int]) -> None:
    with pytest.raises(ValueError):
        nn.init(sizes, "identity", derive_rng(0))


def test_forward_rejects_wrong_input_width() -> None:
    params = nn.init([3, 2], "identity", derive_rng(0))

    with pytest.raises(ShapeMismatchError):
        nn.forward(params, np.zeros(4))


def test_adam_first_step_moves_each_parameter_by_learning_rate() -> None:
    params = nn.init([2, 3, 1], "identity", derive_rng(6))
    grads = params.with_arrays([np.full(a.shape, 0.5) for a in params.arrays()])

    updated, state = nn.adam_step(params, grads, nn.adam_init(params), 1e-3)

    assert state.step_count == 1
    for before, after in zip(params.arrays(), updated.arrays(), strict=True):
        assert after == pytest.approx(before - 1e-3, abs=1e-9)


def test_adam_leaves_inputs_untouched() -> None:
    params = nn.init([2, 2], "identity", derive_rng(6))
    snapshot = [a.copy() for a in params.arrays()]
    state = nn.adam_init(params)
    grads = params.with_arrays([np.ones(a.shape) for a in params.arrays()])

    nn.adam_step(params, grads, state, 0.1)

    assert all(np.array_equal(a, b) for a, b in zip(snapshot, params.arrays(), strict=True))
    assert state.step_count == 0


def test_adam_minimizes_a_quadratic() -> None:
    params = nn.init([1, 1], "identity", derive_rng(3))
    state = nn.adam_init(params)
    target = 2.5
    for _ in range(3000):
        grads = params.with_arrays([2.0 * (params.weights[0] - target), np.zeros(1)])
        params, state = nn.adam_step(params, grads, state, 0.01)

    assert params.weights[0][0, 0] == pytest.approx(target, abs=1e-2)


def test_adam_rejects_non_finite_gradients() -> None:
    params = nn.init([2, 1], "identity", derive_rng(0))
    grads = params.with_arrays([np.full(a.shape, np.nan) for a in params.arrays()])

    with pytest.raises(NonFiniteGradientError):
        nn.adam_step(params, grads, nn.adam_init(params), 1e-3)


def test_adam_rejects_mismatched_shapes() -> None:
    params = nn.init([2, 1], "identity", derive_rng(0))
    other = nn.init([3, 1], "identity", derive_rng(0))

    with pytest.raises(ShapeMismatchError):
        nn.adam_step(params, other.zeros_like(), nn.adam_init(params), 1e-3)


def test_params_and_adam_survive_serialization_bit_for_bit() -> None:
    params = nn.init([4, 6, 2], "tanh", derive_rng(12))
    grads = params.with_arrays([np.full(a.shape, 0.3) for a in params.arrays()])
    _, state = nn.adam_step(params, grads, nn.adam_init(params), 1e-3)

    restored = nn.params_from_dict(nn.params_to_dict(params))
    restored_state = nn.adam_from_dict(nn.adam_to_dict(state), restored)

    assert restored.output_activation == "tanh"
    for a, b in zip(params.arrays(), restored.arrays(), strict=True):
        assert np.array_equal(a, b)
    for a, b in zip(state.second_moment, restored_state.second_moment, strict=True):
        assert np.array_equal(a, b)
    assert restored_state.step_count == 1
