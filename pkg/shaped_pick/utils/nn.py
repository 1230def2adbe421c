"""Dense networks with hand-written reverse mode and Adam.

Networks are rectifier MLPs with an identity or tanh output layer, stored in
double precision. ``forward`` accepts a single input vector or a batch of row
vectors; ``backward`` sums parameter gradients over the batch.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray

from shaped_pick.core.errors import NonFiniteGradientError, ShapeMismatchError

OutputActivation = Literal["identity", "tanh"]
Array = NDArray[np.float64]

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

__all__ = [
    "AdamState",
    "ForwardCache",
    "MlpParams",
    "adam_from_dict",
    "adam_init",
    "adam_step",
    "adam_to_dict",
    "backward",
    "forward",
    "init",
    "params_from_dict",
    "params_to_dict",
]


@dataclass(frozen=True, slots=True, eq=False)
class MlpParams:
    layer_sizes: tuple[int, ...]
    weights: tuple[Array, ...]
    biases: tuple[Array, ...]
    output_activation: OutputActivation = "identity"
    hidden_activation: str = "relu"

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(
            self.weights
        ):
            raise ShapeMismatchError("one weight matrix and bias per layer required")
        for index, (weight, bias) in enumerate(zip(self.weights, self.biases, strict=True)):
            fan_in, fan_out = self.layer_sizes[index], self.layer_sizes[index + 1]
            if weight.shape != (fan_out, fan_in) or bias.shape != (fan_out,):
                raise ShapeMismatchError(
                    f"layer {index}: expected {(fan_out, fan_in)} and {(fan_out,)}, "
                    f"got {weight.shape} and {bias.shape}"
                )

    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    def arrays(self) -> list[Array]:
        """Flat parameter list, weights and biases interleaved per layer."""

        flat: list[Array] = []
        for weight, bias in zip(self.weights, self.biases, strict=True):
            flat.extend((weight, bias))
        return flat

    def with_arrays(self, arrays: Sequence[Array]) -> MlpParams:
        return MlpParams(
            layer_sizes=self.layer_sizes,
            weights=tuple(arrays[0::2]),
            biases=tuple(arrays[1::2]),
            output_activation=self.output_activation,
            hidden_activation=self.hidden_activation,
        )

    def zeros_like(self) -> MlpParams:
        return self.with_arrays([np.zeros_like(array) for array in self.arrays()])

    def copy(self) -> MlpParams:
        return self.with_arrays([array.copy() for array in self.arrays()])


@dataclass(frozen=True, slots=True)
class ForwardCache:
    inputs: tuple[Array, ...]
    pre_activations: tuple[Array, ...]
    outputs: Array
    batched: bool


@dataclass(frozen=True, slots=True, eq=False)
class AdamState:
    first_moment: tuple[Array, ...]
    second_moment: tuple[Array, ...]
    step_count: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    epsilon: float = ADAM_EPSILON


def init(
    layer_sizes: Sequence[int],
    output_activation: OutputActivation,
    rng: np.random.Generator,
) -> MlpParams:
    """Glorot-uniform weights, zero biases."""

    sizes = tuple(int(size) for size in layer_sizes)
    if len(sizes) < 2:
        raise ValueError("a network needs at least an input and an output size")
    if any(size < 1 for size in sizes):
        raise ValueError(f"layer sizes must be positive, got {sizes}")
    if output_activation not in ("identity", "tanh"):
        raise ValueError(f"unknown output activation '{output_activation}'")

    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:], strict=True):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams(
        layer_sizes=sizes,
        weights=tuple(weights),
        biases=tuple(biases),
        output_activation=output_activation,
    )


def forward(params: MlpParams, inputs: Array) -> tuple[Array, ForwardCache]:
    values = np.asarray(inputs, dtype=np.float64)
    batched = values.ndim == 2
    if not batched:
        values = values[np.newaxis, :]
    if values.ndim != 2 or values.shape[1] != params.input_size:
        raise ShapeMismatchError(
            f"expected input width {params.input_size}, got shape {np.shape(inputs)}"
        )

    layer_inputs = []
    pre_activations = []
    last = len(params.weights) - 1
    for index, (weight, bias) in enumerate(zip(params.weights, params.biases, strict=True)):
        layer_inputs.append(values)
        pre = values @ weight.T + bias
        pre_activations.append(pre)
        if index < last:
            values = np.maximum(pre, 0.0)
        elif params.output_activation == "tanh":
            values = np.tanh(pre)
        else:
            values = pre

    cache = ForwardCache(
        inputs=tuple(layer_inputs),
        pre_activations=tuple(pre_activations),
        outputs=values,
        batched=batched,
    )
    return (values if batched else values[0]), cache


def backward(
    params: MlpParams,
    cache: ForwardCache,
    output_gradient: Array,
) -> tuple[MlpParams, Array]:
    """Reverse-mode gradients of the scalar whose output gradient is given.

    Returns the parameter gradients packed as an ``MlpParams`` and the
    gradient with respect to the network input (same batching as ``forward``).
    """

    grad = np.asarray(output_gradient, dtype=np.float64)
    if not cache.batched:
        grad = grad[np.newaxis, :]
    if grad.shape != cache.outputs.shape:
        raise ShapeMismatchError(
            f"output gradient shape {np.shape(output_gradient)} does not match the forward pass"
        )

    if params.output_activation == "tanh":
        grad = grad * (1.0 - cache.outputs**2)

    weight_grads: list[Array] = [np.empty(0)] * len(params.weights)
    bias_grads: list[Array] = [np.empty(0)] * len(params.weights)
    for index in range(len(params.weights) - 1, -1, -1):
        if index < len(params.weights) - 1:
            grad = grad * (cache.pre_activations[index] > 0.0)
        weight_grads[index] = grad.T @ cache.inputs[index]
        bias_grads[index] = grad.sum(axis=0)
        grad = grad @ params.weights[index]

    gradients = MlpParams(
        layer_sizes=params.layer_sizes,
        weights=tuple(weight_grads),
        biases=tuple(bias_grads),
        output_activation=params.output_activation,
        hidden_activation=params.hidden_activation,
    )
    return gradients, (grad if cache.batched else grad[0])


def adam_init(params: MlpParams) -> AdamState:
    zeros = tuple(np.zeros_like(array) for array in params.arrays())
    return AdamState(first_moment=zeros, second_moment=tuple(z.copy() for z in zeros))


def adam_step(
    params: MlpParams,
    gradients: MlpParams,
    state: AdamState,
    learning_rate: float,
) -> tuple[MlpParams, AdamState]:
    """Bias-corrected Adam; returns new parameters and state, inputs untouched."""

    grads = gradients.arrays()
    values = params.arrays()
    if len(grads) != len(values) or len(state.first_moment) != len(values):
        raise ShapeMismatchError("gradients, parameters and Adam state disagree on layers")
    for grad, value in zip(grads, values, strict=True):
        if grad.shape != value.shape:
            raise ShapeMismatchError(f"gradient shape {grad.shape} != parameter {value.shape}")
        if not np.all(np.isfinite(grad)):
            raise NonFiniteGradientError("non-finite gradient passed to Adam")

    step_count = state.step_count + 1
    correction1 = 1.0 - state.beta1**step_count
    correction2 = 1.0 - state.beta2**step_count
    new_values = []
    first_moments = []
    second_moments = []
    for value, grad, m, v in zip(
        values, grads, state.first_moment, state.second_moment, strict=True
    ):
        m_new = state.beta1 * m + (1.0 - state.beta1) * grad
        v_new = state.beta2 * v + (1.0 - state.beta2) * grad**2
        m_hat = m_new / correction1
        v_hat = v_new / correction2
        new_values.append(value - learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon))
        first_moments.append(m_new)
        second_moments.append(v_new)

    new_state = AdamState(
        first_moment=tuple(first_moments),
        second_moment=tuple(second_moments),
        step_count=step_count,
        beta1=state.beta1,
        beta2=state.beta2,
        epsilon=state.epsilon,
    )
    return params.with_arrays(new_values), new_state


def params_to_dict(params: MlpParams) -> dict[str, Any]:
    # json encodes floats with repr, which round-trips float64 bit for bit
    return {
        "layer_sizes": list(params.layer_sizes),
        "hidden_activation": params.hidden_activation,
        "output_activation": params.output_activation,
        "weights": [weight.tolist() for weight in params.weights],
        "biases": [bias.tolist() for bias in params.biases],
    }


def params_from_dict(payload: dict[str, Any]) -> MlpParams:
    try:
        return MlpParams(
            layer_sizes=tuple(int(size) for size in payload["layer_sizes"]),
            weights=tuple(np.array(weight, dtype=np.float64) for weight in payload["weights"]),
            biases=tuple(np.array(bias, dtype=np.float64) for bias in payload["biases"]),
            output_activation=payload["output_activation"],
            hidden_activation=payload.get("hidden_activation", "relu"),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ShapeMismatchError(f"malformed network payload: {exc}") from exc


def adam_to_dict(state: AdamState) -> dict[str, Any]:
    return {
        "step_count": state.step_count,
        "beta1": state.beta1,
        "beta2": state.beta2,
        "epsilon": state.epsilon,
        "first_moment": [moment.tolist() for moment in state.first_moment],
        "second_moment": [moment.tolist() for moment in state.second_moment],
    }


def adam_from_dict(payload: dict[str, Any], params: MlpParams) -> AdamState:
    shapes = [array.shape for array in params.arrays()]

    def _restore(key: str) -> tuple[Array, ...]:
        moments = payload[key]
        if len(moments) != len(shapes):
            raise ShapeMismatchError(f"{key} has {len(moments)} arrays, expected {len(shapes)}")
        return tuple(
            np.array(moment, dtype=np.float64).reshape(shape)
            for moment, shape in zip(moments, shapes, strict=True)
        )

    try:
        return AdamState(
            first_moment=_restore("first_moment"),
            second_moment=_restore("second_moment"),
            step_count=int(payload["step_count"]),
            beta1=float(payload["beta1"]),
            beta2=float(payload["beta2"]),
            epsilon=float(payload["epsilon"]),
        )
    except (KeyError, ValueError) as exc:
        raise ShapeMismatchError(f"malformed Adam payload: {exc}") from exc
