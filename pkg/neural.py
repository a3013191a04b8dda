"""
Feed-forward neural networks trained with mini-batch gradient descent.

Networks are plain numpy parameter lists described by a NetworkSpec. The
module covers construction, forward propagation with inverted dropout,
softmax cross-entropy and mean-squared-error losses, exact backpropagation,
SGD and Adam updates, prediction, and a versioned on-disk format.

Usage:
    from neural import LayerSpec, NetworkSpec, TrainConfig, init_network, fit, predict_classes
    from numeric_core import RngState

    spec = NetworkSpec(
        layers=(LayerSpec(129, 100, 'relu', dropout_rate=0.5), LayerSpec(100, 6, 'softmax')),
        loss='softmax_cross_entropy',
    )
    net = init_network(spec, RngState.from_seed(42))
    net, trace = fit(net, x, one_hot(y, 6), TrainConfig(seed=7))
    labels = predict_classes(net, x_test)
"""

import json
from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from config import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPSILON,
    BATCH_SIZE,
    EPOCHS,
    LEARNING_RATE,
    LOG_FLOOR,
)
from errors import DivergenceError, ShapeError, SpecError
from numeric_core import Matrix, RngState

ACTIVATIONS = ('relu', 'sigmoid', 'softmax', 'linear')
LOSSES = ('softmax_cross_entropy', 'mean_squared_error')
OPTIMIZERS = ('sgd', 'adam')

NETWORK_FORMAT = "derm2vec-network"
NETWORK_FORMAT_VERSION = 1


@dataclass(frozen=True)
class LayerSpec:
    """One dense layer: affine map, activation, optional dropout on its output."""

    input_dim: int
    output_dim: int
    activation: str = 'relu'
    dropout_rate: float = 0.0

    def __post_init__(self):
        if self.input_dim < 1 or self.output_dim < 1:
            raise SpecError(f"layer dims must be positive, got {self.input_dim}->{self.output_dim}")
        if self.activation not in ACTIVATIONS:
            raise SpecError(f"unknown activation '{self.activation}', expected one of {ACTIVATIONS}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise SpecError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")


@dataclass(frozen=True)
class NetworkSpec:
    """Ordered layers plus the training loss."""

    layers: Tuple[LayerSpec, ...]
    loss: str = 'softmax_cross_entropy'

    def __post_init__(self):
        object.__setattr__(self, 'layers', tuple(self.layers))
        if not self.layers:
            raise SpecError("a network needs at least one layer")
        if self.loss not in LOSSES:
            raise SpecError(f"unknown loss '{self.loss}', expected one of {LOSSES}")
        for k, (layer, following) in enumerate(zip(self.layers, self.layers[1:])):
            if layer.output_dim != following.input_dim:
                raise SpecError(
                    f"layer {k} outputs {layer.output_dim} units but layer {k + 1} expects {following.input_dim}"
                )
        for k, layer in enumerate(self.layers[:-1]):
            if layer.activation == 'softmax':
                raise SpecError(f"softmax is only allowed on the final layer (found on layer {k})")
        if self.layers[-1].dropout_rate > 0:
            raise SpecError("dropout is not allowed on the output layer")
        if self.loss == 'softmax_cross_entropy' and self.layers[-1].activation != 'softmax':
            raise SpecError("softmax_cross_entropy requires a softmax output layer")

    @property
    def input_dim(self) -> int:
        return self.layers[0].input_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].output_dim

    @property
    def widths(self) -> Tuple[int, ...]:
        """Output width of every layer."""
        return tuple(layer.output_dim for layer in self.layers)

    def to_dict(self) -> dict:
        return {'layers': [asdict(layer) for layer in self.layers], 'loss': self.loss}

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkSpec":
        return cls(layers=tuple(LayerSpec(**layer) for layer in data['layers']), loss=data['loss'])


def dense_spec(
    input_dim: int,
    hidden: Sequence[int],
    output_dim: int,
    hidden_activation: str = 'relu',
    dropout_rate: float = 0.0,
    output_activation: str = 'softmax',
    loss: str = 'softmax_cross_entropy',
) -> NetworkSpec:
    """
    Build a spec for a plain multilayer perceptron.

    Args:
        input_dim: Input width
        hidden: Hidden layer widths, e.g. (100,) or (100, 100)
        output_dim: Output width
        hidden_activation: Activation of every hidden layer
        dropout_rate: Dropout applied to every hidden layer's output
        output_activation: Activation of the output layer
        loss: Training loss

    Returns:
        NetworkSpec
    """
    widths = [input_dim] + list(hidden)
    layers = [
        LayerSpec(widths[k], widths[k + 1], hidden_activation, dropout_rate)
        for k in range(len(hidden))
    ]
    layers.append(LayerSpec(widths[-1], output_dim, output_activation))
    return NetworkSpec(layers=tuple(layers), loss=loss)


def parameter_count(spec: NetworkSpec) -> int:
    return sum(layer.input_dim * layer.output_dim + layer.output_dim for layer in spec.layers)


@dataclass
class Network:
    """A NetworkSpec with realized parameters; biases are 1 x output_dim rows."""

    spec: NetworkSpec
    weights: List[Matrix]
    biases: List[Matrix]

    def copy(self) -> "Network":
        return Network(
            spec=self.spec,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )

    def __repr__(self):
        dims = "->".join(str(d) for d in (self.spec.input_dim,) + self.spec.widths)
        return f"Network({dims}, loss={self.spec.loss})"


@dataclass
class TrainConfig:
    """Optimizer and schedule settings for one fit call."""

    epochs: int = EPOCHS
    batch_size: int = BATCH_SIZE
    learning_rate: float = LEARNING_RATE
    optimizer: str = 'adam'
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    epsilon: float = ADAM_EPSILON
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 0:
            raise SpecError(f"epochs must be non-negative, got {self.epochs}")
        if self.batch_size < 1:
            raise SpecError(f"batch_size must be positive, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise SpecError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.optimizer not in OPTIMIZERS:
            raise SpecError(f"unknown optimizer '{self.optimizer}', expected one of {OPTIMIZERS}")

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, seed=int(seed))


@dataclass
class ForwardPass:
    """
    Everything backward() needs from a forward pass.

    activations[0] is the input; activations[k + 1] is layer k's output after
    dropout. outputs[k] is layer k's output before dropout, and masks[k] the
    scaled keep mask (or None) applied to it.
    """

    activations: List[Matrix]
    pre_activations: List[Matrix]
    outputs: List[Matrix]
    masks: List[Optional[Matrix]] = field(default_factory=list)

    @property
    def output(self) -> Matrix:
        return self.activations[-1]


@dataclass
class Gradients:
    weights: List[Matrix]
    biases: List[Matrix]


def init_network(spec: NetworkSpec, rng: RngState) -> Network:
    """
    Glorot-uniform weights and zero biases.

    Weights of a layer are drawn from U(-b, b) with b = sqrt(6 / (fan_in + fan_out)).

    Args:
        spec: Network specification
        rng: Random stream, consumed layer by layer

    Returns:
        Network
    """
    if not isinstance(spec, NetworkSpec):
        raise SpecError(f"expected a NetworkSpec, got {type(spec).__name__}")

    weights, biases = [], []
    for layer in spec.layers:
        bound = np.sqrt(6.0 / (layer.input_dim + layer.output_dim))
        weights.append(rng.uniform(-bound, bound, (layer.input_dim, layer.output_dim)))
        biases.append(np.zeros((1, layer.output_dim), dtype=np.float64))
    return Network(spec=spec, weights=weights, biases=biases)


def _activate(z: Matrix, activation: str) -> Matrix:
    if activation == 'relu':
        return np.maximum(z, 0.0)
    if activation == 'sigmoid':
        # tanh form does not overflow for large |z|
        return 0.5 * (1.0 + np.tanh(0.5 * z))
    if activation == 'softmax':
        shifted = z - z.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        return exp / exp.sum(axis=1, keepdims=True)
    return z.copy()


def _activation_backward(d_out: Matrix, z: Matrix, out: Matrix, activation: str) -> Matrix:
    """Gradient w.r.t. the pre-activation given the gradient w.r.t. the activation output."""
    if activation == 'relu':
        return d_out * (z > 0)
    if activation == 'sigmoid':
        return d_out * out * (1.0 - out)
    if activation == 'softmax':
        return out * (d_out - np.sum(d_out * out, axis=1, keepdims=True))
    return d_out


def forward(
    net: Network,
    x: Matrix,
    mode: str = 'eval',
    rng: Optional[RngState] = None,
    masks: Optional[Sequence[Optional[Matrix]]] = None,
    upto: Optional[int] = None,
) -> ForwardPass:
    """
    Forward propagation.

    In 'train' mode every layer with a dropout rate p draws a keep mask with
    probability 1 - p per unit and scales survivors by 1 / (1 - p). Fixed masks
    (already scaled) may be passed instead of a random stream, which freezes
    dropout for gradient checks. 'eval' mode never masks and never reads rng.

    Args:
        net: Network
        x: Input rows (n x input_dim)
        mode: 'train' or 'eval'
        rng: Random stream for dropout masks (train mode)
        masks: Optional per-layer fixed masks (train mode)
        upto: Stop after this many layers (None = all)

    Returns:
        ForwardPass
    """
    if mode not in ('train', 'eval'):
        raise ValueError(f"Unknown forward mode: {mode}. Supported modes: 'train', 'eval'")
    if x.ndim != 2 or x.shape[1] != net.spec.input_dim:
        raise ShapeError(f"network expects {net.spec.input_dim} input columns, got shape {x.shape}")

    n_layers = len(net.spec.layers) if upto is None else upto
    activations = [x]
    pre_activations, outputs, used_masks = [], [], []

    a = x
    for k in range(n_layers):
        layer = net.spec.layers[k]
        z = a @ net.weights[k] + net.biases[k]
        h = _activate(z, layer.activation)
        mask = None
        if mode == 'train' and layer.dropout_rate > 0:
            if masks is not None:
                mask = masks[k]
            elif rng is not None:
                keep = 1.0 - layer.dropout_rate
                mask = rng.keep_mask(h.shape, keep) / keep
            else:
                raise ValueError("train mode with dropout needs an rng or fixed masks")
        a = h * mask if mask is not None else h
        pre_activations.append(z)
        outputs.append(h)
        used_masks.append(mask)
        activations.append(a)

    return ForwardPass(activations=activations, pre_activations=pre_activations,
                       outputs=outputs, masks=used_masks)


def loss_value(net_output: Matrix, targets: Matrix, loss: str) -> float:
    """
    Mean loss over rows.

    Cross-entropy clamps probabilities at LOG_FLOOR before the log. Squared
    error is averaged over every entry.

    Args:
        net_output: Network outputs
        targets: Targets of the same shape (one-hot rows for cross-entropy)
        loss: 'softmax_cross_entropy' or 'mean_squared_error'

    Returns:
        Non-negative loss
    """
    if net_output.shape != targets.shape:
        raise ShapeError(f"outputs {net_output.shape} and targets {targets.shape} differ")
    if loss == 'softmax_cross_entropy':
        log_p = np.log(np.maximum(net_output, LOG_FLOOR))
        return float(-np.sum(targets * log_p) / net_output.shape[0])
    if loss == 'mean_squared_error':
        return float(np.mean((net_output - targets) ** 2))
    raise SpecError(f"unknown loss '{loss}', expected one of {LOSSES}")


def backward(net: Network, passed: ForwardPass, targets: Matrix) -> Gradients:
    """
    Exact gradients of the configured loss for every weight and bias.

    Dropout masks recorded in the forward pass are reused.

    Args:
        net: Network that produced the forward pass
        passed: Result of forward() on the same network
        targets: Targets matching the network output

    Returns:
        Gradients with the shapes of net.weights / net.biases
    """
    output = passed.output
    if output.shape != targets.shape:
        raise ShapeError(f"outputs {output.shape} and targets {targets.shape} differ")
    n_layers = len(passed.pre_activations)
    if n_layers != len(net.spec.layers):
        raise ShapeError("backward needs a full forward pass")

    n = output.shape[0]
    last = net.spec.layers[-1]
    if net.spec.loss == 'softmax_cross_entropy':
        dz = (output - targets) / n
    else:
        d_out = 2.0 * (output - targets) / output.size
        dz = _activation_backward(d_out, passed.pre_activations[-1], passed.outputs[-1], last.activation)

    weight_grads = [None] * n_layers
    bias_grads = [None] * n_layers
    for k in range(n_layers - 1, -1, -1):
        weight_grads[k] = passed.activations[k].T @ dz
        bias_grads[k] = dz.sum(axis=0, keepdims=True)
        if k == 0:
            break
        da = dz @ net.weights[k].T
        if passed.masks[k - 1] is not None:
            da = da * passed.masks[k - 1]
        layer = net.spec.layers[k - 1]
        dz = _activation_backward(da, passed.pre_activations[k - 1], passed.outputs[k - 1], layer.activation)

    return Gradients(weights=weight_grads, biases=bias_grads)


class SgdOptimizer:
    """Plain gradient descent."""

    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, net: Network, grads: Gradients):
        for k in range(len(net.weights)):
            net.weights[k] -= self.learning_rate * grads.weights[k]
            net.biases[k] -= self.learning_rate * grads.biases[k]


class AdamOptimizer:
    """Adaptive moment estimation with bias correction."""

    def __init__(self, net: Network, learning_rate: float, beta1: float, beta2: float, epsilon: float):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        self.m = [np.zeros_like(p) for p in net.weights + net.biases]
        self.v = [np.zeros_like(p) for p in net.weights + net.biases]

    def step(self, net: Network, grads: Gradients):
        self.t += 1
        params = net.weights + net.biases
        grad_list = grads.weights + grads.biases
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for i, (param, grad) in enumerate(zip(params, grad_list)):
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad * grad
            m_hat = self.m[i] / correction1
            v_hat = self.v[i] / correction2
            param -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


def make_optimizer(net: Network, cfg: TrainConfig):
    if cfg.optimizer == 'sgd':
        return SgdOptimizer(cfg.learning_rate)
    return AdamOptimizer(net, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)


def fit(
    net: Network,
    x: Matrix,
    y: Matrix,
    cfg: TrainConfig,
    verbose: bool = False,
    desc: str = "Training",
) -> Tuple[Network, List[float]]:
    """
    Mini-batch training.

    The input network is left untouched; a trained copy is returned. Shuffling
    and dropout draw from separate streams derived from cfg.seed, so the result
    depends only on (spec, initial parameters, data, cfg).

    Args:
        net: Initial network
        x: Inputs (n x input_dim)
        y: Targets (n x output_dim)
        cfg: Training settings
        verbose: Show a progress bar over epochs
        desc: Progress bar label

    Returns:
        (trained network, mean training loss per epoch)
    """
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
    if y.shape[1] != net.spec.output_dim:
        raise ShapeError(f"network outputs {net.spec.output_dim} columns, targets have {y.shape[1]}")

    trained = net.copy()
    trace: List[float] = []
    n = x.shape[0]
    if cfg.epochs == 0 or n == 0:
        return trained, trace

    root = RngState.from_seed(cfg.seed)
    shuffle_rng = root.child("shuffle")
    dropout_rng = root.child("dropout")
    optimizer = make_optimizer(trained, cfg)

    epochs = range(1, cfg.epochs + 1)
    for epoch in tqdm(epochs, desc=desc, disable=not verbose, leave=False):
        order = shuffle_rng.permutation(n) if cfg.shuffle else np.arange(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            xb, yb = x[batch], y[batch]
            passed = forward(trained, xb, mode='train', rng=dropout_rng)
            batch_loss = loss_value(passed.output, yb, trained.spec.loss)
            if not np.isfinite(batch_loss):
                raise DivergenceError(epoch, cfg.learning_rate)
            optimizer.step(trained, backward(trained, passed, yb))
            total += batch_loss * len(batch)
        epoch_loss = total / n
        if not np.isfinite(epoch_loss) or not all(np.all(np.isfinite(w)) for w in trained.weights):
            raise DivergenceError(epoch, cfg.learning_rate)
        trace.append(epoch_loss)

    return trained, trace


def predict_proba(net: Network, x: Matrix) -> Matrix:
    """Eval-mode network output."""
    return forward(net, x, mode='eval').output


def predict_classes(net: Network, x: Matrix) -> np.ndarray:
    """Arg-max class per row; ties go to the lowest index."""
    if x.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.argmax(predict_proba(net, x), axis=1).astype(np.int64)


def one_hot(labels: Sequence[int], n_classes: int) -> Matrix:
    """One-hot rows for integer labels in 0..n_classes-1."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(f"labels must lie in 0..{n_classes - 1}")
    return np.eye(n_classes, dtype=np.float64)[labels]


def flatten_parameters(net: Network) -> np.ndarray:
    """All weights then all biases as one vector."""
    return np.concatenate([p.ravel() for p in net.weights + net.biases])


def unflatten_parameters(net: Network, vector: np.ndarray) -> Network:
    """Network with the same spec whose parameters are read from a flat vector."""
    vector = np.asarray(vector, dtype=np.float64)
    shapes = [w.shape for w in net.weights] + [b.shape for b in net.biases]
    expected = sum(int(np.prod(shape)) for shape in shapes)
    if vector.size != expected:
        raise ShapeError(f"expected {expected} parameters, got {vector.size}")
    params, offset = [], 0
    for shape in shapes:
        size = int(np.prod(shape))
        params.append(vector[offset:offset + size].reshape(shape).copy())
        offset += size
    n_layers = len(net.weights)
    return Network(spec=net.spec, weights=params[:n_layers], biases=params[n_layers:])


def flatten_gradients(grads: Gradients) -> np.ndarray:
    return np.concatenate([g.ravel() for g in grads.weights + grads.biases])


def save_network(net: Network, path: str):
    """
    Save a network to a .npz container.

    The container holds the format name and version, the spec as JSON, and
    arrays w0..wN / b0..bN.

    Args:
        net: Network to save
        path: Output file path
    """
    arrays = {f"w{k}": w for k, w in enumerate(net.weights)}
    arrays.update({f"b{k}": b for k, b in enumerate(net.biases)})
    header = json.dumps({
        'format': NETWORK_FORMAT,
        'version': NETWORK_FORMAT_VERSION,
        'spec': net.spec.to_dict(),
    }, sort_keys=True)
    with open(path, 'wb') as f:
        np.savez(f, header=np.array(header), **arrays)


def load_network(path: str) -> Network:
    """
    Load a network written by save_network.

    Args:
        path: Path to the .npz file

    Returns:
        Network
    """
    with np.load(path, allow_pickle=False) as archive:
        header = json.loads(str(archive['header']))
        if header.get('format') != NETWORK_FORMAT:
            raise ValueError(f"{path} is not a {NETWORK_FORMAT} file")
        if header.get('version') != NETWORK_FORMAT_VERSION:
            raise ValueError(
                f"{path}: unsupported format version {header.get('version')} "
                f"(expected {NETWORK_FORMAT_VERSION})"
            )
        spec = NetworkSpec.from_dict(header['spec'])
        n_layers = len(spec.layers)
        weights = [archive[f"w{k}"].astype(np.float64) for k in range(n_layers)]
        biases = [archive[f"b{k}"].astype(np.float64) for k in range(n_layers)]
    for k, (layer, w) in enumerate(zip(spec.layers, weights)):
        if w.shape != (layer.input_dim, layer.output_dim):
            raise ShapeError(f"{path}: layer {k} weights have shape {w.shape}")
    return Network(spec=spec, weights=weights, biases=biases)
