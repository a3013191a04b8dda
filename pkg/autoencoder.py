"""
Stacked autoencoder that turns a 129-feature dermatology row into a dense
patient vector.

The encoder funnels 129 -> 200 -> 100 -> 50 -> d and the decoder mirrors it
back to 129 through a sigmoid output layer, trained on squared reconstruction
error. The bottleneck activations are the patient vector.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from config import ENCODER_WIDTHS, ENCODING_DIM
from errors import ShapeError, SpecError
from neural import LayerSpec, Network, NetworkSpec, TrainConfig, fit, forward, init_network
from numeric_core import Matrix, RngState


@dataclass(frozen=True)
class AutoencoderSpec:
    """Architecture of a symmetric stacked autoencoder."""

    input_dim: int = 129
    encoder_widths: Tuple[int, ...] = ENCODER_WIDTHS
    encoding_dim: int = ENCODING_DIM
    hidden_activation: str = 'relu'
    bottleneck_activation: str = 'relu'
    output_activation: str = 'sigmoid'

    def __post_init__(self):
        object.__setattr__(self, 'encoder_widths', tuple(int(w) for w in self.encoder_widths))
        if self.input_dim < 1:
            raise SpecError(f"input_dim must be positive, got {self.input_dim}")
        if self.encoding_dim < 1:
            raise SpecError(f"encoding_dim must be at least 1, got {self.encoding_dim}")
        if any(w < 1 for w in self.encoder_widths):
            raise SpecError(f"encoder widths must be positive, got {self.encoder_widths}")
        if self.bottleneck_activation not in ('relu', 'linear', 'sigmoid'):
            raise SpecError(f"unsupported bottleneck activation '{self.bottleneck_activation}'")

    @property
    def decoder_widths(self) -> Tuple[int, ...]:
        return tuple(reversed(self.encoder_widths))

    @property
    def layer_widths(self) -> Tuple[int, ...]:
        """Output width of every layer, bottleneck included, reconstruction last."""
        return self.encoder_widths + (self.encoding_dim,) + self.decoder_widths + (self.input_dim,)

    def network_spec(self) -> NetworkSpec:
        widths = (self.input_dim,) + self.layer_widths
        bottleneck = len(self.encoder_widths)
        layers = []
        for k in range(len(widths) - 1):
            if k == bottleneck:
                activation = self.bottleneck_activation
            elif k == len(widths) - 2:
                activation = self.output_activation
            else:
                activation = self.hidden_activation
            layers.append(LayerSpec(widths[k], widths[k + 1], activation))
        return NetworkSpec(layers=tuple(layers), loss='mean_squared_error')


@dataclass
class PatientVector:
    """Bottleneck code of one input row."""

    values: np.ndarray
    source_row: int

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


def build_autoencoder(spec: AutoencoderSpec, rng: RngState) -> Network:
    """
    Initialize an autoencoder network.

    Args:
        spec: Autoencoder architecture
        rng: Random stream for the weight initialization

    Returns:
        Network with a mean-squared-error loss
    """
    if not isinstance(spec, AutoencoderSpec):
        raise SpecError(f"expected an AutoencoderSpec, got {type(spec).__name__}")
    return init_network(spec.network_spec(), rng)


def encoder_depth(ae: Network) -> int:
    """Number of layers from the input up to and including the bottleneck."""
    n_layers = len(ae.spec.layers)
    if n_layers % 2 or ae.spec.input_dim != ae.spec.output_dim:
        raise SpecError(f"{ae} is not a symmetric autoencoder")
    return n_layers // 2


def encoding_dim(ae: Network) -> int:
    return ae.spec.layers[encoder_depth(ae) - 1].output_dim


def _check_input(ae: Network, x: Matrix):
    if x.ndim != 2 or x.shape[1] != ae.spec.input_dim:
        raise ShapeError(f"autoencoder expects {ae.spec.input_dim} input columns, got shape {x.shape}")


def train_autoencoder(
    ae: Network,
    x: Matrix,
    cfg: TrainConfig,
    verbose: bool = False,
) -> Tuple[Network, List[float]]:
    """
    Fit the autoencoder to reproduce its input.

    Only features are taken; labels never reach the representation.

    Args:
        ae: Initial autoencoder
        x: Feature rows with values in [0, 1]
        cfg: Training settings
        verbose: Show a progress bar

    Returns:
        (trained autoencoder, reconstruction loss per epoch)
    """
    _check_input(ae, x)
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise ValueError("autoencoder inputs must lie in [0, 1]")
    return fit(ae, x, x, cfg, verbose=verbose, desc="Autoencoder")


def encode_matrix(ae: Network, x: Matrix) -> Matrix:
    """Eval-mode bottleneck activations as an (n x d) matrix."""
    _check_input(ae, x)
    return forward(ae, x, mode='eval', upto=encoder_depth(ae)).output


def encode(ae: Network, x: Matrix) -> List[PatientVector]:
    """
    Patient vectors for every input row.

    Args:
        ae: Trained autoencoder
        x: Feature rows

    Returns:
        One PatientVector per row
    """
    codes = encode_matrix(ae, x)
    return [PatientVector(values=codes[i].copy(), source_row=i) for i in range(codes.shape[0])]


def reconstruct(ae: Network, x: Matrix) -> Matrix:
    """Full eval-mode pass: encode then decode."""
    _check_input(ae, x)
    return forward(ae, x, mode='eval').output


def reconstruction_error(ae: Network, x: Matrix) -> float:
    """Mean squared reconstruction error per entry."""
    return float(np.mean((reconstruct(ae, x) - x) ** 2))


def export_patient_vectors(vectors: Sequence[PatientVector], path: str):
    """
    Write patient vectors to CSV: a row index column then one column per code unit.

    Args:
        vectors: Patient vectors of equal dimension
        path: Output CSV path
    """
    if not vectors:
        raise ValueError("no patient vectors to export")
    dim = vectors[0].dim
    if any(v.dim != dim for v in vectors):
        raise ShapeError("patient vectors have differing dimensions")
    frame = pd.DataFrame(
        np.vstack([v.values for v in vectors]),
        columns=[f"z{i}" for i in range(dim)],
    )
    frame.insert(0, "row", [v.source_row for v in vectors])
    frame.to_csv(path, index=False, float_format="%.17g")
