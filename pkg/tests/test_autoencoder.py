import numpy as np
import pandas as pd
import pytest

from autoencoder import (
    AutoencoderSpec,
    build_autoencoder,
    encode,
    encode_matrix,
    encoder_depth,
    encoding_dim,
    export_patient_vectors,
    reconstruct,
    reconstruction_error,
    train_autoencoder,
)
from dermatology_data import decode_one_hot, load_feature_matrix
from errors import ShapeError, SpecError
from neural import TrainConfig, dense_spec, init_network
from numeric_core import RngState


def test_default_layout():
    spec = AutoencoderSpec()
    assert spec.layer_widths == (200, 100, 50, 32, 50, 100, 200, 129)
    network_spec = spec.network_spec()
    assert network_spec.loss == 'mean_squared_error'
    activations = [layer.activation for layer in network_spec.layers]
    assert activations == ['relu'] * 7 + ['sigmoid']


def test_bottleneck_activation_switch():
    spec = AutoencoderSpec(bottleneck_activation='linear')
    assert spec.network_spec().layers[3].activation == 'linear'
    with pytest.raises(SpecError):
        AutoencoderSpec(bottleneck_activation='softmax')
    with pytest.raises(SpecError):
        AutoencoderSpec(encoding_dim=0)


@pytest.mark.parametrize("d", [2, 16, 56])
def test_encoding_width(d):
    ae = build_autoencoder(AutoencoderSpec(encoding_dim=d), RngState(0))
    assert encoder_depth(ae) == 4
    assert encoding_dim(ae) == d
    codes = encode_matrix(ae, np.full((3, 129), 0.5))
    assert codes.shape == (3, d)
    assert codes.min() >= 0.0


def test_training_reduces_reconstruction_error(data_file):
    x = load_feature_matrix(data_file).features
    spec = AutoencoderSpec(encoder_widths=(16,), encoding_dim=4)
    ae = build_autoencoder(spec, RngState(1))
    before = reconstruction_error(ae, x)
    trained, trace = train_autoencoder(ae, x, TrainConfig(epochs=30, batch_size=8, learning_rate=1e-2, seed=2))
    assert len(trace) == 30
    assert reconstruction_error(trained, x) < before
    assert reconstruct(trained, x).shape == x.shape


def test_training_rejects_unscaled_input():
    ae = build_autoencoder(AutoencoderSpec(input_dim=3, encoder_widths=(2,), encoding_dim=1), RngState(0))
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        train_autoencoder(ae, np.array([[0.0, 2.0, 0.5]]), TrainConfig(epochs=1))
    with pytest.raises(ShapeError):
        encode_matrix(ae, np.zeros((1, 4)))


def test_encoder_depth_requires_symmetric_network():
    net = init_network(dense_spec(4, (3,), 2), RngState(0))
    with pytest.raises(SpecError):
        encoder_depth(net)


def test_export_patient_vectors(tmp_path):
    ae = build_autoencoder(AutoencoderSpec(input_dim=5, encoder_widths=(4,), encoding_dim=3), RngState(0))
    x = np.random.default_rng(0).uniform(0, 1, (4, 5))
    vectors = encode(ae, x)
    assert [v.source_row for v in vectors] == [0, 1, 2, 3]
    path = tmp_path / "vectors.csv"
    export_patient_vectors(vectors, str(path))
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["row", "z0", "z1", "z2"]
    np.testing.assert_allclose(frame[["z0", "z1", "z2"]].to_numpy(), encode_matrix(ae, x), rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        export_patient_vectors([], str(path))


@pytest.mark.parametrize("d", [4, 8, 16, 24, 32, 40, 48, 56, 64, 72, 80, 88])
def test_every_sweep_width_encodes_to_d(d):
    ae = build_autoencoder(AutoencoderSpec(encoding_dim=d), RngState(d))
    vectors = encode(ae, np.full((2, 129), 0.25))
    assert encoding_dim(ae) == d
    assert [v.dim for v in vectors] == [d, d]


def test_same_seed_same_initial_weights():
    a = build_autoencoder(AutoencoderSpec(encoding_dim=8), RngState(3))
    b = build_autoencoder(AutoencoderSpec(encoding_dim=8), RngState(3))
    for wa, wb in zip(a.weights, b.weights):
        np.testing.assert_array_equal(wa, wb)


def test_constant_rows_are_reconstructed(data_file):
    row = load_feature_matrix(data_file).features[0]
    x = np.tile(row, (32, 1))
    ae = build_autoencoder(AutoencoderSpec(encoder_widths=(16,), encoding_dim=4), RngState(0))
    trained, trace = train_autoencoder(ae, x, TrainConfig(epochs=300, batch_size=8, learning_rate=0.01, seed=1))
    assert trace[-1] <= trace[0]
    assert reconstruction_error(trained, x) < 1e-3


def test_full_width_code_overfits_ten_rows(data_file):
    x = load_feature_matrix(data_file).features[:10]
    ae = build_autoencoder(AutoencoderSpec(encoder_widths=(), encoding_dim=129), RngState(0))
    assert encoder_depth(ae) == 1
    trained, _ = train_autoencoder(ae, x, TrainConfig(epochs=400, batch_size=5, learning_rate=0.01, seed=1))
    rebuilt = reconstruct(trained, x)
    assert reconstruction_error(trained, x) < 1e-2
    np.testing.assert_array_equal(decode_one_hot(rebuilt), decode_one_hot(x))


def test_encode_is_repeatable(data_file):
    x = load_feature_matrix(data_file).features
    ae = build_autoencoder(AutoencoderSpec(encoder_widths=(16,), encoding_dim=4), RngState(0))
    np.testing.assert_array_equal(encode_matrix(ae, x), encode_matrix(ae, x))
