# -*- coding: utf-8 -*-
"""Tests for the xai module.

BSD 3-Clause License
Copyright (c) 2024, ferhelper developers
All rights reserved.

"""
import numpy as np
import pytest

from ferhelper import xai
from ferhelper.data.labels import ClassLabel
from ferhelper.exceptions import ConfigError, ShapeError, UnsupportedModelError
from ferhelper.models import ModelSpec, build
from ferhelper.tensor import (
    Tensor,
    backward,
    default_dtype,
    no_grad,
    tensor_sum,
)
from ferhelper.utils.tests import is_normalized_map, numerical_gradient

TOY_SPEC = ModelSpec(conv_blocks=2, input_shape=(3, 8, 8), fc_layers=1)


@pytest.fixture
def toy_model():
    """Build a small GiMeFive model in double precision."""
    with default_dtype(np.float64):
        model = build(TOY_SPEC).astype(np.float64)
        # non-trivial batch norm statistics
        model(Tensor(np.random.default_rng(9).standard_normal((4, 3, 8, 8))))
        yield model


@pytest.fixture
def image():
    """Create a random input image."""
    with default_dtype(np.float64):
        return Tensor(np.random.default_rng(3).standard_normal((1, 3, 8, 8)))


@pytest.mark.parametrize('target', [0, 4, 'auto'])
def test_grad_cam(toy_model, image, target):
    """Test Grad-CAM against finite differences of the target logit."""
    cam = xai.grad_cam(toy_model, image, target=target)
    assert cam.shape == (4, 4)
    assert is_normalized_map(cam.values)

    toy_model.eval()
    with no_grad():
        logits = toy_model(image, capture=('conv2',)).numpy()[0]
    activation = toy_model.activations['conv2'].numpy()[0].copy()
    expected_class = int(logits.argmax()) if target == 'auto' else target
    assert cam.target_class == expected_class

    def target_logit():
        with no_grad():
            return toy_model.forward_from(
                'conv2', Tensor(activation[np.newaxis]),
            ).numpy()[0, expected_class]

    gradients = numerical_gradient(target_logit, activation)
    expected, weighted_sum = xai.compute_cam(activation, gradients)
    np.testing.assert_allclose(cam.values, expected, atol=1e-3)
    np.testing.assert_allclose(cam.weighted_sum, weighted_sum, atol=1e-3)


def test_grad_cam_side_effects(toy_model, image):
    """Test that mode and gradients of the model are restored."""
    toy_model.train()
    xai.grad_cam(toy_model, image.numpy()[0], target=ClassLabel.FEAR)
    assert toy_model.mode == 'train'
    assert all(param.grad is None for param in toy_model.parameters())


def test_grad_cam_keeps_gradients(toy_model, image):
    """Test that accumulated parameter gradients survive the call."""
    with default_dtype(np.float64):
        batch = Tensor(np.random.default_rng(5).standard_normal((4, 3, 8, 8)))
        backward(tensor_sum(toy_model(batch)))
    accumulated = [param.grad.copy() for param in toy_model.parameters()]

    xai.grad_cam(toy_model, image, target=2)
    for param, grad in zip(toy_model.parameters(), accumulated):
        np.testing.assert_array_equal(param.grad, grad)


def test_grad_cam_errors(toy_model, image):
    """Test unsupported models and inputs."""
    with pytest.raises(UnsupportedModelError):
        xai.grad_cam(build('resnet18'), image)
    with pytest.raises(ShapeError):
        xai.grad_cam(toy_model, Tensor(np.zeros((2, 3, 8, 8))))
    with pytest.raises(ValueError):
        xai.grad_cam(toy_model, image, target='joy')


def test_compute_cam():
    """Test the channel weighting."""
    rng = np.random.default_rng(0)
    activation = rng.random((1, 4, 4))
    cam, weighted_sum = xai.compute_cam(activation, np.full((1, 4, 4), 0.5))
    np.testing.assert_allclose(cam, activation[0] / activation.max())
    np.testing.assert_allclose(weighted_sum, 0.5 * activation[0])

    # negative evidence only
    cam, weighted_sum = xai.compute_cam(activation, -np.ones((1, 4, 4)))
    assert not cam.any()
    assert np.all(weighted_sum < 0)

    activations = rng.random((8, 5, 5))
    gradients = rng.standard_normal((8, 5, 5))
    cam, _ = xai.compute_cam(activations, gradients)
    scaled, _ = xai.compute_cam(3 * activations, 2 * gradients)
    np.testing.assert_allclose(cam, scaled)
    assert is_normalized_map(cam)

    with pytest.raises(ShapeError):
        xai.compute_cam(activations, gradients[:4])


def test_cam_map():
    """Test the CamMap invariants."""
    cam = xai.CamMap(np.eye(2), 3)
    assert cam.target_class is ClassLabel.ANGER
    with pytest.raises(ShapeError):
        xai.CamMap(np.ones(4), 0)
    with pytest.raises(ValueError):
        xai.CamMap(2 * np.eye(2), 0)


def test_upsample_bilinear():
    """Test corner alignment and the preserved value range."""
    upsampled = xai.upsample_bilinear(np.array([[0, 1], [0, 1]]), size=4)
    assert upsampled.shape == (4, 4)
    np.testing.assert_allclose(upsampled[0], [0, 1 / 3, 2 / 3, 1])
    np.testing.assert_allclose(upsampled[3], upsampled[0])
    assert np.all(np.diff(upsampled, axis=1) > 0)

    values = np.random.default_rng(1).random((4, 4))
    cam = xai.CamMap(values / values.max(), 1, weighted_sum=values - 0.5)
    big = xai.upsample_bilinear(cam, size=64)
    assert big.shape == (64, 64)
    assert big.target_class == 1
    assert big.weighted_sum.shape == (64, 64)
    assert big.values.max() <= 1 and big.values.min() >= cam.values.min()
    np.testing.assert_allclose(big.values[0, 0], cam.values[0, 0])
    np.testing.assert_allclose(big.values[-1, -1], cam.values[-1, -1])

    assert xai.upsample_bilinear(values, size=(2, 6)).shape == (2, 6)


def test_colormap():
    """Test the color stops."""
    colors = xai.colormap(np.array([0, 1 / 3, 2 / 3, 1, -1, 2]))
    np.testing.assert_array_equal(colors, [
        [0, 0, 255],
        [0, 255, 0],
        [255, 255, 0],
        [255, 0, 0],
        [0, 0, 255],
        [255, 0, 0],
    ])
    assert colors.dtype == np.uint8


def test_colorize_overlay():
    """Test the blending weights."""
    rng = np.random.default_rng(2)
    image = rng.integers(0, 256, size=(6, 6, 3)).astype(np.uint8)
    cam = rng.random((6, 6))
    np.testing.assert_array_equal(xai.colorize_overlay(image, cam, 0), image)
    np.testing.assert_array_equal(
        xai.colorize_overlay(image, cam, 1), xai.colormap(cam),
    )
    half = xai.colorize_overlay(image, np.ones((6, 6)), 0.5)
    np.testing.assert_array_equal(
        half[..., 2], np.rint(image[..., 2] / 2).astype(np.uint8),
    )

    with pytest.raises(ConfigError):
        xai.colorize_overlay(image, cam, 1.5)
    with pytest.raises(ShapeError):
        xai.colorize_overlay(image, np.ones((5, 5)), 0.5)


def test_layer_activation_map(toy_model, image):
    """Test the channel mean of a stage."""
    values = xai.layer_activation_map(toy_model, image, 'conv1')
    assert values.shape == (8, 8)
    assert is_normalized_map(values)
    with pytest.raises(ShapeError):
        xai.layer_activation_map(toy_model, image, 'head')


def test_render_triptych(toy_model, image):
    """Test the layout of the three panels."""
    cam = xai.grad_cam(toy_model, image)
    display = xai.display_image(np.full((20, 20), 200))
    assert display.shape == (64, 64, 3)
    strip = xai.render_triptych(display, cam, alpha=0.4, gap=4)
    assert strip.shape == (64, 3 * 64 + 8, 3)
    np.testing.assert_array_equal(strip[:, :64], display)
    assert np.all(strip[:, 64:68] == 255)

    heatmap = strip[:, 68:132]
    colors = {tuple(color) for color in heatmap.reshape(-1, 3)}
    assert (0, 0, 255) in colors
    assert (255, 0, 0) in colors
