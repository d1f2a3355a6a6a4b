import numpy as np
import pytest

from aiotc.images import GrayImage


def smooth_image(height: int, width: int, seed: int = 0) -> GrayImage:
    """Natural-looking test raster: low-frequency waves plus mild noise."""
    rng = np.random.default_rng(seed)
    y = np.linspace(0, 3 * np.pi, height)[:, None]
    x = np.linspace(0, 2 * np.pi, width)[None, :]
    field = 120 + 60 * np.sin(x + 0.7 * y) + 35 * np.cos(2.1 * x - y)
    field = field + rng.normal(0, 6, size=(height, width))
    return GrayImage.from_array(np.clip(field, 0, 255).astype(np.uint8))


def random_image(height: int, width: int, seed: int = 0) -> GrayImage:
    rng = np.random.default_rng(seed)
    return GrayImage.from_array(
        rng.integers(0, 256, size=(height, width), dtype=np.uint8)
    )


def ramp_image() -> GrayImage:
    """16x16 raster covering every intensity 0..255 exactly once."""
    return GrayImage.from_array(np.arange(256, dtype=np.uint8).reshape(16, 16))


@pytest.fixture
def small_smooth():
    return smooth_image(24, 32, seed=11)


@pytest.fixture
def small_random():
    return random_image(16, 16, seed=5)
