"""Canny edge detection and the ordered edge-point vector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

__all__ = ["CannyConfig", "ImageTooSmall", "canny", "edge_vector", "gaussian_kernel"]

_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = _SOBEL_X.T
_EIGHT = np.ones((3, 3), dtype=bool)
# below this the gradient is floating-point noise from blurring a flat image
_FLAT_GRADIENT = 1e-6


class ImageTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class CannyConfig:
    """Canny parameters. Thresholds are fractions of the peak gradient magnitude."""

    gaussian_sigma: float = 1.4
    low_frac: float = 0.1
    high_frac: float = 0.3

    def __post_init__(self):
        if not self.gaussian_sigma > 0:
            raise ValueError("gaussian_sigma must be positive")
        if not 0 < self.low_frac < self.high_frac < 1:
            raise ValueError("need 0 < low_frac < high_frac < 1")


def gaussian_kernel(sigma: float, size: int = 5) -> np.ndarray:
    r = size // 2
    ax = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma**2))
    return g / g.sum()


def _gradients(img: np.ndarray, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    smooth = ndimage.convolve(img.astype(np.float64), gaussian_kernel(sigma), mode="nearest")
    # correlate so that gx > 0 means intensity increases with x
    gx = ndimage.correlate(smooth, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(smooth, _SOBEL_Y, mode="nearest")
    return gx, gy


def _non_max_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    # 0: horizontal gradient, 1: 45 deg, 2: vertical, 3: 135 deg (y grows downward)
    sector = (np.floor((angle + 22.5) / 45.0).astype(int)) % 4
    offsets = [(0, 1), (1, 1), (1, 0), (1, -1)]  # (dy, dx) along the gradient

    padded = np.pad(mag, 1)
    h, w = mag.shape
    keep = np.zeros(mag.shape, dtype=bool)
    for s, (dy, dx) in enumerate(offsets):
        fwd = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        bwd = padded[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w]
        # strict on one side so flat-topped ridges stay one pixel wide
        keep |= (sector == s) & (mag > bwd) & (mag >= fwd)
    return keep & (mag > 0)


def canny(img: np.ndarray, cfg: CannyConfig | None = None) -> np.ndarray:
    """Single-pixel-wide binary edge map of a grayscale image.

    Gaussian blur (5x5), 3x3 Sobel gradients, non-maximum suppression with
    the gradient direction quantized to four bins, then hysteresis: weak
    pixels survive only when 8-connected to a strong pixel.
    """
    cfg = cfg or CannyConfig()
    img = np.asarray(img)
    if img.ndim != 2 or img.shape[0] < 5 or img.shape[1] < 5:
        raise ImageTooSmall(f"canny needs a 2-D image of at least 5x5, got {img.shape}")

    gx, gy = _gradients(img, cfg.gaussian_sigma)
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak < _FLAT_GRADIENT:
        return np.zeros(img.shape, dtype=bool)

    thin = _non_max_suppression(mag, gx, gy)
    weak = thin & (mag >= cfg.low_frac * peak)
    strong = thin & (mag >= cfg.high_frac * peak)

    labels, n = ndimage.label(weak, structure=_EIGHT)
    if n == 0:
        return np.zeros(img.shape, dtype=bool)
    has_strong = np.zeros(n + 1, dtype=bool)
    has_strong[labels[strong]] = True
    has_strong[0] = False
    return has_strong[labels]


def edge_vector(edges: np.ndarray) -> np.ndarray:
    """Coordinates of all edge pixels as an ``(N_e, 2)`` array of ``(x, y)``.

    Order is row-major: y ascending, then x ascending.
    """
    ys, xs = np.nonzero(np.asarray(edges, dtype=bool))
    return np.column_stack([xs, ys]).astype(np.int64)
