"""Image quality metrics on float images in [0, 1].

`psnr` quantises both images to 8 bits first, as published numbers do;
`psnr_float` works on the raw values. SSIM uses an 11x11 Gaussian window
(sigma 1.5) with K1 = 0.01, K2 = 0.03, evaluated on the 'valid' region
and averaged over channels.
"""

from __future__ import annotations
import math

import numpy as np
from scipy.signal import convolve2d

from src.exceptions import ConfigurationError
from src.renderer.images import to_uint8


K1 = 0.01
K2 = 0.03
WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)


def _check_pair(a: np.ndarray, b: np.ndarray
               ) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ConfigurationError(
            f'images differ in shape: {a.shape} vs {b.shape}', field='image'
        )
    return a, b


def psnr_from_mse(mse: float) -> float:
    if mse <= 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


def psnr_float(a: np.ndarray, b: np.ndarray) -> float:
    a, b = _check_pair(a, b)
    return psnr_from_mse(float(np.mean((a - b) ** 2)))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """PSNR in dB of the 8-bit quantised images; identical images give
    `math.inf`."""

    a, b = _check_pair(a, b)
    qa = to_uint8(a).astype(np.float64) / 255.0
    qb = to_uint8(b).astype(np.float64) / 255.0
    return psnr_from_mse(float(np.mean((qa - qb) ** 2)))


def gaussian_window(size: int=WINDOW_SIZE,
                    sigma: float=WINDOW_SIGMA) -> np.ndarray:
    coords = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-coords ** 2 / (2.0 * sigma ** 2))
    g /= g.sum()
    return np.outer(g, g)


def _channels(image: np.ndarray) -> list[np.ndarray]:
    if image.ndim == 2:
        return [image]
    return [image[..., c] for c in range(image.shape[-1])]


def _ssim_maps(a: np.ndarray, b: np.ndarray
              ) -> tuple[np.ndarray, np.ndarray]:
    """SSIM map and contrast-structure map of one channel."""

    window = gaussian_window()
    C1 = K1 ** 2
    C2 = K2 ** 2

    def blur(x: np.ndarray) -> np.ndarray:
        return convolve2d(x, window, mode='valid')

    mu_a = blur(a)
    mu_b = blur(b)
    var_a = blur(a * a) - mu_a ** 2
    var_b = blur(b * b) - mu_b ** 2
    cov = blur(a * b) - mu_a * mu_b

    cs = (2.0 * cov + C2) / (var_a + var_b + C2)
    luminance = (2.0 * mu_a * mu_b + C1) / (mu_a ** 2 + mu_b ** 2 + C1)
    return luminance * cs, cs


def _check_window(image: np.ndarray) -> None:
    if min(image.shape[:2]) < WINDOW_SIZE:
        raise ConfigurationError(
            f'image {image.shape[:2]} is smaller than the'
            f' {WINDOW_SIZE}x{WINDOW_SIZE} SSIM window', field='image'
        )


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    a, b = _check_pair(a, b)
    _check_window(a)
    values = [
        float(np.mean(_ssim_maps(ca, cb)[0]))
            for ca, cb
            in zip(_channels(a), _channels(b))
    ]
    return float(np.mean(values))


def _downsample(x: np.ndarray) -> np.ndarray:
    H, W = x.shape[0] // 2 * 2, x.shape[1] // 2 * 2
    x = x[:H, :W]
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2]
                   + x[1::2, 1::2])


def ms_ssim_min_size() -> int:
    return WINDOW_SIZE * 2 ** (len(MS_SSIM_WEIGHTS) - 1)


def ms_ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Five-scale SSIM with 2x2 average pooling between scales.

    Contrast-structure terms are clamped at 0 before the weighted
    product, so the value lies in [0, 1].
    """

    a, b = _check_pair(a, b)
    if min(a.shape[:2]) < ms_ssim_min_size():
        raise ConfigurationError(
            f'MS-SSIM needs images of at least {ms_ssim_min_size()} pixels'
            f' per side, got {a.shape[:2]}', field='image'
        )

    values = []
    for ca, cb in zip(_channels(a), _channels(b)):
        value = 1.0
        for level, weight in enumerate(MS_SSIM_WEIGHTS):
            ssim_map, cs_map = _ssim_maps(ca, cb)
            if level == len(MS_SSIM_WEIGHTS) - 1:
                term = max(float(np.mean(ssim_map)), 0.0)
            else:
                term = max(float(np.mean(cs_map)), 0.0)
                ca, cb = _downsample(ca), _downsample(cb)
            value *= term ** weight
        values.append(value)
    return float(np.mean(values))
