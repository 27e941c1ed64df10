"""Minimal PGM/PPM (netpbm) reader and writer.

Images are plain numpy arrays indexed ``[y, x]``: grayscale images are
``uint8`` arrays of shape ``(height, width)``, colour images ``uint8`` arrays
of shape ``(height, width, 3)``.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

__all__ = [
    "ImageFormatError",
    "load_gray",
    "save_gray",
    "save_ppm",
    "load_edge_map",
    "save_edge_map",
    "parse_pnm",
]

_MAGICS = (b"P2", b"P3", b"P5", b"P6")


class ImageFormatError(ValueError):
    """Raised for unreadable, malformed or unsupported image files."""


def _tokens(data: bytes, start: int, count: int) -> tuple[list[int], int]:
    """Read ``count`` whitespace separated integers, skipping ``#`` comments.

    Returns the integers and the offset just past the last one.
    """
    out = []
    i = start
    n = len(data)
    while len(out) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i >= n:
            raise ImageFormatError("unexpected end of header")
        if data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        tok = data[i:j]
        if not tok.isdigit():
            raise ImageFormatError(f"invalid header token {tok!r}")
        out.append(int(tok))
        i = j
    return out, i


def parse_pnm(data: bytes) -> np.ndarray:
    """Decode PGM (P2/P5) or PPM (P3/P6) bytes.

    Returns a ``(h, w)`` array for PGM and ``(h, w, 3)`` for PPM, with
    samples rescaled to 0..255 when the file's maxval differs from 255.
    """
    magic = data[:2]
    if magic not in _MAGICS:
        raise ImageFormatError(f"unsupported format {magic!r}")
    (width, height, maxval), pos = _tokens(data, 2, 3)
    if width < 1 or height < 1:
        raise ImageFormatError("image dimensions must be positive")
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"invalid maxval {maxval}")
    channels = 3 if magic in (b"P3", b"P6") else 1
    count = width * height * channels

    if magic in (b"P2", b"P3"):
        body = data[pos:].split()
        if len(body) != count:
            raise ImageFormatError(
                f"header declares {count} samples but file contains {len(body)}"
            )
        try:
            samples = np.array([int(t) for t in body], dtype=np.int64)
        except ValueError as exc:
            raise ImageFormatError("non-integer sample in ASCII image") from exc
    else:
        # exactly one whitespace byte separates the header from raster data
        if pos >= len(data) or not data[pos : pos + 1].isspace():
            raise ImageFormatError("missing separator after header")
        raster = data[pos + 1 :]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        if len(raster) != count * dtype.itemsize:
            raise ImageFormatError(
                f"header declares {count} samples but raster holds "
                f"{len(raster) // dtype.itemsize}"
            )
        samples = np.frombuffer(raster, dtype=dtype).astype(np.int64)

    if samples.size and samples.max() > maxval:
        raise ImageFormatError("sample exceeds maxval")
    if maxval != 255:
        samples = (samples * 255 + maxval // 2) // maxval
    shape = (height, width, 3) if channels == 3 else (height, width)
    return samples.astype(np.uint8).reshape(shape)


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """ITU-R 601 luma, rounded to nearest."""
    rgb = rgb.astype(np.float64)
    luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def load_gray(path: str | os.PathLike) -> np.ndarray:
    """Load a PGM or PPM file as a ``uint8`` grayscale array ``(h, w)``.

    PPM input is converted with the standard luma weights.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"cannot read {path}: {exc}") from exc
    img = parse_pnm(data)
    if img.ndim == 3:
        img = rgb_to_gray(img)
    return img


def save_gray(path: str | os.PathLike, img: np.ndarray) -> None:
    """Write a 2-D ``uint8`` array as binary PGM (P5)."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("save_gray expects a 2-D array")
    img = np.clip(img, 0, 255).astype(np.uint8)
    h, w = img.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + img.tobytes())


def save_ppm(path: str | os.PathLike, rgb: np.ndarray) -> None:
    """Write an ``(h, w, 3)`` array as binary PPM (P6)."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("save_ppm expects an (h, w, 3) array")
    rgb = np.clip(rgb, 0, 255).astype(np.uint8)
    h, w, _ = rgb.shape
    Path(path).write_bytes(b"P6\n%d %d\n255\n" % (w, h) + rgb.tobytes())


def load_edge_map(path: str | os.PathLike) -> np.ndarray:
    """Read an edge-map PGM; any non-zero pixel counts as an edge."""
    return load_gray(path) > 0


def save_edge_map(path: str | os.PathLike, edges: np.ndarray) -> None:
    save_gray(path, np.where(np.asarray(edges, dtype=bool), 255, 0).astype(np.uint8))
