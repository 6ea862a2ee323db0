"""Binary PPM (P6) image I/O, plus optional PNG via Pillow.

P6 is the native format of the GTSDB dataset and needs no external
dependency. PNG support is a soft extra: importing it fails with a clear
message if Pillow is absent.
"""

from __future__ import annotations

import numpy as np

_MAXVAL = 255


def _read_header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read whitespace-separated header tokens, honoring '#' comments.

    Returns the tokens and the offset one byte past the single whitespace
    character that terminates the last token (per the P6 header rules).
    """
    tokens: list[bytes] = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise ValueError("truncated PPM header")
        tokens.append(data[start:i])
    if i >= n:
        raise ValueError("truncated PPM header")
    return tokens, i + 1  # skip exactly one whitespace byte after maxval


def read_ppm(path) -> np.ndarray:
    """Read a binary P6 file into a (height, width, 3) uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, offset = _read_header_tokens(data, 4)
    if tokens[0] != b"P6":
        raise ValueError(f"{path}: not a binary PPM (magic {tokens[0]!r})")
    width, height, maxval = (int(t) for t in tokens[1:])
    if width <= 0 or height <= 0:
        raise ValueError(f"{path}: bad dimensions {width}x{height}")
    if maxval != _MAXVAL:
        raise ValueError(f"{path}: unsupported maxval {maxval} (only 255)")
    expected = width * height * 3
    pixels = data[offset : offset + expected]
    if len(pixels) != expected:
        raise ValueError(f"{path}: pixel data truncated ({len(pixels)}/{expected} bytes)")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3).copy()


def write_ppm(path, image: np.ndarray) -> None:
    """Write a (height, width, 3) uint8 array as binary P6."""
    arr = np.ascontiguousarray(image, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) uint8 array, got shape {arr.shape}")
    height, width = arr.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{width} {height}\n{_MAXVAL}\n".encode("ascii"))
        fh.write(arr.tobytes())


def to_float(image8: np.ndarray) -> np.ndarray:
    """8-bit image to linear float64 in [0, 1]."""
    return image8.astype(np.float64) / _MAXVAL


def to_uint8(image: np.ndarray) -> np.ndarray:
    """Float image in [0, 1] to 8-bit, rounding to nearest."""
    return np.clip(np.rint(image * _MAXVAL), 0, _MAXVAL).astype(np.uint8)


def load_image(path) -> np.ndarray:
    """Load a .ppm (or .png, with Pillow installed) as float64 in [0, 1]."""
    name = str(path).lower()
    if name.endswith(".ppm"):
        return to_float(read_ppm(path))
    if name.endswith(".png"):
        try:
            from PIL import Image
        except ImportError as exc:
            raise ImportError(
                "PNG support requires Pillow; install the 'png' extra"
            ) from exc
        with Image.open(path) as img:
            return to_float(np.asarray(img.convert("RGB"), dtype=np.uint8))
    raise ValueError(f"{path}: unsupported image format (use .ppm or .png)")


def save_image(path, image: np.ndarray) -> None:
    """Save a float image in [0, 1] as .ppm or .png (Pillow required for PNG)."""
    name = str(path).lower()
    if name.endswith(".ppm"):
        write_ppm(path, to_uint8(image))
        return
    if name.endswith(".png"):
        try:
            from PIL import Image
        except ImportError as exc:
            raise ImportError(
                "PNG support requires Pillow; install the 'png' extra"
            ) from exc
        Image.fromarray(to_uint8(image), mode="RGB").save(path)
        return
    raise ValueError(f"{path}: unsupported image format (use .ppm or .png)")
