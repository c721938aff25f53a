"""Image values, binary PGM/PPM i/o and the preprocessing transforms.

An :class:`Image` is a float64 array of shape (height, width, channels)
with every intensity in [0, 1]; channels is 1 (grayscale) or 3 (RGB).
Files are binary PGM (P5, grayscale) or PPM (P6, RGB) with 8-bit samples:
ASCII header ``P5|P6\\n<width> <height>\\n255\\n`` followed by raw bytes.

All transforms are pure functions on immutable values; quantization on
save rounds half up and de-quantization divides by 255, so save/load
round-trips 8-bit data exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Blue weight is defined by the unit-sum constraint so a pure white pixel
# maps to exactly 1.0 in floating point.
_LUMA_R = 0.299
_LUMA_G = 0.587
_LUMA_B = 1.0 - _LUMA_R - _LUMA_G


class PnmError(ValueError):
    """Base error for PGM/PPM decoding failures."""


class MalformedHeaderError(PnmError):
    """Magic number or header tokens could not be parsed."""


class UnsupportedMaxValueError(PnmError):
    """The file's max sample value is not 255 (only 8-bit data is supported)."""


class TruncatedPayloadError(PnmError):
    """The pixel payload is shorter than the header promises."""


@dataclass(frozen=True)
class Image:
    """A (height, width, channels) raster of unit-interval intensities."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError(f"image data must be 3-D (H, W, C), got shape {arr.shape}")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise ValueError(f"image dimensions must be >= 1, got {h}x{w}")
        if c not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {c}")
        if not np.isfinite(arr).all():
            raise ValueError("image intensities must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image intensities must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def image_from_chw(arr: np.ndarray) -> Image:
    """Build an Image from a (channels, height, width) array."""
    return Image(np.transpose(np.asarray(arr, dtype=np.float64), (1, 2, 0)))


def image_to_chw(img: Image) -> np.ndarray:
    """The (channels, height, width) view used by the autoencoder."""
    return np.transpose(img.data, (2, 0, 1))


def _parse_header(raw: bytes) -> tuple[int, int, int, int, int]:
    """Parse a PNM header, returning (channels, width, height, maxval, offset)."""
    if len(raw) < 2:
        raise MalformedHeaderError("file too short for a PNM magic number")
    magic = raw[:2]
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise MalformedHeaderError(f"unsupported magic number {magic!r}")

    # Scan the three ASCII integers (width, height, maxval), skipping
    # whitespace and '#' comments per PNM convention.
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and raw[pos : pos + 1].isdigit():
            pos += 1
        if pos == start:
            raise MalformedHeaderError("header ended before width/height/maxval")
        fields.append(int(raw[start:pos]))
    if pos >= len(raw) or not raw[pos : pos + 1].isspace():
        raise MalformedHeaderError("missing whitespace after maxval")
    pos += 1  # single whitespace byte separates header from payload

    width, height, maxval = fields
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"non-positive dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedMaxValueError(f"max sample value {maxval} != 255")
    return channels, width, height, maxval, pos


def load_image(path: str | Path) -> Image:
    """Load a binary PGM (P5) or PPM (P6) file; intensities = byte / 255."""
    raw = Path(path).read_bytes()
    channels, width, height, _maxval, offset = _parse_header(raw)
    n = width * height * channels
    payload = raw[offset : offset + n]
    if len(payload) < n:
        raise TruncatedPayloadError(
            f"payload holds {len(payload)} bytes, header promises {n}"
        )
    arr = np.frombuffer(payload, dtype=np.uint8).astype(np.float64) / 255.0
    return Image(arr.reshape(height, width, channels))


def save_image(img: Image, path: str | Path) -> None:
    """Write P5 (1 channel) or P6 (3 channels); byte = round-half-up(v * 255)."""
    magic = b"P5" if img.channels == 1 else b"P6"
    header = magic + b"\n%d %d\n255\n" % (img.width, img.height)
    quantized = np.floor(img.data * 255.0 + 0.5).astype(np.uint8)
    Path(path).write_bytes(header + quantized.tobytes())


def to_grayscale(img: Image) -> Image:
    """Rec. 601 luminance; identity when the input is already grayscale."""
    if img.channels == 1:
        return img
    r, g, b = img.data[:, :, 0], img.data[:, :, 1], img.data[:, :, 2]
    luma = _LUMA_R * r + _LUMA_G * g + _LUMA_B * b
    return Image(np.clip(luma, 0.0, 1.0)[:, :, None])


def rotate90(img: Image, quarter_turns: int) -> Image:
    """Counter-clockwise rotation by quarter_turns in {0, 1, 2, 3}."""
    if quarter_turns not in (0, 1, 2, 3):
        raise ValueError(f"quarter_turns must be in 0..3, got {quarter_turns}")
    if quarter_turns == 0:
        return img
    return Image(np.rot90(img.data, k=quarter_turns, axes=(0, 1)))


def bounding_box_crop(img: Image, threshold: float = 0.1) -> Image:
    """Crop to the minimal rectangle whose luminance exceeds threshold.

    Returns the input unchanged when no pixel exceeds the threshold.
    """
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"threshold must be in [0, 1), got {threshold}")
    luma = to_grayscale(img).data[:, :, 0]
    mask = luma > threshold
    if not mask.any():
        return img
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    r0, r1 = int(rows[0]), int(rows[-1])
    c0, c1 = int(cols[0]), int(cols[-1])
    return Image(img.data[r0 : r1 + 1, c0 : c1 + 1])


def _axis_samples(n_src: int, n_dst: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Half-pixel-centered source coordinates for one axis."""
    x = (np.arange(n_dst, dtype=np.float64) + 0.5) * (n_src / n_dst) - 0.5
    x = np.clip(x, 0.0, float(n_src - 1))
    i0 = np.minimum(np.floor(x).astype(np.int64), max(n_src - 2, 0))
    i1 = np.minimum(i0 + 1, n_src - 1)
    return i0, i1, x - i0


def resize_bilinear(img: Image, new_h: int, new_w: int) -> Image:
    """Bilinear resampling with half-pixel-centered sample positions."""
    if new_h < 1 or new_w < 1:
        raise ValueError(f"target size must be >= 1, got {new_h}x{new_w}")
    if new_h == img.height and new_w == img.width:
        return img
    data = img.data
    r0, r1, fr = _axis_samples(img.height, new_h)
    c0, c1, fc = _axis_samples(img.width, new_w)
    fr = fr[:, None, None]
    fc = fc[None, :, None]
    top = (1.0 - fc) * data[np.ix_(r0, c0)] + fc * data[np.ix_(r0, c1)]
    bot = (1.0 - fc) * data[np.ix_(r1, c0)] + fc * data[np.ix_(r1, c1)]
    out = (1.0 - fr) * top + fr * bot
    return Image(np.clip(out, 0.0, 1.0))
