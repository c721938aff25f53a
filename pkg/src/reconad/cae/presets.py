"""The three autoencoder architecture presets: bae1, bae2 and mvtec.

Conv-layer counts are fixed (bae1 = 6, bae2 = 4, mvtec = 16); spatial
schedules are size-parametric so the same preset runs at 256x256 and at
reduced sizes. Composing encoder then decoder always restores the input
shape.

* ``bae1`` — 3 encoder convs (3x3, channels 16/8/8, each relu + maxpool2)
  mirrored by 3 decoder convs with 2x upsampling; sigmoid output.
* ``bae2`` — the simplified variant: 2 + 2 convs (channels 16/8), one
  pooling stage per encoder conv.
* ``mvtec`` — the deepest preset: 8 encoder convs (channels
  32,32,32,64,64,128,64,128; kernels 5,5,5,5,3,3,3,3). The first
  min(8, log2(size)) of them use stride 2, the rest stride 1, which
  drives a 256x256 input down to a 1x1x128 code; the decoder mirrors
  channels/kernels in reverse with one 2x upsample per stride-2 stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

PRESET_NAMES = ("bae1", "bae2", "mvtec")


@dataclass(frozen=True)
class LayerSpec:
    kind: str  # conv | relu | sigmoid | maxpool2 | upsample2
    in_channels: int = 0
    out_channels: int = 0
    kernel_size: int = 0
    stride: int = 1
    padding: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("conv", "relu", "sigmoid", "maxpool2", "upsample2"):
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if self.kind == "conv":
            if self.kernel_size % 2 == 0 or self.kernel_size < 1:
                raise ValueError(f"kernel_size must be odd, got {self.kernel_size}")
            if self.stride not in (1, 2):
                raise ValueError(f"stride must be 1 or 2, got {self.stride}")
            if self.padding != (self.kernel_size - 1) // 2:
                raise ValueError("padding must preserve size at stride 1")


def _conv(in_c: int, out_c: int, k: int, stride: int = 1) -> LayerSpec:
    return LayerSpec("conv", in_c, out_c, k, stride, (k - 1) // 2)


@dataclass(frozen=True)
class CaePreset:
    name: str
    input_size: int
    encoder: tuple[LayerSpec, ...]
    decoder: tuple[LayerSpec, ...]

    @property
    def conv_count(self) -> int:
        return sum(1 for s in self.encoder + self.decoder if s.kind == "conv")

    def conv_specs(self) -> list[LayerSpec]:
        return [s for s in self.encoder + self.decoder if s.kind == "conv"]


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _build_bae1(size: int) -> CaePreset:
    _require(size % 8 == 0 and size >= 8, f"bae1 needs size divisible by 8, got {size}")
    chans = [(3, 16), (16, 8), (8, 8)]
    enc: list[LayerSpec] = []
    for in_c, out_c in chans:
        enc += [_conv(in_c, out_c, 3), LayerSpec("relu"), LayerSpec("maxpool2")]
    dec: list[LayerSpec] = []
    for i, (in_c, out_c) in enumerate(reversed(chans)):
        dec += [LayerSpec("upsample2"), _conv(out_c, in_c, 3)]
        dec.append(LayerSpec("sigmoid") if i == 2 else LayerSpec("relu"))
    return CaePreset("bae1", size, tuple(enc), tuple(dec))


def _build_bae2(size: int) -> CaePreset:
    _require(size % 4 == 0 and size >= 4, f"bae2 needs size divisible by 4, got {size}")
    chans = [(3, 16), (16, 8)]
    enc: list[LayerSpec] = []
    for in_c, out_c in chans:
        enc += [_conv(in_c, out_c, 3), LayerSpec("relu"), LayerSpec("maxpool2")]
    dec: list[LayerSpec] = []
    for i, (in_c, out_c) in enumerate(reversed(chans)):
        dec += [LayerSpec("upsample2"), _conv(out_c, in_c, 3)]
        dec.append(LayerSpec("sigmoid") if i == 1 else LayerSpec("relu"))
    return CaePreset("bae2", size, tuple(enc), tuple(dec))


_MVTEC_CHANNELS = (32, 32, 32, 64, 64, 128, 64, 128)
_MVTEC_KERNELS = (5, 5, 5, 5, 3, 3, 3, 3)


def _build_mvtec(size: int) -> CaePreset:
    _require(size >= 4 and size & (size - 1) == 0, f"mvtec needs a power-of-two size, got {size}")
    n_half = min(8, size.bit_length() - 1)
    enc: list[LayerSpec] = []
    in_c = 3
    for i, (out_c, k) in enumerate(zip(_MVTEC_CHANNELS, _MVTEC_KERNELS)):
        enc += [_conv(in_c, out_c, k, stride=2 if i < n_half else 1), LayerSpec("relu")]
        in_c = out_c
    dec: list[LayerSpec] = []
    # Mirror: decoder stage i inverts encoder conv (7 - i); upsample where
    # the mirrored encoder conv halved the resolution.
    for i in range(8):
        mirrored = enc[2 * (7 - i)]
        if mirrored.stride == 2:
            dec.append(LayerSpec("upsample2"))
        dec.append(_conv(mirrored.out_channels, mirrored.in_channels, mirrored.kernel_size))
        dec.append(LayerSpec("sigmoid") if i == 7 else LayerSpec("relu"))
    return CaePreset("mvtec", size, tuple(enc), tuple(dec))


def build_preset(name: str, input_size: int) -> CaePreset:
    """Construct a preset for a given square input size."""
    builders = {"bae1": _build_bae1, "bae2": _build_bae2, "mvtec": _build_mvtec}
    key = name.lower()
    if key not in builders:
        raise ValueError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
    return builders[key](input_size)


def code_shape(preset: CaePreset) -> tuple[int, int, int]:
    """(channels, height, width) of the encoder output for this preset."""
    size = preset.input_size
    channels = 3
    for spec in preset.encoder:
        if spec.kind == "conv":
            size = (size + 2 * spec.padding - spec.kernel_size) // spec.stride + 1
            channels = spec.out_channels
        elif spec.kind == "maxpool2":
            size //= 2
    return channels, size, size
