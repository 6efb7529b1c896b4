"""Image/label data model and the on-disk formats the toolkit reads and writes.

Pixel values live in [0,1] as float64 throughout the pipeline; quantization to
bytes happens only at file boundaries. Images are stored channel-planar
(all of channel 0, then channel 1, ...), matching the CIFAR record layout.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FormatError, LabelError, ShapeError

CIFAR_RECORD_BYTES = 3073  # 1 label byte + 32*32*3 pixel bytes
CIFAR_SIDE = 32
NPY_MAGIC = b"\x93NUMPY"


@dataclass(frozen=True)
class ImageTensor:
    """A real-valued image, shape (channels, height, width), channel-planar.

    Values are expected in [0,1] after any load or clamp; intermediate
    transform outputs may exceed that range until clamped.
    """

    data: np.ndarray
    label: int | None = None

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ShapeError(f"image data must be (channels, height, width), got shape {arr.shape}")
        if arr.shape[0] not in (1, 3):
            raise ShapeError(f"channel count must be 1 or 3, got {arr.shape[0]}")
        if self.label is not None and self.label < 0:
            raise LabelError(f"label must be >= 0, got {self.label}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def clamped(self) -> "ImageTensor":
        """Copy with values clipped to [0,1]."""
        return ImageTensor(np.clip(self.data, 0.0, 1.0), self.label)

    def with_label(self, label: int | None) -> "ImageTensor":
        return ImageTensor(self.data, label)


@dataclass
class LabeledDataset:
    """Ordered image collection with an inverted per-class index."""

    images: list[ImageTensor]
    class_count: int
    class_index: list[list[int]] = field(init=False)

    def __post_init__(self):
        index: list[list[int]] = [[] for _ in range(self.class_count)]
        for pos, img in enumerate(self.images):
            if img.label is None:
                raise LabelError(f"image {pos} has no label")
            if img.label >= self.class_count:
                raise LabelError(
                    f"image {pos} has label {img.label} >= class_count {self.class_count}"
                )
            index[img.label].append(pos)
        self.class_index = index

    def __len__(self) -> int:
        return len(self.images)

    def __iter__(self):
        return iter(self.images)

    def labels(self) -> np.ndarray:
        return np.array([img.label for img in self.images], dtype=np.int64)


def load_cifar_binary(path, class_count: int = 10) -> LabeledDataset:
    """Read a CIFAR-10 style binary batch: 3073-byte records, 1 label byte
    followed by 1024 R + 1024 G + 1024 B bytes, row-major. Pixels map to b/255."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) % CIFAR_RECORD_BYTES != 0:
        bad_record = len(raw) // CIFAR_RECORD_BYTES
        raise FormatError(
            f"truncated CIFAR batch: {len(raw)} bytes is not a multiple of "
            f"{CIFAR_RECORD_BYTES} (record {bad_record} is incomplete)"
        )
    images = []
    for rec in range(len(raw) // CIFAR_RECORD_BYTES):
        off = rec * CIFAR_RECORD_BYTES
        label = raw[off]
        if label >= class_count:
            raise LabelError(f"record {rec}: label {label} >= class_count {class_count}")
        pixels = np.frombuffer(raw, dtype=np.uint8, count=CIFAR_RECORD_BYTES - 1, offset=off + 1)
        data = pixels.astype(np.float64).reshape(3, CIFAR_SIDE, CIFAR_SIDE) / 255.0
        images.append(ImageTensor(data, int(label)))
    return LabeledDataset(images, class_count)


def write_cifar_binary(dataset: LabeledDataset, path) -> None:
    """Write a dataset back to the CIFAR binary batch format.

    Values are quantized with round(v*255) clamped to [0,255]; loading the
    result reproduces the quantized pixels exactly.
    """
    out = bytearray()
    for pos, img in enumerate(dataset.images):
        if img.shape != (3, CIFAR_SIDE, CIFAR_SIDE):
            raise ShapeError(
                f"image {pos}: CIFAR records need shape (3, 32, 32), got {img.shape}"
            )
        if img.label is None:
            raise LabelError(f"image {pos} has no label")
        out.append(img.label)
        out += quantize_u8(img.data).tobytes()
    with open(path, "wb") as fh:
        fh.write(out)


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """round(v*255), round-half-up, clamped to [0,255]."""
    return np.clip(np.floor(values * 255.0 + 0.5), 0, 255).astype(np.uint8)


def load_npy_u8(path) -> list[ImageTensor]:
    """Read an NPY v1.0/v2.0 file holding a C-contiguous uint8 array of shape
    (N, H, W, C) and return N unlabeled images with values b/255.

    Only that subset of the format is accepted; anything else is a FormatError
    quoting the offending header.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:6] != NPY_MAGIC:
        raise FormatError(f"not an NPY file (magic {raw[:6]!r})")
    major, minor = raw[6], raw[7]
    if major == 1:
        if len(raw) < 10:
            raise FormatError("NPY header truncated")
        header_len = int.from_bytes(raw[8:10], "little")
        header_start = 10
    elif major == 2:
        if len(raw) < 12:
            raise FormatError("NPY header truncated")
        header_len = int.from_bytes(raw[8:12], "little")
        header_start = 12
    else:
        raise FormatError(f"unsupported NPY version {major}.{minor}")
    header = raw[header_start : header_start + header_len].decode("latin1")
    try:
        meta = ast.literal_eval(header.strip())
    except (ValueError, SyntaxError) as exc:
        raise FormatError(f"unparseable NPY header: {header!r}") from exc
    if meta.get("descr") not in ("|u1", "u1", "<u1", ">u1"):
        raise FormatError(f"unsupported dtype in NPY header: {header!r}")
    if meta.get("fortran_order"):
        raise FormatError(f"fortran-order arrays are unsupported: {header!r}")
    shape = meta.get("shape")
    if not (isinstance(shape, tuple) and len(shape) == 4):
        raise FormatError(f"expected a 4-D (N, H, W, C) shape in NPY header: {header!r}")
    n, h, w, c = shape
    payload = raw[header_start + header_len :]
    expected = n * h * w * c
    if len(payload) < expected:
        raise FormatError(
            f"NPY payload truncated: {len(payload)} bytes for shape {shape} ({header!r})"
        )
    arr = np.frombuffer(payload, dtype=np.uint8, count=expected).reshape(n, h, w, c)
    # (N,H,W,C) -> per-image channel-planar (C,H,W)
    planar = arr.astype(np.float64).transpose(0, 3, 1, 2) / 255.0
    return [ImageTensor(planar[i]) for i in range(n)]


def write_ppm(image: ImageTensor) -> bytes:
    """Serialize a 3-channel image as binary PPM (P6, maxval 255)."""
    if image.channels != 3:
        raise FormatError(f"PPM output needs 3 channels, got {image.channels}")
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    # interleave channels: (C,H,W) -> (H,W,C)
    body = quantize_u8(image.data).transpose(1, 2, 0).tobytes()
    return header + body


def require_uniform_dims(images) -> tuple[int, int, int]:
    """Common (C,H,W) of a nonempty image collection, or raise."""
    images = list(images)
    if not images:
        raise DomainError("empty image collection")
    shape = images[0].shape
    for pos, img in enumerate(images):
        if img.shape != shape:
            raise ShapeError(f"image {pos} has shape {img.shape}, expected {shape}")
    return shape
