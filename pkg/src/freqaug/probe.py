"""Diagnostic test-set generators: band-limited images, phase-only images
rebuilt with the dataset-mean amplitude, and the accuracy table over them.

These probes measure which frequency bands a trained model actually uses:
feed a test set through each probe and compare per-probe accuracy against
the unmodified images.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError
from .spectral import dft2_array, idft2_array, make_masks
from .tensorio import ImageTensor, LabeledDataset, require_uniform_dims

BANDED_KINDS = ("low", "high", "low_phase", "high_phase")
PROBE_KINDS = BANDED_KINDS + ("phase_only",)


@dataclass(frozen=True)
class MeanAmplitude:
    """Per-channel elementwise mean of amplitude spectra over a dataset,
    shape (channels, height, width)."""

    amplitude: np.ndarray
    source_count: int

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.amplitude, dtype=np.float64))
        if arr.ndim != 3:
            raise ShapeError(f"mean amplitude must be (C,H,W), got {arr.shape}")
        if np.any(arr < 0):
            raise DomainError("mean amplitude must be nonnegative")
        arr.flags.writeable = False
        object.__setattr__(self, "amplitude", arr)


@dataclass(frozen=True)
class ProbeKind:
    """A probe selector: banded kinds carry a radius, phase_only does not."""

    kind: str
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in PROBE_KINDS:
            raise DomainError(f"kind must be one of {PROBE_KINDS}, got {self.kind!r}")
        if self.kind in BANDED_KINDS and self.radius is None:
            raise DomainError(f"banded kind {self.kind!r} needs a radius")
        if self.kind == "phase_only" and self.radius is not None:
            raise DomainError("phase_only takes no radius")


def mean_amplitude(dataset) -> MeanAmplitude:
    """Arithmetic mean of per-image amplitude spectra (computed on whatever
    split is passed in; the reference protocol uses the test split)."""
    images = dataset.images if isinstance(dataset, LabeledDataset) else list(dataset)
    require_uniform_dims(images)
    total = np.zeros(images[0].shape)
    for img in images:
        total += np.abs(dft2_array(img.data))
    return MeanAmplitude(total / len(images), len(images))


def _check_mean_amp(image: ImageTensor, mean_amp: MeanAmplitude) -> None:
    if mean_amp.amplitude.shape != image.shape:
        raise ShapeError(
            f"mean amplitude shape {mean_amp.amplitude.shape} does not match "
            f"image shape {image.shape}"
        )


def phase_only(image: ImageTensor, mean_amp: MeanAmplitude, *, clip: bool = True) -> ImageTensor:
    """Keep the image's phase, replace every coefficient's amplitude with the
    dataset mean, and invert."""
    _check_mean_amp(image, mean_amp)
    phase = np.angle(dft2_array(image.data))
    out = idft2_array(mean_amp.amplitude * np.exp(1j * phase))
    if clip:
        out = np.clip(out, 0.0, 1.0)
    return ImageTensor(out, image.label)


def band_probe(
    image: ImageTensor,
    kind: ProbeKind,
    mean_amp: MeanAmplitude | None = None,
    *,
    clip: bool = True,
) -> ImageTensor:
    """Build one probe image.

    low / high keep the image's own spectrum restricted to the band;
    low_phase / high_phase additionally replace amplitudes with the dataset
    mean; phase_only is the unbanded mean-amplitude reconstruction.
    """
    if kind.kind == "phase_only":
        if mean_amp is None:
            raise DomainError("phase_only probes need a mean amplitude")
        return phase_only(image, mean_amp, clip=clip)
    low, high = make_masks(image.height, image.width, kind.radius)
    mask = low.bits if kind.kind.startswith("low") else high.bits
    z = dft2_array(image.data)
    if kind.kind.endswith("_phase"):
        if mean_amp is None:
            raise DomainError(f"{kind.kind} probes need a mean amplitude")
        _check_mean_amp(image, mean_amp)
        z = mean_amp.amplitude * np.exp(1j * np.angle(z))
    out = idft2_array(z * mask)
    if clip:
        out = np.clip(out, 0.0, 1.0)
    return ImageTensor(out, image.label)


@dataclass(frozen=True)
class ProbeRow:
    kind: str
    radius: float | None
    accuracy: float


def probe_table(model, dataset: LabeledDataset, radii, mean_amp: MeanAmplitude) -> list[ProbeRow]:
    """Classification accuracy of `model` (ImageTensor -> per-class scores)
    on each probe variant: the unmodified set, each banded kind at each
    radius, and the phase-only set."""
    radii = list(radii)
    rows = [ProbeRow("original", None, _accuracy(model, dataset, None, None))]
    for kind_name in BANDED_KINDS:
        for r in radii:
            kind = ProbeKind(kind_name, r)
            rows.append(ProbeRow(kind_name, r, _accuracy(model, dataset, kind, mean_amp)))
    rows.append(
        ProbeRow("phase_only", None, _accuracy(model, dataset, ProbeKind("phase_only"), mean_amp))
    )
    return rows


def _accuracy(model, dataset, kind, mean_amp) -> float:
    hits = 0
    for idx, img in enumerate(dataset.images):
        probed = img if kind is None else band_probe(img, kind, mean_amp)
        try:
            scores = np.asarray(model(probed))
        except Exception as exc:
            where = "original" if kind is None else f"{kind.kind}, radius {kind.radius}"
            raise RuntimeError(f"model failed on probe ({where}, image {idx}): {exc}") from exc
        if int(np.argmax(scores)) == img.label:
            hits += 1
    return hits / len(dataset.images)


def write_probe_csv(rows: list[ProbeRow], path) -> None:
    """Machine-readable table: kind, radius, accuracy."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "radius", "accuracy"])
        for row in rows:
            writer.writerow([row.kind, "" if row.radius is None else row.radius, f"{row.accuracy:.6f}"])


def format_probe_table(rows: list[ProbeRow]) -> str:
    """Aligned text table, kinds as columns; with several radii the first is
    plain and the rest parenthesized, accuracy in percent."""
    by_kind: dict[str, list[ProbeRow]] = {}
    order: list[str] = []
    for row in rows:
        by_kind.setdefault(row.kind, []).append(row)
        if row.kind not in order:
            order.append(row.kind)

    def cell(entries: list[ProbeRow]) -> str:
        parts = [f"{entries[0].accuracy * 100:.2f}"]
        parts += [f"({e.accuracy * 100:.2f})" for e in entries[1:]]
        return " ".join(parts)

    cells = [cell(by_kind[k]) for k in order]
    widths = [max(len(k), len(c)) for k, c in zip(order, cells)]
    head = "  ".join(k.ljust(w) for k, w in zip(order, widths))
    body = "  ".join(c.ljust(w) for c, w in zip(cells, widths))
    return head + "\n" + body + "\n"
