"""Frequency-band swap augmentation, amplitude-phase recombination, the
baseline spatial transforms, and the corruption generators.

The band swap takes two same-class images, splits each spectrum into the
disk of radius r around the DC coefficient and its complement, and crosses
the bands: each output keeps one image's low band and the other's high band.
Both outputs stay in the pair's class.

All randomized transforms draw from named Philox streams keyed by
(seed, image index), so results are bit-identical regardless of evaluation
order or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .errors import DomainError, LabelError, ShapeError
from .spectral import dft2_array, idft2_array, make_masks
from .tensorio import ImageTensor, LabeledDataset

MODES = ("rfc", "apr", "rfc+apr")
CORRUPTION_KINDS = ("gaussian_noise", "gaussian_blur", "fog", "contrast")

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class AugmentConfig:
    """Knobs for batch augmentation. Identical (config, dataset, seed) give
    bit-identical output."""

    radius: float = 4.0
    apply_probability: float = 0.5
    mode: str = "rfc"
    seed: int = 0
    apr_first: bool = False  # only meaningful for mode "rfc+apr"

    def __post_init__(self):
        if self.radius < 0:
            raise DomainError(f"radius must be >= 0, got {self.radius}")
        if not 0.0 <= self.apply_probability <= 1.0:
            raise DomainError(f"apply_probability must be in [0,1], got {self.apply_probability}")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class CorruptionSpec:
    kind: str
    severity: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in CORRUPTION_KINDS:
            raise DomainError(f"kind must be one of {CORRUPTION_KINDS}, got {self.kind!r}")
        if not 1 <= self.severity <= 5:
            raise DomainError(f"severity must be in 1..5, got {self.severity}")


def image_stream(seed: int, index: int) -> np.random.Generator:
    """Philox stream keyed by (seed, index); order-independent across images."""
    key = np.array([seed & MASK64, index & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _check_same_dims(a: ImageTensor, b: ImageTensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")


def _common_label(a: ImageTensor, b: ImageTensor) -> int | None:
    if a.label is not None and b.label is not None and a.label != b.label:
        raise LabelError(
            f"band swap is same-class only: labels {a.label} and {b.label} differ"
        )
    return a.label if a.label is not None else b.label


def rfc_swap(
    x: ImageTensor, x_prime: ImageTensor, radius: float, *, clip: bool = True
) -> tuple[ImageTensor, ImageTensor]:
    """Cross the low/high frequency bands of two same-class images.

    Returns (x_mix, x_prime_mix): x_mix keeps x's band inside `radius` plus
    x_prime's band outside it, and vice versa. Outputs carry the common label
    and are clamped to [0,1] unless clip=False (the identities the tests
    assert hold pre-clamp).
    """
    _check_same_dims(x, x_prime)
    label = _common_label(x, x_prime)
    low, high = make_masks(x.height, x.width, radius)
    z = dft2_array(x.data)
    z_prime = dft2_array(x_prime.data)
    mix = idft2_array(z * low.bits) + idft2_array(z_prime * high.bits)
    prime_mix = idft2_array(z_prime * low.bits) + idft2_array(z * high.bits)
    if clip:
        mix = np.clip(mix, 0.0, 1.0)
        prime_mix = np.clip(prime_mix, 0.0, 1.0)
    return ImageTensor(mix, label), ImageTensor(prime_mix, label)


def apr_recombine(
    phase_source: ImageTensor, amplitude_source: ImageTensor, *, clip: bool = True
) -> ImageTensor:
    """Rebuild an image from phase_source's phase and amplitude_source's
    amplitude spectrum. The output takes phase_source's label."""
    _check_same_dims(phase_source, amplitude_source)
    phase = np.angle(dft2_array(phase_source.data))
    amp = np.abs(dft2_array(amplitude_source.data))
    out = idft2_array(amp * np.exp(1j * phase))
    if clip:
        out = np.clip(out, 0.0, 1.0)
    return ImageTensor(out, phase_source.label)


def augment_batch(dataset: LabeledDataset, config: AugmentConfig) -> LabeledDataset:
    """Expand a dataset with augmented images appended after the originals.

    Per image (its own Philox stream):
      mode "rfc":      one selection coin; on success swap bands with a
                       uniformly drawn same-class partner and append both outputs.
      mode "apr":      one selection coin; on success append one recombination
                       (partner's amplitude, own phase).
      mode "rfc+apr":  independent coins for each stage; the band swap runs
                       first (or second under apr_first) and the other stage
                       applies to its outputs.
    Partners are drawn uniformly from the full class pool, so singleton
    classes self-pair and degenerate to identity.
    """
    extras: list[ImageTensor] = []
    for i, img in enumerate(dataset.images):
        rng = image_stream(config.seed, i)
        pool = dataset.class_index[img.label]
        draw = lambda: dataset.images[pool[rng.integers(len(pool))]]
        if config.mode == "rfc":
            if rng.random() < config.apply_probability:
                extras.extend(rfc_swap(img, draw(), config.radius))
        elif config.mode == "apr":
            if rng.random() < config.apply_probability:
                extras.append(apr_recombine(img, draw()))
        else:  # rfc+apr, independent coins per stage
            first_coin = rng.random() < config.apply_probability
            second_coin = rng.random() < config.apply_probability
            stages = ("apr", "rfc") if config.apr_first else ("rfc", "apr")
            produced = [img]
            for stage, coin in zip(stages, (first_coin, second_coin)):
                if not coin:
                    continue
                if stage == "rfc":
                    produced = [
                        out for src in produced for out in rfc_swap(src, draw(), config.radius)
                    ]
                else:
                    produced = [apr_recombine(src, draw()) for src in produced]
            if first_coin or second_coin:
                extras.extend(produced)
    return LabeledDataset(list(dataset.images) + extras, dataset.class_count)


def online_hook(config: AugmentConfig):
    """Per-batch augmentation hook for training loops: takes a batch dataset
    and a stream seed, returns the expanded batch."""

    def hook(batch: LabeledDataset, stream_seed: int) -> LabeledDataset:
        return augment_batch(batch, replace(config, seed=stream_seed))

    return hook


# --- baseline spatial transforms ---


def crop_at(image: ImageTensor, padding: int, off_i: int, off_j: int) -> ImageTensor:
    """Zero-pad by `padding` on all sides, then crop the original size at the
    given top-left offset of the padded plane."""
    if padding < 0:
        raise DomainError(f"padding must be >= 0, got {padding}")
    if padding == 0:
        return image
    if not (0 <= off_i <= 2 * padding and 0 <= off_j <= 2 * padding):
        raise DomainError(f"offset ({off_i},{off_j}) outside [0,{2 * padding}]^2")
    c, h, w = image.shape
    padded = np.zeros((c, h + 2 * padding, w + 2 * padding))
    padded[:, padding : padding + h, padding : padding + w] = image.data
    return ImageTensor(padded[:, off_i : off_i + h, off_j : off_j + w], image.label)


def random_crop(image: ImageTensor, padding: int, rng: np.random.Generator) -> ImageTensor:
    """Zero-pad then crop at a uniformly random offset."""
    if padding == 0:
        return image
    off_i = int(rng.integers(2 * padding + 1))
    off_j = int(rng.integers(2 * padding + 1))
    return crop_at(image, padding, off_i, off_j)


def hflip(image: ImageTensor) -> ImageTensor:
    """Mirror columns: column k -> width-1-k."""
    return ImageTensor(image.data[:, :, ::-1], image.label)


def random_hflip(image: ImageTensor, rng: np.random.Generator) -> ImageTensor:
    """Mirror columns with probability 1/2."""
    return hflip(image) if rng.random() < 0.5 else image


# --- corruptions ---


def load_corruption_constants(path=None) -> dict[tuple[str, int], tuple[float, ...]]:
    """Parse the severity-constants table: `kind:severity = p1 [p2 ...]` lines,
    '#' comments. Defaults to the table shipped with the package."""
    if path is None:
        text = (resources.files("freqaug") / "corruption_constants.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    table: dict[tuple[str, int], tuple[float, ...]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            key, values = line.split("=", 1)
            kind, severity = key.strip().split(":")
            table[(kind.strip(), int(severity))] = tuple(float(v) for v in values.split())
        except ValueError as exc:
            raise DomainError(f"bad constants line {lineno}: {line!r}") from exc
    return table


_DEFAULT_CONSTANTS: dict[tuple[str, int], tuple[float, ...]] | None = None


def _constants() -> dict[tuple[str, int], tuple[float, ...]]:
    global _DEFAULT_CONSTANTS
    if _DEFAULT_CONSTANTS is None:
        _DEFAULT_CONSTANTS = load_corruption_constants()
    return _DEFAULT_CONSTANTS


def gaussian_noise(image: ImageTensor, sigma: float, rng: np.random.Generator) -> ImageTensor:
    """Additive zero-mean Gaussian noise, clamped. sigma=0 is the identity."""
    if sigma == 0.0:
        return image
    noisy = image.data + rng.normal(0.0, sigma, size=image.shape)
    return ImageTensor(np.clip(noisy, 0.0, 1.0), image.label)


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = max(1, int(round(4.0 * sigma)))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_blur(image: ImageTensor, sigma: float) -> ImageTensor:
    """Separable Gaussian convolution with reflect padding, kernel truncated
    at 4*sigma. sigma=0 degenerates to the delta kernel (identity)."""
    if sigma == 0.0:
        return image
    kernel = _gaussian_kernel(sigma)
    radius = len(kernel) // 2
    # reflect padding needs >= 2 samples per axis; degenerate dims repeat the edge
    pad_mode = "reflect" if min(image.height, image.width) > 1 else "edge"
    out = np.empty_like(image.data)
    for c in range(image.channels):
        plane = np.pad(image.data[c], radius, mode=pad_mode)
        rows = np.apply_along_axis(np.convolve, 1, plane, kernel, "valid")
        cols = np.apply_along_axis(np.convolve, 0, rows, kernel, "valid")
        out[c] = cols
    return ImageTensor(np.clip(out, 0.0, 1.0), image.label)


def adjust_contrast(image: ImageTensor, factor: float) -> ImageTensor:
    """Scale about the per-channel spatial mean, clamped. factor=1 is the
    identity, bitwise."""
    if factor == 1.0:
        return image
    means = image.data.mean(axis=(1, 2), keepdims=True)
    out = (image.data - means) * factor + means
    return ImageTensor(np.clip(out, 0.0, 1.0), image.label)


def plasma_fractal(height: int, width: int, seed: int, decay: float = 0.7) -> np.ndarray:
    """Diamond-square heightmap normalized to [0,1]. The perturbation
    amplitude shrinks by `decay` per subdivision step; fully determined by the
    seed."""
    size = 1
    while size < max(height, width):
        size *= 2
    rng = image_stream(seed, 0)
    grid = np.zeros((size + 1, size + 1))
    amplitude = 1.0
    step = size
    while step >= 2:
        half = step // 2
        # diamond: centers of squares
        for i in range(half, size, step):
            for j in range(half, size, step):
                corners = (
                    grid[i - half, j - half]
                    + grid[i - half, j + half]
                    + grid[i + half, j - half]
                    + grid[i + half, j + half]
                )
                grid[i, j] = corners / 4.0 + rng.uniform(-amplitude, amplitude)
        # square: edge midpoints
        for i in range(0, size + 1, half):
            start = half if (i // half) % 2 == 0 else 0
            for j in range(start, size + 1, step):
                total = 0.0
                count = 0
                for di, dj in ((-half, 0), (half, 0), (0, -half), (0, half)):
                    ni, nj = i + di, j + dj
                    if 0 <= ni <= size and 0 <= nj <= size:
                        total += grid[ni, nj]
                        count += 1
                grid[i, j] = total / count + rng.uniform(-amplitude, amplitude)
        amplitude *= decay
        step = half
    grid = grid[:height, :width]
    lo, hi = grid.min(), grid.max()
    if hi == lo:
        return np.zeros((height, width))
    return (grid - lo) / (hi - lo)


def fog(image: ImageTensor, blend: float, seed: int, decay: float = 0.7) -> ImageTensor:
    """Blend a deterministic plasma-fractal haze layer over the image, then
    renormalize so the pre-fog maximum is preserved."""
    if blend == 0.0:
        return image
    layer = plasma_fractal(image.height, image.width, seed, decay)
    max_val = image.data.max()
    out = (image.data + blend * layer[None, :, :]) * max_val / (max_val + blend)
    return ImageTensor(np.clip(out, 0.0, 1.0), image.label)


def corrupt(image: ImageTensor, spec: CorruptionSpec, constants=None) -> ImageTensor:
    """Apply one corruption at the given severity, using the shipped severity
    constants unless an override table is supplied."""
    params = (constants or _constants())[(spec.kind, spec.severity)]
    if spec.kind == "gaussian_noise":
        return gaussian_noise(image, params[0], image_stream(spec.seed, 0))
    if spec.kind == "gaussian_blur":
        return gaussian_blur(image, params[0])
    if spec.kind == "contrast":
        return adjust_contrast(image, params[0])
    return fog(image, params[0], spec.seed, params[1])


def corrupt_collection(images, spec: CorruptionSpec, constants=None) -> list[ImageTensor]:
    """Corrupt a collection with one derived stream per image index."""
    out = []
    for i, img in enumerate(images):
        per_image = CorruptionSpec(spec.kind, spec.severity, derive_seed(spec.seed, i))
        out.append(corrupt(img, per_image, constants))
    return out


def derive_seed(seed: int, index: int) -> int:
    """Mix a base seed with an index into an independent 64-bit stream seed."""
    # splitmix64-style finalizer over (seed, index)
    z = (seed * 0x9E3779B97F4A7C15 + index + 1) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)
