"""2D DFT/IDFT with center-shifted spectra, circular band masks, and
amplitude/phase decomposition.

Conventions (fixed for reproducibility):
  - forward transform unnormalized (DC coefficient = pixel sum), inverse
    carries the 1/(H*W) factor;
  - spectra are center-shifted so the DC coefficient sits at
    (H//2, W//2) on every channel plane;
  - masks are computed on the shifted spectrum, low-pass strictly inside
    radius r of the DC position, high-pass the complement;
  - the phase of a zero coefficient is 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError
from .tensorio import ImageTensor


@dataclass(frozen=True)
class Spectrum:
    """Per-channel complex DFT plane, shape (channels, height, width), DC at
    (height//2, width//2)."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=np.complex128)
        if arr.ndim != 3:
            raise ShapeError(f"spectrum must be (channels, height, width), got {arr.shape}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @property
    def channels(self) -> int:
        return self.coeffs.shape[0]

    @property
    def height(self) -> int:
        return self.coeffs.shape[1]

    @property
    def width(self) -> int:
        return self.coeffs.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.coeffs.shape


@dataclass(frozen=True)
class FreqMask:
    """Binary (height, width) matrix selecting a frequency band on a shifted
    spectrum. kind is "low" (strictly inside radius) or "high" (complement)."""

    bits: np.ndarray
    radius: float
    kind: str

    def __post_init__(self):
        arr = np.asarray(self.bits, dtype=np.uint8)
        if arr.ndim != 2:
            raise ShapeError(f"mask must be 2-D, got shape {arr.shape}")
        if self.kind not in ("low", "high"):
            raise DomainError(f"mask kind must be 'low' or 'high', got {self.kind!r}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]


@dataclass(frozen=True)
class PolarSpectrum:
    """Amplitude (modulus) and phase (principal argument) of a Spectrum,
    both shape (channels, height, width)."""

    amplitude: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        amp = np.ascontiguousarray(np.asarray(self.amplitude, dtype=np.float64))
        pha = np.ascontiguousarray(np.asarray(self.phase, dtype=np.float64))
        if amp.shape != pha.shape or amp.ndim != 3:
            raise ShapeError(
                f"amplitude/phase must share a (C,H,W) shape, got {amp.shape} vs {pha.shape}"
            )
        amp.flags.writeable = False
        pha.flags.writeable = False
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "phase", pha)


def dft2(image: ImageTensor) -> Spectrum:
    """Per-channel 2D DFT of an image, center-shifted."""
    return Spectrum(dft2_array(image.data))


def idft2(spectrum: Spectrum, label: int | None = None) -> ImageTensor:
    """Inverse of dft2. The imaginary residue is discarded; for spectra with a
    real-image origin it is at float-noise level. Output is NOT clamped."""
    return ImageTensor(idft2_array(spectrum.coeffs), label)


def dft2_array(data: np.ndarray) -> np.ndarray:
    """(C,H,W) real -> (C,H,W) complex, shifted so DC sits at (H//2, W//2)."""
    return np.fft.fftshift(np.fft.fft2(data, axes=(-2, -1)), axes=(-2, -1))


def idft2_array(coeffs: np.ndarray) -> np.ndarray:
    """(C,H,W) shifted complex -> (C,H,W) real (imaginary part dropped)."""
    return np.fft.ifft2(np.fft.ifftshift(coeffs, axes=(-2, -1)), axes=(-2, -1)).real


def center_indices(height: int, width: int) -> tuple[int, int]:
    """Position of the DC coefficient on a shifted plane."""
    return height // 2, width // 2


def make_masks(height: int, width: int, radius: float) -> tuple[FreqMask, FreqMask]:
    """Low/high band masks: low(i,j)=1 iff the Euclidean distance from the DC
    position is strictly below radius; high is the complement."""
    if radius < 0:
        raise DomainError(f"radius must be >= 0, got {radius}")
    ci, cj = center_indices(height, width)
    di = np.arange(height)[:, None] - ci
    dj = np.arange(width)[None, :] - cj
    low = (np.sqrt(di * di + dj * dj) < radius).astype(np.uint8)
    high = (1 - low).astype(np.uint8)
    return FreqMask(low, radius, "low"), FreqMask(high, radius, "high")


def band_split(spectrum: Spectrum, low: FreqMask, high: FreqMask) -> tuple[Spectrum, Spectrum]:
    """Elementwise masking into low/high band spectra; their sum is exactly
    the input because the masks are binary complements."""
    if (low.height, low.width) != (spectrum.height, spectrum.width):
        raise ShapeError(
            f"low mask is {low.bits.shape}, spectrum planes are "
            f"{(spectrum.height, spectrum.width)}"
        )
    if (high.height, high.width) != (spectrum.height, spectrum.width):
        raise ShapeError(
            f"high mask is {high.bits.shape}, spectrum planes are "
            f"{(spectrum.height, spectrum.width)}"
        )
    z_l = spectrum.coeffs * low.bits
    z_h = spectrum.coeffs * high.bits
    return Spectrum(z_l), Spectrum(z_h)


def to_polar(spectrum: Spectrum) -> PolarSpectrum:
    """Modulus and principal argument per coefficient. Zero coefficients get
    phase 0; the phase range is (-pi, pi]."""
    amplitude = np.abs(spectrum.coeffs)
    phase = np.angle(spectrum.coeffs)
    # np.angle can emit -pi for (-x - 0j); fold onto the principal branch
    phase = np.where(phase == -np.pi, np.pi, phase)
    phase = np.where(amplitude == 0.0, 0.0, phase)
    return PolarSpectrum(amplitude, phase)


def from_polar(polar: PolarSpectrum) -> Spectrum:
    """Recombine amplitude and phase: coeff = amplitude * e^{i*phase}."""
    if np.any(polar.amplitude < 0):
        raise DomainError("amplitude must be nonnegative")
    return Spectrum(polar.amplitude * np.exp(1j * polar.phase))
