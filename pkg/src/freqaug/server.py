"""HTTP service exposing the stateless transforms.

Wire format: image batches travel as nested float lists, channel-last
(N, H, W, C) with values expected in [0, 1]; responses use the same layout.
Labels never cross this boundary; callers pair same-class images themselves.
Bad shapes get a 400 naming both offending shapes.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import augment as aug
from . import oodval, probe, spectral
from .errors import ToolkitError
from .manifest import TOOLKIT_VERSION
from .tensorio import ImageTensor

app = FastAPI(title="freqaug", version=TOOLKIT_VERSION)


def _as_batch(payload, name: str) -> list[ImageTensor]:
    try:
        arr = np.asarray(payload, dtype=np.float64)
    except (TypeError, ValueError):
        raise HTTPException(400, f"{name}: not a numeric array") from None
    if arr.ndim != 4:
        raise HTTPException(400, f"{name}: expected (N, H, W, C), got shape {arr.shape}")
    if arr.shape[3] not in (1, 3):
        raise HTTPException(400, f"{name}: channel count {arr.shape[3]} not in (1, 3)")
    if arr.shape[0] == 0:
        raise HTTPException(400, f"{name}: empty batch")
    return [ImageTensor(arr[i].transpose(2, 0, 1)) for i in range(arr.shape[0])]


def _as_wire(images: list[ImageTensor]) -> list:
    return [img.data.transpose(1, 2, 0).tolist() for img in images]


def _check_same_shape(a: list[ImageTensor], b: list[ImageTensor], name_a: str, name_b: str):
    if len(a) != len(b) or a[0].shape != b[0].shape:
        raise HTTPException(
            400,
            f"{name_a} shape ({len(a)}, {a[0].shape}) does not match "
            f"{name_b} shape ({len(b)}, {b[0].shape})",
        )


def _mean_amp_from_wire(payload) -> probe.MeanAmplitude:
    arr = np.asarray(payload, dtype=np.float64)
    if arr.ndim != 3:
        raise HTTPException(400, f"mean_amplitude: expected (H, W, C), got shape {arr.shape}")
    return probe.MeanAmplitude(arr.transpose(2, 0, 1), source_count=1)


class MasksRequest(BaseModel):
    height: int
    width: int
    radius: float


class RfcSwapRequest(BaseModel):
    batch_a: list
    batch_b: list
    radius: float = 4.0
    seed: int | None = None  # accepted for interface parity; the swap is deterministic
    clip: bool = True


class AprRequest(BaseModel):
    phase_batch: list
    amplitude_batch: list
    clip: bool = True


class PhaseOnlyRequest(BaseModel):
    batch: list
    mean_amplitude: list
    clip: bool = True


class BandProbeRequest(BaseModel):
    batch: list
    kind: str
    radius: float | None = None
    mean_amplitude: list | None = None
    clip: bool = True


class MeanAmplitudeRequest(BaseModel):
    batch: list


class AurocRequest(BaseModel):
    in_scores: list[float]
    ood_scores: list[float]


@app.get("/health")
def health():
    return {"status": "ok", "version": TOOLKIT_VERSION}


@app.post("/masks")
def masks(req: MasksRequest):
    try:
        low, high = spectral.make_masks(req.height, req.width, req.radius)
    except ToolkitError as exc:
        raise HTTPException(400, str(exc)) from exc
    return {
        "low": low.bits.tolist(),
        "high": high.bits.tolist(),
        "center": list(spectral.center_indices(req.height, req.width)),
    }


@app.post("/rfc-swap")
def rfc_swap(req: RfcSwapRequest):
    batch_a = _as_batch(req.batch_a, "batch_a")
    batch_b = _as_batch(req.batch_b, "batch_b")
    _check_same_shape(batch_a, batch_b, "batch_a", "batch_b")
    mixed_a, mixed_b = [], []
    try:
        for x, y in zip(batch_a, batch_b):
            ma, mb = aug.rfc_swap(x, y, req.radius, clip=req.clip)
            mixed_a.append(ma)
            mixed_b.append(mb)
    except ToolkitError as exc:
        raise HTTPException(400, str(exc)) from exc
    return {"mixed_a": _as_wire(mixed_a), "mixed_b": _as_wire(mixed_b)}


@app.post("/apr-recombine")
def apr_recombine(req: AprRequest):
    phase = _as_batch(req.phase_batch, "phase_batch")
    amplitude = _as_batch(req.amplitude_batch, "amplitude_batch")
    _check_same_shape(phase, amplitude, "phase_batch", "amplitude_batch")
    try:
        out = [aug.apr_recombine(p, a, clip=req.clip) for p, a in zip(phase, amplitude)]
    except ToolkitError as exc:
        raise HTTPException(400, str(exc)) from exc
    return {"mixed": _as_wire(out)}


@app.post("/phase-only")
def phase_only(req: PhaseOnlyRequest):
    batch = _as_batch(req.batch, "batch")
    mean_amp = _mean_amp_from_wire(req.mean_amplitude)
    try:
        out = [probe.phase_only(img, mean_amp, clip=req.clip) for img in batch]
    except ToolkitError as exc:
        raise HTTPException(400, str(exc)) from exc
    return {"output": _as_wire(out)}


@app.post("/band-probe")
def band_probe(req: BandProbeRequest):
    batch = _as_batch(req.batch, "batch")
    mean_amp = _mean_amp_from_wire(req.mean_amplitude) if req.mean_amplitude is not None else None
    try:
        kind = probe.ProbeKind(req.kind, req.radius)
        out = [probe.band_probe(img, kind, mean_amp, clip=req.clip) for img in batch]
    except ToolkitError as exc:
        raise HTTPException(400, str(exc)) from exc
    return {"output": _as_wire(out)}


@app.post("/mean-amplitude")
def mean_amplitude(req: MeanAmplitudeRequest):
    batch = _as_batch(req.batch, "batch")
    try:
        amp = probe.mean_amplitude(batch)
    except ToolkitError as exc:
        raise HTTPException(400, str(exc)) from exc
    return {
        "amplitude": amp.amplitude.transpose(1, 2, 0).tolist(),
        "source_count": amp.source_count,
    }


@app.post("/auroc")
def auroc_endpoint(req: AurocRequest):
    try:
        report = oodval.auroc(oodval.ScoreSet(np.array(req.in_scores), np.array(req.ood_scores)))
    except ToolkitError as exc:
        raise HTTPException(400, str(exc)) from exc
    return {
        "auroc": report.auroc,
        "threshold_count": report.threshold_count,
        "roc_points": [list(p) for p in report.roc_points],
    }
