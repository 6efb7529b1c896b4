"""Test scaffolding: answer JSON-lines requests by calling the core package
directly, bypassing the HTTP service. The equivalence suite compares this
path against the client+service path on identical inputs.

Request:  {"id": .., "op": "rfc_swap"|"phase_only"|"apr_recombine"|"mean_amplitude", ...}
Response: {"id": .., ...} or {"id": .., "error": "..."}

Batches are channel-last (N, H, W, C) nested lists, like the wire format.
"""

import json
import sys

import numpy as np

from freqaug import augment, probe
from freqaug.tensorio import ImageTensor


def to_images(payload):
    arr = np.asarray(payload, dtype=np.float64)
    return [ImageTensor(arr[i].transpose(2, 0, 1)) for i in range(arr.shape[0])]


def to_wire(images):
    return [img.data.transpose(1, 2, 0).tolist() for img in images]


def handle(request):
    op = request["op"]
    if op == "rfc_swap":
        batch_a = to_images(request["batch_a"])
        batch_b = to_images(request["batch_b"])
        clip = request.get("clip", True)
        mixed = [augment.rfc_swap(x, y, request["radius"], clip=clip)
                 for x, y in zip(batch_a, batch_b)]
        return {"mixed_a": to_wire([m[0] for m in mixed]),
                "mixed_b": to_wire([m[1] for m in mixed])}
    if op == "apr_recombine":
        phase = to_images(request["phase_batch"])
        amplitude = to_images(request["amplitude_batch"])
        clip = request.get("clip", True)
        out = [augment.apr_recombine(p, a, clip=clip) for p, a in zip(phase, amplitude)]
        return {"mixed": to_wire(out)}
    if op == "phase_only":
        batch = to_images(request["batch"])
        amp_arr = np.asarray(request["mean_amplitude"], dtype=np.float64).transpose(2, 0, 1)
        mean_amp = probe.MeanAmplitude(amp_arr, source_count=1)
        clip = request.get("clip", True)
        out = [probe.phase_only(img, mean_amp, clip=clip) for img in batch]
        return {"output": to_wire(out)}
    if op == "mean_amplitude":
        amp = probe.mean_amplitude(to_images(request["batch"]))
        return {"amplitude": amp.amplitude.transpose(1, 2, 0).tolist(),
                "source_count": amp.source_count}
    raise ValueError(f"unknown op {op!r}")


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        try:
            response = handle(request)
        except Exception as exc:
            response = {"error": f"{type(exc).__name__}: {exc}"}
        response["id"] = request.get("id")
        print(json.dumps(response), flush=True)


if __name__ == "__main__":
    main()
