import {
    BatchArray,
    ImageArray,
    ShapeError,
    batchShape,
    imageShape,
    requireSameShape,
    toBatch,
} from "./shapes.js";

/** Mirrors the service's version; a mismatch from health() means the
 * client and service were built from different releases. */
export const VERSION = "0.1.0";

/** Raised when the service answers with an error status. */
export class ServiceError extends Error {
    readonly status: number;

    constructor(status: number, detail: string) {
        super(`service responded ${status}: ${detail}`);
        this.name = "ServiceError";
        this.status = status;
    }
}

export interface SwapOptions {
    /** Band radius in frequency pixels; frequencies strictly inside swap. */
    radius?: number;
    /** Accepted for interface parity; the swap itself is deterministic. */
    seed?: number;
    /** Clamp outputs to [0, 1] (default true). */
    clip?: boolean;
}

export interface ProbeOptions {
    radius?: number;
    meanAmplitude?: ImageArray;
    clip?: boolean;
}

export interface HealthInfo {
    status: string;
    version: string;
}

export interface MaskPair {
    low: number[][];
    high: number[][];
    center: [number, number];
}

export interface RocSummary {
    auroc: number;
    thresholdCount: number;
    rocPoints: [number, number][];
}

type Wire = Record<string, unknown>;

/** HTTP client for the freqaug transform service.
 *
 * Batches are channel-last nested arrays, (N, H, W, C); single (H, W, C)
 * images are accepted anywhere a batch is and the result is unwrapped to
 * match. Labels never cross this boundary: callers pair same-class images
 * themselves.
 */
export class FreqaugClient {
    private readonly baseUrl: string;

    constructor(baseUrl: string) {
        this.baseUrl = baseUrl.replace(/\/+$/, "");
    }

    private async post<T>(path: string, body: Wire): Promise<T> {
        const resp = await fetch(`${this.baseUrl}${path}`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
        if (!resp.ok) {
            let detail = resp.statusText;
            try {
                const parsed = (await resp.json()) as { detail?: unknown };
                if (parsed.detail !== undefined) {
                    detail = typeof parsed.detail === "string" ? parsed.detail : JSON.stringify(parsed.detail);
                }
            } catch {
                // keep the status text
            }
            throw new ServiceError(resp.status, detail);
        }
        return (await resp.json()) as T;
    }

    async health(): Promise<HealthInfo> {
        const resp = await fetch(`${this.baseUrl}/health`);
        if (!resp.ok) {
            throw new ServiceError(resp.status, resp.statusText);
        }
        return (await resp.json()) as HealthInfo;
    }

    /** Low/high binary masks for a (height, width) spectrum at the given
     * radius, plus the centered zero-frequency index. */
    async makeMasks(height: number, width: number, radius: number): Promise<MaskPair> {
        return this.post<MaskPair>("/masks", { height, width, radius });
    }

    /** Swap the low-frequency band between element-wise pairs of two
     * equally shaped batches. Pair same-class images only; the class
     * contract stays with the caller. */
    async rfcSwap(
        batchA: ImageArray | BatchArray,
        batchB: ImageArray | BatchArray,
        options: SwapOptions = {},
    ): Promise<{ mixedA: ImageArray | BatchArray; mixedB: ImageArray | BatchArray }> {
        const a = toBatch(batchA, "batch_a");
        const b = toBatch(batchB, "batch_b");
        requireSameShape(
            batchShape(a.batch, "batch_a"),
            batchShape(b.batch, "batch_b"),
            "batch_a",
            "batch_b",
        );
        const body: Wire = {
            batch_a: a.batch,
            batch_b: b.batch,
            radius: options.radius ?? 4.0,
            clip: options.clip ?? true,
        };
        if (options.seed !== undefined) {
            body.seed = options.seed;
        }
        const out = await this.post<{ mixed_a: BatchArray; mixed_b: BatchArray }>("/rfc-swap", body);
        const single = a.single && b.single;
        return {
            mixedA: single ? out.mixed_a[0] : out.mixed_a,
            mixedB: single ? out.mixed_b[0] : out.mixed_b,
        };
    }

    /** Rebuild images from one batch's phase and the other's amplitude. */
    async aprRecombine(
        phaseBatch: ImageArray | BatchArray,
        amplitudeBatch: ImageArray | BatchArray,
        options: { clip?: boolean } = {},
    ): Promise<ImageArray | BatchArray> {
        const p = toBatch(phaseBatch, "phase_batch");
        const a = toBatch(amplitudeBatch, "amplitude_batch");
        requireSameShape(
            batchShape(p.batch, "phase_batch"),
            batchShape(a.batch, "amplitude_batch"),
            "phase_batch",
            "amplitude_batch",
        );
        const out = await this.post<{ mixed: BatchArray }>("/apr-recombine", {
            phase_batch: p.batch,
            amplitude_batch: a.batch,
            clip: options.clip ?? true,
        });
        return p.single && a.single ? out.mixed[0] : out.mixed;
    }

    /** Keep each image's phase, replace its amplitude with meanAmplitude. */
    async phaseOnly(
        batch: ImageArray | BatchArray,
        meanAmplitude: ImageArray,
        options: { clip?: boolean } = {},
    ): Promise<ImageArray | BatchArray> {
        const b = toBatch(batch, "batch");
        const [n, h, w, c] = batchShape(b.batch, "batch");
        void n;
        const [ah, aw, ac] = imageShape(meanAmplitude, "mean_amplitude");
        if (ah !== h || aw !== w || ac !== c) {
            throw new ShapeError(
                `mean_amplitude shape (${ah}, ${aw}, ${ac}) does not match image shape (${h}, ${w}, ${c})`,
            );
        }
        const out = await this.post<{ output: BatchArray }>("/phase-only", {
            batch: b.batch,
            mean_amplitude: meanAmplitude,
            clip: options.clip ?? true,
        });
        return b.single ? out.output[0] : out.output;
    }

    /** One probe variant of each image: "low"/"high" keep a band of the
     * spectrum, "low_phase"/"high_phase" band-split the phase-only
     * reconstruction, "phase_only" replaces amplitude entirely. */
    async bandProbe(
        batch: ImageArray | BatchArray,
        kind: string,
        options: ProbeOptions = {},
    ): Promise<ImageArray | BatchArray> {
        const b = toBatch(batch, "batch");
        const body: Wire = { batch: b.batch, kind, clip: options.clip ?? true };
        if (options.radius !== undefined) {
            body.radius = options.radius;
        }
        if (options.meanAmplitude !== undefined) {
            imageShape(options.meanAmplitude, "mean_amplitude");
            body.mean_amplitude = options.meanAmplitude;
        }
        const out = await this.post<{ output: BatchArray }>("/band-probe", body);
        return b.single ? out.output[0] : out.output;
    }

    /** Mean spectral amplitude over a batch, as an (H, W, C) array. */
    async meanAmplitude(
        batch: ImageArray | BatchArray,
    ): Promise<{ amplitude: ImageArray; sourceCount: number }> {
        const b = toBatch(batch, "batch");
        const out = await this.post<{ amplitude: ImageArray; source_count: number }>(
            "/mean-amplitude",
            { batch: b.batch },
        );
        return { amplitude: out.amplitude, sourceCount: out.source_count };
    }

    /** Mann-Whitney AUROC (ties count 1/2) of in-distribution vs outlier
     * confidence scores, with the swept ROC curve. */
    async auroc(inScores: number[], oodScores: number[]): Promise<RocSummary> {
        const out = await this.post<{
            auroc: number;
            threshold_count: number;
            roc_points: [number, number][];
        }>("/auroc", { in_scores: inScores, ood_scores: oodScores });
        return { auroc: out.auroc, thresholdCount: out.threshold_count, rocPoints: out.roc_points };
    }
}
