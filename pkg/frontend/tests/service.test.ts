import { ChildProcessWithoutNullStreams, spawn } from "node:child_process";
import { createInterface } from "node:readline";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { FreqaugClient, ServiceError, ShapeError, VERSION } from "../src/index.js";
import type { BatchArray, ImageArray } from "../src/index.js";

const PORT = 8741;
const BASE_URL = `http://127.0.0.1:${PORT}`;
const HERE = dirname(fileURLToPath(import.meta.url));
const DRIVER = join(HERE, "..", "scripts", "reference_driver.py");

let server: ChildProcessWithoutNullStreams;
let driver: ChildProcessWithoutNullStreams;
const pending = new Map<number, (value: Record<string, unknown>) => void>();
let nextId = 0;
const client = new FreqaugClient(BASE_URL);

/** Call the core package directly through the JSON-lines driver, the
 * reference path the HTTP route must numerically match. */
function reference(op: string, payload: Record<string, unknown>): Promise<Record<string, unknown>> {
    const id = nextId++;
    return new Promise((resolve, reject) => {
        pending.set(id, (value) => {
            if (value.error !== undefined) {
                reject(new Error(String(value.error)));
            } else {
                resolve(value);
            }
        });
        driver.stdin.write(JSON.stringify({ id, op, ...payload }) + "\n");
    });
}

// deterministic small PRNG so every run sees identical batches
function mulberry32(seed: number): () => number {
    let state = seed >>> 0;
    return () => {
        state = (state + 0x6d2b79f5) >>> 0;
        let t = state;
        t = Math.imul(t ^ (t >>> 15), t | 1);
        t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
        return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
    };
}

function randomBatch(rand: () => number, n: number, h: number, w: number, c: number): BatchArray {
    return Array.from({ length: n }, () =>
        Array.from({ length: h }, () =>
            Array.from({ length: w }, () => Array.from({ length: c }, () => rand())),
        ),
    );
}

function maxAbsDiff(a: unknown, b: unknown): number {
    if (typeof a === "number" && typeof b === "number") {
        return Math.abs(a - b);
    }
    const arrA = a as unknown[];
    const arrB = b as unknown[];
    if (!Array.isArray(arrA) || !Array.isArray(arrB) || arrA.length !== arrB.length) {
        throw new Error("structure mismatch");
    }
    let worst = 0;
    for (let i = 0; i < arrA.length; i++) {
        worst = Math.max(worst, maxAbsDiff(arrA[i], arrB[i]));
    }
    return worst;
}

async function waitForHealth(timeoutMs: number): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
        try {
            const info = await client.health();
            if (info.status === "ok") {
                return;
            }
        } catch {
            // not up yet
        }
        if (Date.now() > deadline) {
            throw new Error(`service did not come up on ${BASE_URL}`);
        }
        await new Promise((r) => setTimeout(r, 200));
    }
}

beforeAll(async () => {
    server = spawn("python3", [
        "-m", "uvicorn", "freqaug.server:app",
        "--host", "127.0.0.1", "--port", String(PORT), "--log-level", "warning",
    ]);
    driver = spawn("python3", [DRIVER]);
    createInterface({ input: driver.stdout }).on("line", (line) => {
        const value = JSON.parse(line) as Record<string, unknown>;
        const resolve = pending.get(value.id as number);
        if (resolve) {
            pending.delete(value.id as number);
            resolve(value);
        }
    });
    driver.stderr.on("data", (chunk: Buffer) => {
        process.stderr.write(chunk);
    });
    await waitForHealth(30_000);
});

afterAll(() => {
    server?.kill();
    driver?.kill();
});

describe("service basics", () => {
    it("reports a version matching the client build", async () => {
        const info = await client.health();
        expect(info.status).toBe("ok");
        expect(info.version).toBe(VERSION);
    });

    it("serves masks with the documented popcount", async () => {
        const masks = await client.makeMasks(32, 32, 4);
        const popcount = masks.low.flat().reduce((s, v) => s + v, 0);
        expect(popcount).toBe(45);
        expect(masks.center).toEqual([16, 16]);
        for (let i = 0; i < 32; i++) {
            for (let j = 0; j < 32; j++) {
                expect(masks.low[i][j] + masks.high[i][j]).toBe(1);
            }
        }
    });

    it("computes the analytic AUROC case", async () => {
        const roc = await client.auroc([0.9, 0.4], [0.6, 0.1]);
        expect(roc.auroc).toBe(0.75);
        expect(roc.rocPoints[0]).toEqual([0, 0]);
        expect(roc.rocPoints[roc.rocPoints.length - 1]).toEqual([1, 1]);
    });
});

describe("swap and phase transforms", () => {
    it("self-pair swap is the identity", async () => {
        const rand = mulberry32(11);
        const batch = randomBatch(rand, 2, 8, 8, 3);
        const out = await client.rfcSwap(batch, batch, { radius: 4, clip: false });
        expect(maxAbsDiff(out.mixedA, batch)).toBeLessThan(1e-6);
        expect(maxAbsDiff(out.mixedB, batch)).toBeLessThan(1e-6);
    });

    it("radius 0 swaps the batches", async () => {
        const rand = mulberry32(12);
        const a = randomBatch(rand, 2, 8, 8, 1);
        const b = randomBatch(rand, 2, 8, 8, 1);
        const out = await client.rfcSwap(a, b, { radius: 0, clip: false });
        expect(maxAbsDiff(out.mixedA, b)).toBeLessThan(1e-6);
        expect(maxAbsDiff(out.mixedB, a)).toBeLessThan(1e-6);
    });

    it("accepts single images and unwraps the result", async () => {
        const rand = mulberry32(13);
        const image = randomBatch(rand, 1, 8, 8, 3)[0];
        const out = await client.rfcSwap(image, image, { clip: false });
        const mixed = out.mixedA as ImageArray;
        expect(Array.isArray(mixed[0][0])).toBe(true); // rank 3, not 4
        expect(maxAbsDiff(mixed, image)).toBeLessThan(1e-6);
    });

    it("phase-only with an image's own amplitude is the identity", async () => {
        const rand = mulberry32(14);
        const image = randomBatch(rand, 1, 8, 8, 3)[0];
        const { amplitude, sourceCount } = await client.meanAmplitude(image);
        expect(sourceCount).toBe(1);
        const out = await client.phaseOnly(image, amplitude, { clip: false });
        expect(maxAbsDiff(out, image)).toBeLessThan(1e-6);
    });

    it("apr with itself is the identity", async () => {
        const rand = mulberry32(15);
        const batch = randomBatch(rand, 2, 8, 8, 3);
        const out = await client.aprRecombine(batch, batch, { clip: false });
        expect(maxAbsDiff(out, batch)).toBeLessThan(1e-6);
    });

    it("zero batch keeps the zero-phase convention", async () => {
        const zero = randomBatch(() => 0, 1, 8, 8, 1);
        const rand = mulberry32(16);
        const { amplitude } = await client.meanAmplitude(randomBatch(rand, 1, 8, 8, 1)[0]);
        const viaClient = await client.phaseOnly(zero, amplitude, { clip: false });
        const viaCore = await reference("phase_only", {
            batch: zero,
            mean_amplitude: amplitude,
            clip: false,
        });
        expect(maxAbsDiff(viaClient, viaCore.output)).toBeLessThan(1e-6);
    });
});

describe("boundary errors", () => {
    it("rejects mismatched swap batches client-side, naming both shapes", async () => {
        const rand = mulberry32(21);
        const a = randomBatch(rand, 1, 8, 8, 3);
        const b = randomBatch(rand, 1, 16, 16, 3);
        await expect(client.rfcSwap(a, b)).rejects.toThrow(ShapeError);
        await expect(client.rfcSwap(a, b)).rejects.toThrow(/\(1, 8, 8, 3\).*\(1, 16, 16, 3\)/);
    });

    it("rejects mismatched mean amplitude", async () => {
        const rand = mulberry32(22);
        const batch = randomBatch(rand, 1, 8, 8, 3);
        const amp = randomBatch(rand, 1, 4, 4, 3)[0];
        await expect(client.phaseOnly(batch, amp)).rejects.toThrow(/does not match image shape/);
    });

    it("rejects wrong rank before any request is sent", async () => {
        await expect(client.meanAmplitude([[0.5]] as never)).rejects.toThrow(/rank 2/);
    });

    it("surfaces service-side validation as ServiceError", async () => {
        const rand = mulberry32(23);
        const batch = randomBatch(rand, 1, 8, 8, 3);
        await expect(client.bandProbe(batch, "sideways")).rejects.toThrow(ServiceError);
    });
});

describe("cross-path equivalence", () => {
    it("swap and phase-only agree with the core package on 50 random batches", async () => {
        const rand = mulberry32(31);
        const sides = [4, 8, 16];
        const channelChoices = [1, 3];
        const radii = [0, 2, 4];
        let worstSwap = 0;
        let worstPhase = 0;
        for (let i = 0; i < 50; i++) {
            const side = sides[i % sides.length];
            const channels = channelChoices[i % channelChoices.length];
            const radius = radii[i % radii.length];
            const clip = i % 2 === 0;
            const a = randomBatch(rand, 2, side, side, channels);
            const b = randomBatch(rand, 2, side, side, channels);

            const viaClient = await client.rfcSwap(a, b, { radius, clip });
            const viaCore = await reference("rfc_swap", {
                batch_a: a, batch_b: b, radius, clip,
            });
            worstSwap = Math.max(
                worstSwap,
                maxAbsDiff(viaClient.mixedA, viaCore.mixed_a),
                maxAbsDiff(viaClient.mixedB, viaCore.mixed_b),
            );

            const { amplitude } = await client.meanAmplitude(a);
            const phaseClient = await client.phaseOnly(a, amplitude, { clip });
            const phaseCore = await reference("phase_only", {
                batch: a, mean_amplitude: amplitude, clip,
            });
            worstPhase = Math.max(worstPhase, maxAbsDiff(phaseClient, phaseCore.output));
        }
        console.log(`max |client - core|: swap ${worstSwap.toExponential(2)}, ` +
            `phase ${worstPhase.toExponential(2)}`);
        expect(worstSwap).toBeLessThan(1e-6);
        expect(worstPhase).toBeLessThan(1e-6);
    });

    it("amplitude recombination agrees with the core package", async () => {
        const rand = mulberry32(32);
        for (let i = 0; i < 5; i++) {
            const p = randomBatch(rand, 2, 8, 8, 3);
            const a = randomBatch(rand, 2, 8, 8, 3);
            const viaClient = await client.aprRecombine(p, a, { clip: true });
            const viaCore = await reference("apr_recombine", {
                phase_batch: p, amplitude_batch: a, clip: true,
            });
            expect(maxAbsDiff(viaClient, viaCore.mixed)).toBeLessThan(1e-6);
        }
    });

    it("mean amplitude agrees with the core package", async () => {
        const rand = mulberry32(33);
        const batch = randomBatch(rand, 4, 8, 8, 3);
        const viaClient = await client.meanAmplitude(batch);
        const viaCore = await reference("mean_amplitude", { batch });
        expect(viaClient.sourceCount).toBe(viaCore.source_count);
        expect(maxAbsDiff(viaClient.amplitude, viaCore.amplitude)).toBeLessThan(1e-6);
    });
});
