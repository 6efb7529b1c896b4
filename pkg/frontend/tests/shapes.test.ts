import { describe, expect, it } from "vitest";

import { ShapeError, batchShape, imageShape, requireSameShape, toBatch } from "../src/shapes.js";

function zeros(n: number, h: number, w: number, c: number): number[][][][] {
    return Array.from({ length: n }, () =>
        Array.from({ length: h }, () => Array.from({ length: w }, () => Array(c).fill(0))),
    );
}

describe("batchShape", () => {
    it("reads a rectangular batch", () => {
        expect(batchShape(zeros(2, 4, 5, 3), "batch")).toEqual([2, 4, 5, 3]);
    });

    it("rejects wrong rank", () => {
        expect(() => batchShape([[0.5]] as never, "batch")).toThrow(ShapeError);
        expect(() => batchShape([[0.5]] as never, "batch")).toThrow(/rank 2/);
    });

    it("rejects empty batches", () => {
        expect(() => batchShape([], "batch")).toThrow(/empty/);
    });

    it("rejects bad channel counts", () => {
        expect(() => batchShape(zeros(1, 2, 2, 2), "batch")).toThrow(/channel count 2/);
    });

    it("rejects ragged rows and names the offender", () => {
        const ragged = zeros(2, 3, 3, 1);
        ragged[1][2] = ragged[1][2].slice(0, 2);
        expect(() => batchShape(ragged, "batch")).toThrow(/image 1 row 2/);
    });
});

describe("toBatch", () => {
    it("wraps a single image and remembers to unwrap", () => {
        const { batch, single } = toBatch(zeros(1, 2, 2, 3)[0], "batch");
        expect(single).toBe(true);
        expect(batchShape(batch, "batch")).toEqual([1, 2, 2, 3]);
    });

    it("passes batches through", () => {
        const { batch, single } = toBatch(zeros(3, 2, 2, 1), "batch");
        expect(single).toBe(false);
        expect(batch.length).toBe(3);
    });
});

describe("requireSameShape", () => {
    it("names both shapes on mismatch", () => {
        const a = batchShape(zeros(1, 8, 8, 3), "a");
        const b = batchShape(zeros(1, 16, 16, 3), "b");
        expect(() => requireSameShape(a, b, "batch_a", "batch_b")).toThrow(
            /batch_a shape \(1, 8, 8, 3\) does not match batch_b shape \(1, 16, 16, 3\)/,
        );
    });

    it("accepts equal shapes", () => {
        const a = batchShape(zeros(2, 4, 4, 1), "a");
        expect(() => requireSameShape(a, a, "a", "b")).not.toThrow();
    });
});

describe("imageShape", () => {
    it("reads (H, W, C)", () => {
        expect(imageShape(zeros(1, 4, 6, 3)[0], "amp")).toEqual([4, 6, 3]);
    });

    it("rejects batches", () => {
        expect(() => imageShape(zeros(2, 4, 4, 3) as never, "amp")).toThrow(/rank 4/);
    });
});
