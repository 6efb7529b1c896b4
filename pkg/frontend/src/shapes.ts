/** Image payloads travel as nested number arrays, channel-last:
 * a single image is (H, W, C), a batch is (N, H, W, C). Channel count
 * must be 1 or 3. Shapes are validated before anything goes on the wire
 * so mismatches fail fast with both offending shapes in the message.
 */

export type ImageArray = number[][][];
export type BatchArray = number[][][][];

export class ShapeError extends Error {
    constructor(message: string) {
        super(message);
        this.name = "ShapeError";
    }
}

export type Shape4 = [number, number, number, number];

function rank(value: unknown): number {
    let depth = 0;
    let cursor: unknown = value;
    while (Array.isArray(cursor)) {
        depth += 1;
        cursor = cursor[0];
    }
    return depth;
}

/** Validate a rectangular (N, H, W, C) array and return its shape. */
export function batchShape(value: BatchArray, name: string): Shape4 {
    if (Array.isArray(value) && value.length === 0) {
        throw new ShapeError(`${name}: empty batch`);
    }
    if (rank(value) !== 4) {
        throw new ShapeError(`${name}: expected rank-4 (N, H, W, C) data, got rank ${rank(value)}`);
    }
    const n = value.length;
    const h = value[0].length;
    const w = h > 0 ? value[0][0].length : 0;
    const c = w > 0 ? value[0][0][0].length : 0;
    if (c !== 1 && c !== 3) {
        throw new ShapeError(`${name}: channel count ${c} not in (1, 3)`);
    }
    for (let i = 0; i < n; i++) {
        if (value[i].length !== h) {
            throw new ShapeError(`${name}: image ${i} has height ${value[i].length}, expected ${h}`);
        }
        for (let row = 0; row < h; row++) {
            if (value[i][row].length !== w) {
                throw new ShapeError(`${name}: image ${i} row ${row} has width ${value[i][row].length}, expected ${w}`);
            }
        }
    }
    return [n, h, w, c];
}

/** Validate a rectangular (H, W, C) array and return its shape. */
export function imageShape(value: ImageArray, name: string): [number, number, number] {
    if (rank(value) !== 3) {
        throw new ShapeError(`${name}: expected rank-3 (H, W, C) data, got rank ${rank(value)}`);
    }
    const [n, h, w, c] = batchShape([value], name);
    void n;
    return [h, w, c];
}

/** Accept a single (H, W, C) image or an (N, H, W, C) batch; always hand
 * back a batch plus a flag saying whether to unwrap the result. */
export function toBatch(value: ImageArray | BatchArray, name: string): { batch: BatchArray; single: boolean } {
    const r = rank(value);
    if (r === 3) {
        const batch = [value as ImageArray];
        batchShape(batch, name);
        return { batch, single: true };
    }
    batchShape(value as BatchArray, name);
    return { batch: value as BatchArray, single: false };
}

export function requireSameShape(a: Shape4, b: Shape4, nameA: string, nameB: string): void {
    if (a.some((dim, i) => dim !== b[i])) {
        throw new ShapeError(
            `${nameA} shape (${a.join(", ")}) does not match ${nameB} shape (${b.join(", ")})`,
        );
    }
}
