export {
    FreqaugClient,
    ServiceError,
    VERSION,
    type HealthInfo,
    type MaskPair,
    type ProbeOptions,
    type RocSummary,
    type SwapOptions,
} from "./client.js";
export {
    ShapeError,
    batchShape,
    imageShape,
    requireSameShape,
    toBatch,
    type BatchArray,
    type ImageArray,
    type Shape4,
} from "./shapes.js";
