"""Desk-scale classifier: one hidden layer, ReLU, softmax, cross-entropy,
trained by minibatch SGD with momentum on a stepped learning-rate schedule.

Small enough to train in seconds, which is all the surrounding pipeline
(augment -> train -> score -> AUROC, probe tables) needs. Training is
bit-deterministic for a fixed seed.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from .augment import derive_seed
from .errors import DomainError, FormatError, ShapeError, TrainingDiverged
from .tensorio import ImageTensor, LabeledDataset

MODEL_MAGIC = b"DMLP"
MODEL_VERSION = 1


@dataclass
class SgdSchedule:
    """Stepped schedule: lr(epoch) = base_lr * decay_factor^(milestones <= epoch).

    Defaults scale the reference 200-epoch recipe (decay at 60/120/160/190)
    down to 20 epochs with the same proportions.
    """

    base_lr: float = 0.1
    decay_factor: float = 0.2
    milestone_epochs: tuple[int, ...] = (6, 12, 16, 19)
    total_epochs: int = 20
    momentum: float = 0.9
    batch_size: int = 32
    weight_decay: float = 0.0

    def __post_init__(self):
        ms = tuple(self.milestone_epochs)
        if list(ms) != sorted(set(ms)):
            raise DomainError(f"milestones must be strictly increasing, got {ms}")
        if any(m >= self.total_epochs for m in ms):
            raise DomainError(f"milestones {ms} must all be < total_epochs {self.total_epochs}")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if self.weight_decay < 0:
            raise DomainError("weight_decay must be >= 0")
        self.milestone_epochs = ms

    def lr_at(self, epoch: int) -> float:
        passed = sum(1 for m in self.milestone_epochs if m <= epoch)
        return self.base_lr * self.decay_factor**passed


@dataclass
class ClassifierState:
    """Two affine layers: hidden = relu(x@w1 + b1), probs = softmax(hidden@w2 + b2)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    rng_seed: int = 0

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def class_count(self) -> int:
        return self.w2.shape[1]

    def params(self) -> tuple[np.ndarray, ...]:
        return (self.w1, self.b1, self.w2, self.b2)


@dataclass(frozen=True)
class Gradients:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    lr: float
    loss: float
    train_acc: float
    test_acc: float | None = None


def init_state(input_dim: int, hidden_dim: int, class_count: int, seed: int) -> ClassifierState:
    """Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer."""
    rng = np.random.default_rng(seed)
    bound1 = 1.0 / np.sqrt(input_dim)
    bound2 = 1.0 / np.sqrt(hidden_dim)
    return ClassifierState(
        w1=rng.uniform(-bound1, bound1, (input_dim, hidden_dim)),
        b1=rng.uniform(-bound1, bound1, hidden_dim),
        w2=rng.uniform(-bound2, bound2, (hidden_dim, class_count)),
        b2=rng.uniform(-bound2, bound2, class_count),
        rng_seed=seed,
    )


def _flatten(image: ImageTensor) -> np.ndarray:
    return image.data.reshape(-1)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def forward_batch(state: ClassifierState, x: np.ndarray) -> np.ndarray:
    """(n, input_dim) -> (n, class_count) softmax probabilities."""
    if x.shape[1] != state.input_dim:
        raise ShapeError(f"input dim {x.shape[1]} does not match model dim {state.input_dim}")
    hidden = np.maximum(x @ state.w1 + state.b1, 0.0)
    return _softmax(hidden @ state.w2 + state.b2)


def forward(state: ClassifierState, image: ImageTensor) -> np.ndarray:
    """Probability vector for one image."""
    flat = _flatten(image)
    if flat.size != state.input_dim:
        raise ShapeError(
            f"image with shape {image.shape} flattens to {flat.size}, model wants {state.input_dim}"
        )
    return forward_batch(state, flat[None, :])[0]


def confidence(state: ClassifierState, image: ImageTensor) -> float:
    """Max-softmax confidence score."""
    return float(forward(state, image).max())


def _loss_and_grads(state, x, y):
    n = x.shape[0]
    pre = x @ state.w1 + state.b1
    hidden = np.maximum(pre, 0.0)
    logits = hidden @ state.w2 + state.b2
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = -log_probs[np.arange(n), y].mean()
    dlogits = np.exp(log_probs)
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    dhidden = dlogits @ state.w2.T
    dhidden[pre <= 0.0] = 0.0
    grads = Gradients(
        w1=x.T @ dhidden,
        b1=dhidden.sum(axis=0),
        w2=hidden.T @ dlogits,
        b2=dlogits.sum(axis=0),
    )
    return loss, grads


def gradients(state: ClassifierState, x: np.ndarray, y: np.ndarray) -> Gradients:
    """Analytic gradients of the mean cross-entropy over a batch."""
    return _loss_and_grads(state, np.asarray(x, dtype=np.float64), np.asarray(y))[1]


def batch_arrays(images: list[ImageTensor]) -> tuple[np.ndarray, np.ndarray]:
    x = np.stack([_flatten(img) for img in images])
    y = np.array([img.label for img in images], dtype=np.int64)
    return x, y


def train(
    dataset: LabeledDataset,
    schedule: SgdSchedule,
    augment_hook=None,
    seed: int = 0,
    hidden_dim: int = 256,
    test_dataset: LabeledDataset | None = None,
) -> tuple[ClassifierState, list[EpochLog]]:
    """Minibatch SGD with momentum over the cross-entropy loss.

    augment_hook, when given, is called per batch as
    hook(batch_dataset, stream_seed) and may return an expanded batch.
    Identical seeds give bitwise-identical final parameters.
    """
    if len(dataset) == 0:
        raise DomainError("cannot train on an empty dataset")
    input_dim = _flatten(dataset.images[0]).size
    state = init_state(input_dim, hidden_dim, dataset.class_count, seed)
    velocity = [np.zeros_like(p) for p in state.params()]
    log: list[EpochLog] = []

    for epoch in range(schedule.total_epochs):
        lr = schedule.lr_at(epoch)
        perm_rng = np.random.Generator(
            np.random.Philox(key=np.array([seed & (2**64 - 1), epoch], dtype=np.uint64))
        )
        order = perm_rng.permutation(len(dataset))
        batch_losses = []
        for b, start in enumerate(range(0, len(order), schedule.batch_size)):
            chunk = order[start : start + schedule.batch_size]
            batch_imgs = [dataset.images[i] for i in chunk]
            if augment_hook is not None:
                stream_seed = derive_seed(seed, epoch * len(order) + b)
                batch_imgs = augment_hook(
                    LabeledDataset(batch_imgs, dataset.class_count), stream_seed
                ).images
            x, y = batch_arrays(batch_imgs)
            loss, grads = _loss_and_grads(state, x, y)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}, batch {b}")
            batch_losses.append(loss)
            for i, (param, grad) in enumerate(
                zip(state.params(), (grads.w1, grads.b1, grads.w2, grads.b2))
            ):
                if schedule.weight_decay:
                    grad = grad + schedule.weight_decay * param
                velocity[i] = schedule.momentum * velocity[i] + grad
                param -= lr * velocity[i]
        train_acc = evaluate_accuracy(state, dataset)
        test_acc = evaluate_accuracy(state, test_dataset) if test_dataset is not None else None
        log.append(EpochLog(epoch, lr, float(np.mean(batch_losses)), train_acc, test_acc))
    return state, log


def evaluate_accuracy(state: ClassifierState, dataset: LabeledDataset) -> float:
    x, y = batch_arrays(dataset.images)
    preds = forward_batch(state, x).argmax(axis=1)
    return float((preds == y).mean())


def write_training_log(log: list[EpochLog], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "lr", "loss", "train_acc", "test_acc"])
        for entry in log:
            writer.writerow(
                [
                    entry.epoch,
                    f"{entry.lr:.10g}",
                    f"{entry.loss:.10g}",
                    f"{entry.train_acc:.6f}",
                    "" if entry.test_acc is None else f"{entry.test_acc:.6f}",
                ]
            )


def save_model(state: ClassifierState, path) -> None:
    """Sectioned binary format: magic, version byte, dims, seed, then the four
    parameter blocks as little-endian float64."""
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<BIIIQ", MODEL_VERSION, state.input_dim, state.hidden_dim,
                             state.class_count, state.rng_seed & (2**64 - 1)))
        for param in state.params():
            fh.write(np.ascontiguousarray(param, dtype="<f8").tobytes())


def load_model(path) -> ClassifierState:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != MODEL_MAGIC:
        raise FormatError(f"not a model file (magic {raw[:4]!r})")
    version, input_dim, hidden_dim, class_count, seed = struct.unpack_from("<BIIIQ", raw, 4)
    if version != MODEL_VERSION:
        raise FormatError(f"unsupported model version {version}")
    sizes = [
        (input_dim, hidden_dim),
        (hidden_dim,),
        (hidden_dim, class_count),
        (class_count,),
    ]
    expected = 4 + struct.calcsize("<BIIIQ") + sum(int(np.prod(s)) for s in sizes) * 8
    if len(raw) != expected:
        raise FormatError(f"model file is {len(raw)} bytes, expected {expected}")
    offset = 4 + struct.calcsize("<BIIIQ")
    params = []
    for shape in sizes:
        count = int(np.prod(shape))
        params.append(np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape).copy())
        offset += count * 8
    return ClassifierState(*params, rng_seed=seed)
