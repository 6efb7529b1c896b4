import numpy as np
import pytest

from freqaug.tensorio import ImageTensor, LabeledDataset


def rand_image(rng, channels=3, height=32, width=32, label=None):
    return ImageTensor(rng.random((channels, height, width)), label)


def class_dataset(rng, count, class_count, channels=3, side=8, noise=0.05):
    """Labeled images whose mean level and stripe pattern depend on the class,
    so a small model can actually separate them."""
    images = []
    for i in range(count):
        label = i % class_count
        level = 0.2 + 0.6 * label / max(class_count - 1, 1)
        data = np.full((channels, side, side), level)
        data[:, :: max(2, label + 2), :] += 0.1
        data = np.clip(data + rng.normal(0.0, noise, data.shape), 0.0, 1.0)
        images.append(ImageTensor(data, label))
    return LabeledDataset(images, class_count)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
