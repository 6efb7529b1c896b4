import numpy as np
import pytest

from freqaug.errors import DomainError, FormatError, LabelError, ShapeError
from freqaug.tensorio import (
    ImageTensor,
    LabeledDataset,
    load_cifar_binary,
    load_npy_u8,
    quantize_u8,
    require_uniform_dims,
    write_cifar_binary,
    write_ppm,
)

from conftest import rand_image


def test_image_tensor_basic(rng):
    img = rand_image(rng, 3, 4, 5, label=2)
    assert img.shape == (3, 4, 5)
    assert img.height == 4 and img.width == 5 and img.channels == 3
    assert img.label == 2
    with pytest.raises(ValueError):
        img.data[0, 0, 0] = 0.0  # backing array is read-only


def test_image_tensor_rejects_bad_channels(rng):
    with pytest.raises(ShapeError):
        ImageTensor(rng.random((2, 4, 4)))
    with pytest.raises(ShapeError):
        ImageTensor(rng.random((4, 4)))


def test_image_tensor_rejects_negative_label(rng):
    with pytest.raises(LabelError):
        ImageTensor(rng.random((1, 4, 4)), -1)


def test_clamped(rng):
    img = ImageTensor(rng.random((1, 4, 4)) * 3.0 - 1.0, 0)
    out = img.clamped()
    assert out.data.min() >= 0.0 and out.data.max() <= 1.0
    assert out.label == 0


def test_labeled_dataset_class_index(rng):
    images = [rand_image(rng, 3, 4, 4, label=i % 3) for i in range(10)]
    ds = LabeledDataset(images, 3)
    # class_index inverts labels exactly
    for label, positions in enumerate(ds.class_index):
        for p in positions:
            assert ds.images[p].label == label
    assert sum(len(ix) for ix in ds.class_index) == len(ds)


def test_labeled_dataset_rejects_out_of_range_label(rng):
    with pytest.raises(LabelError):
        LabeledDataset([rand_image(rng, 3, 4, 4, label=5)], 3)


def test_labeled_dataset_rejects_missing_label(rng):
    with pytest.raises(LabelError):
        LabeledDataset([rand_image(rng, 3, 4, 4)], 3)


# CIFAR binary


def test_cifar_single_saturated_record(tmp_path):
    path = tmp_path / "one.bin"
    path.write_bytes(bytes([3]) + b"\xff" * 3072)
    ds = load_cifar_binary(path, class_count=10)
    assert len(ds) == 1
    img = ds.images[0]
    assert img.shape == (3, 32, 32)
    assert img.label == 3
    assert np.all(img.data == 1.0)


def test_cifar_empty_file(tmp_path):
    path = tmp_path / "empty.bin"
    path.write_bytes(b"")
    ds = load_cifar_binary(path, class_count=10)
    assert len(ds) == 0


def test_cifar_truncated_names_record(tmp_path):
    path = tmp_path / "trunc.bin"
    path.write_bytes(bytes(3074))
    with pytest.raises(FormatError, match="record 1"):
        load_cifar_binary(path, class_count=10)


def test_cifar_label_out_of_range(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(bytes([7]) + bytes(3072))
    with pytest.raises(LabelError, match="record 0"):
        load_cifar_binary(path, class_count=5)


def test_cifar_load_write_reproduces_bytes(tmp_path, rng):
    # random valid buffers round-trip exactly
    records = []
    for _ in range(5):
        records.append(bytes([int(rng.integers(0, 10))]) +
                       rng.integers(0, 256, 3072, dtype=np.uint8).tobytes())
    raw = b"".join(records)
    src = tmp_path / "src.bin"
    src.write_bytes(raw)
    ds = load_cifar_binary(src, class_count=10)
    assert np.all([img.data.min() >= 0 and img.data.max() <= 1 for img in ds.images])
    dst = tmp_path / "dst.bin"
    write_cifar_binary(ds, dst)
    assert dst.read_bytes() == raw


def test_cifar_write_round_trip(tmp_path, rng):
    images = [rand_image(rng, 3, 32, 32, label=i % 4) for i in range(5)]
    ds = LabeledDataset(images, 4)
    path = tmp_path / "ds.bin"
    write_cifar_binary(ds, path)
    loaded = load_cifar_binary(path, class_count=4)
    assert [img.label for img in loaded.images] == [img.label for img in images]
    for orig, back in zip(images, loaded.images):
        assert np.array_equal(quantize_u8(orig.data), quantize_u8(back.data))
    # second round trip is exact
    again = tmp_path / "ds2.bin"
    write_cifar_binary(loaded, again)
    assert again.read_bytes() == path.read_bytes()


def test_cifar_write_rejects_wrong_shape(tmp_path, rng):
    ds = LabeledDataset(
        [rand_image(rng, 3, 32, 32, label=0), rand_image(rng, 3, 16, 16, label=1)], 2
    )
    with pytest.raises(ShapeError, match="image 1"):
        write_cifar_binary(ds, tmp_path / "x.bin")


def test_cifar_write_empty(tmp_path):
    write_cifar_binary(LabeledDataset([], 10), tmp_path / "e.bin")
    assert (tmp_path / "e.bin").read_bytes() == b""


# NPY


def _npy_bytes(header: str, payload: bytes) -> bytes:
    encoded = header.encode("latin1")
    pad = 64 - (10 + len(encoded) + 1) % 64
    encoded += b" " * pad + b"\n"
    return b"\x93NUMPY" + bytes([1, 0]) + len(encoded).to_bytes(2, "little") + encoded + payload


def test_npy_zero_payload(tmp_path):
    path = tmp_path / "z.npy"
    path.write_bytes(
        _npy_bytes("{'descr': '|u1', 'fortran_order': False, 'shape': (2, 2, 2, 3), }", bytes(24))
    )
    images = load_npy_u8(path)
    assert len(images) == 2
    for img in images:
        assert img.shape == (3, 2, 2)
        assert np.all(img.data == 0.0)
        assert img.label is None


def test_npy_fortran_order_rejected(tmp_path):
    path = tmp_path / "f.npy"
    path.write_bytes(
        _npy_bytes("{'descr': '|u1', 'fortran_order': True, 'shape': (1, 2, 2, 3), }", bytes(12))
    )
    with pytest.raises(FormatError, match="fortran"):
        load_npy_u8(path)


def test_npy_byte_indexing_oracle(tmp_path):
    # payload bytes 0..255 repeating; pixel k of the (N,H,W,C) stream is (k % 256)/255
    payload = bytes(k % 256 for k in range(32 * 32 * 3))
    path = tmp_path / "p.npy"
    path.write_bytes(
        _npy_bytes("{'descr': '|u1', 'fortran_order': False, 'shape': (1, 32, 32, 3), }", payload)
    )
    img = load_npy_u8(path)[0]
    for k in (0, 1, 2, 3, 255, 256, 1000, 3071):
        h, rem = divmod(k, 32 * 3)
        w, c = divmod(rem, 3)
        assert img.data[c, h, w] == (k % 256) / 255


def test_npy_matches_numpy_save(tmp_path, rng):
    arr = rng.integers(0, 256, (3, 5, 7, 3), dtype=np.uint8)
    path = tmp_path / "n.npy"
    np.save(path, arr)
    images = load_npy_u8(path)
    assert len(images) == 3
    for i, img in enumerate(images):
        assert np.allclose(img.data, arr[i].transpose(2, 0, 1) / 255.0)


def test_npy_rejects_wrong_dtype(tmp_path):
    path = tmp_path / "d.npy"
    np.save(path, np.zeros((1, 2, 2, 3), dtype=np.float32))
    with pytest.raises(FormatError, match="dtype"):
        load_npy_u8(path)


def test_npy_rejects_wrong_rank(tmp_path):
    path = tmp_path / "r.npy"
    np.save(path, np.zeros((2, 2, 3), dtype=np.uint8))
    with pytest.raises(FormatError, match="4-D"):
        load_npy_u8(path)


def test_npy_rejects_bad_magic(tmp_path):
    path = tmp_path / "m.npy"
    path.write_bytes(b"NOTNPY00")
    with pytest.raises(FormatError, match="magic"):
        load_npy_u8(path)


# PPM


def test_ppm_single_pixel():
    img = ImageTensor(np.array([[[1.0]], [[0.0]], [[0.5]]]))
    out = write_ppm(img)
    assert out == b"P6\n1 1\n255\n" + bytes([255, 0, 128])


def test_ppm_zero_image():
    img = ImageTensor(np.zeros((3, 2, 2)))
    out = write_ppm(img)
    assert out.endswith(bytes(12))


def test_ppm_clamps_out_of_range():
    img = ImageTensor(np.full((3, 1, 1), 1.5))
    assert write_ppm(img)[-3:] == bytes([255, 255, 255])


def test_ppm_rejects_single_channel():
    with pytest.raises(FormatError):
        write_ppm(ImageTensor(np.zeros((1, 2, 2))))


def test_quantize_half_rounds_up():
    assert quantize_u8(np.array([0.5 / 255])) == np.array([1], dtype=np.uint8)
    assert quantize_u8(np.array([0.0])) == 0
    assert quantize_u8(np.array([1.0])) == 255


def test_require_uniform_dims(rng):
    with pytest.raises(DomainError):
        require_uniform_dims([])
    with pytest.raises(ShapeError, match="image 1"):
        require_uniform_dims([rand_image(rng, 3, 4, 4), rand_image(rng, 3, 4, 5)])
    assert require_uniform_dims([rand_image(rng, 1, 4, 6)]) == (1, 4, 6)
