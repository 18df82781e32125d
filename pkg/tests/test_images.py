import numpy as np
import pytest

from l21snf.images import (
    ImageBatchMeta,
    load_meta,
    pack_images,
    read_pgm,
    save_meta,
    unpack_images,
    write_pgm,
)
from l21snf.linalg import make_rng


def write_batch(directory, count, h, w, maxval=255, seed=0):
    rng = make_rng(seed)
    directory.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        img = rng.integers(0, maxval + 1, size=(h, w))
        write_pgm(directory / f"img_{i:03d}.pgm", img, maxval)


class TestPgmIo:
    def test_binary_round_trip(self, tmp_path):
        rng = make_rng(1)
        img = rng.integers(0, 256, size=(5, 7))
        path = tmp_path / "a.pgm"
        write_pgm(path, img, 255)
        loaded, maxval = read_pgm(path)
        assert maxval == 255
        assert np.array_equal(loaded, img)

    def test_ascii_round_trip(self, tmp_path):
        rng = make_rng(2)
        img = rng.integers(0, 100, size=(4, 3))
        path = tmp_path / "a.pgm"
        write_pgm(path, img, 99, binary=False)
        loaded, maxval = read_pgm(path)
        assert maxval == 99
        assert np.array_equal(loaded, img)

    def test_sixteen_bit_round_trip(self, tmp_path):
        rng = make_rng(3)
        img = rng.integers(0, 65536, size=(6, 2))
        path = tmp_path / "wide.pgm"
        write_pgm(path, img, 65535)
        loaded, maxval = read_pgm(path)
        assert maxval == 65535
        assert np.array_equal(loaded, img)

    def test_header_comments_skipped(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P2\n# a comment\n2 2\n# another\n255\n0 64\n128 255\n")
        img, maxval = read_pgm(path)
        assert np.array_equal(img, [[0, 64], [128, 255]])

    def test_rejects_non_pgm(self, tmp_path):
        path = tmp_path / "x.pgm"
        path.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
        with pytest.raises(ValueError):
            read_pgm(path)

    def test_rejects_truncated_raster(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n2 2\n255\n\x00\x01")
        with pytest.raises(ValueError):
            read_pgm(path)

    def test_write_rejects_out_of_range(self, tmp_path):
        with pytest.raises(ValueError):
            write_pgm(tmp_path / "o.pgm", np.array([[300]]), 255)


class TestPackUnpack:
    def test_pack_shape_and_scaling(self, tmp_path):
        write_batch(tmp_path / "imgs", count=4, h=6, w=5)
        X, meta = pack_images(tmp_path / "imgs")
        assert X.shape == (30, 4)
        assert meta.width == 5 and meta.height == 6 and meta.count == 4
        assert X.min() >= 0.0 and X.max() <= 1.0
        assert meta.names == sorted(meta.names)

    def test_scaling_endpoints(self, tmp_path):
        d = tmp_path / "imgs"
        d.mkdir()
        write_pgm(d / "b.pgm", np.array([[0, 255], [255, 0]]), 255)
        X, meta = pack_images(d)
        assert set(np.unique(X)) == {0.0, 1.0}

    def test_round_trip_pixel_exact(self, tmp_path):
        write_batch(tmp_path / "in", count=3, h=8, w=4, seed=7)
        X, meta = pack_images(tmp_path / "in")
        unpack_images(X, meta, tmp_path / "out")
        for name in meta.names:
            a, _ = read_pgm(tmp_path / "in" / name)
            b, _ = read_pgm(tmp_path / "out" / name)
            assert np.array_equal(a, b)

    def test_sixteen_bit_round_trip(self, tmp_path):
        write_batch(tmp_path / "in", count=2, h=3, w=3, maxval=65535, seed=8)
        X, meta = pack_images(tmp_path / "in")
        unpack_images(X, meta, tmp_path / "out")
        for name in meta.names:
            a, _ = read_pgm(tmp_path / "in" / name)
            b, _ = read_pgm(tmp_path / "out" / name)
            assert np.array_equal(a, b)

    def test_all_zeros_matrix_gives_black_images(self, tmp_path):
        meta = ImageBatchMeta(width=3, height=2, count=2, maxval=255,
                              names=["a.pgm", "b.pgm"])
        unpack_images(np.zeros((6, 2)), meta, tmp_path)
        for name in meta.names:
            img, _ = read_pgm(tmp_path / name)
            assert np.all(img == 0)

    def test_out_of_range_values_clamped(self, tmp_path):
        meta = ImageBatchMeta(width=2, height=1, count=1, maxval=255,
                              names=["c.pgm"])
        M = np.array([[1.7], [-0.3]]).reshape(2, 1)
        unpack_images(M, meta, tmp_path)
        img, _ = read_pgm(tmp_path / "c.pgm")
        assert np.array_equal(img, [[255, 0]])

    def test_mixed_dimensions_rejected(self, tmp_path):
        d = tmp_path / "imgs"
        d.mkdir()
        write_pgm(d / "a.pgm", np.zeros((2, 2), dtype=int), 255)
        write_pgm(d / "b.pgm", np.zeros((3, 2), dtype=int), 255)
        with pytest.raises(ValueError, match="differs"):
            pack_images(d)

    def test_empty_directory_rejected(self, tmp_path):
        d = tmp_path / "imgs"
        d.mkdir()
        with pytest.raises(ValueError, match="no .pgm"):
            pack_images(d)

    def test_shape_mismatch_with_meta_rejected(self, tmp_path):
        meta = ImageBatchMeta(width=3, height=3, count=2, maxval=255,
                              names=["a.pgm", "b.pgm"])
        with pytest.raises(ValueError):
            unpack_images(np.zeros((8, 2)), meta, tmp_path)


class TestMetaFile:
    def test_round_trip(self, tmp_path):
        meta = ImageBatchMeta(width=89, height=108, count=2, maxval=255,
                              names=["x.pgm", "y.pgm"])
        path = tmp_path / "meta.txt"
        save_meta(meta, path)
        assert load_meta(path) == meta

    def test_format(self, tmp_path):
        meta = ImageBatchMeta(width=2, height=3, count=1, maxval=255,
                              names=["only.pgm"])
        path = tmp_path / "meta.txt"
        save_meta(meta, path)
        assert path.read_text() == (
            "width=2\nheight=3\ncount=1\nmaxval=255\nname=only.pgm\n"
        )

    def test_count_mismatch_rejected(self, tmp_path):
        path = tmp_path / "meta.txt"
        path.write_text("width=2\nheight=2\ncount=3\nmaxval=255\nname=a.pgm\n")
        with pytest.raises(ValueError):
            load_meta(path)

    def test_missing_key_rejected(self, tmp_path):
        path = tmp_path / "meta.txt"
        path.write_text("width=2\ncount=0\n")
        with pytest.raises(ValueError):
            load_meta(path)
