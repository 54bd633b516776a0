import numpy as np
import pytest

from hnswlive import (FormatError, IndexParams, audit_structure, insert,
                      knn_search, load_fvecs, load_index, load_ivecs,
                      mark_delete, save_fvecs, save_index, save_ivecs,
                      synthetic_vectors)

from conftest import build_index


class TestFvecs:
    def test_worked_byte_example(self, tmp_path):
        # dim=2, then 1.0f and 2.0f, all little-endian
        raw = bytes([0x02, 0, 0, 0,
                     0, 0, 0x80, 0x3F,
                     0, 0, 0, 0x40])
        p = tmp_path / "one.fvecs"
        p.write_bytes(raw)
        arr = load_fvecs(p)
        assert arr.shape == (1, 2)
        assert arr.tolist() == [[1.0, 2.0]]

    def test_round_trip_bit_exact(self, tmp_path):
        data = synthetic_vectors(100, 24, seed=9)
        p = tmp_path / "v.fvecs"
        save_fvecs(p, data)
        back = load_fvecs(p)
        assert back.dtype == np.float32
        assert np.array_equal(back.view(np.int32), data.view(np.int32))
        save_fvecs(tmp_path / "v2.fvecs", back)
        assert (tmp_path / "v2.fvecs").read_bytes() == p.read_bytes()

    def test_sift_style_dimension(self, tmp_path):
        data = synthetic_vectors(10, 128, seed=1)
        p = tmp_path / "sift.fvecs"
        save_fvecs(p, data)
        raw = p.read_bytes()
        assert int.from_bytes(raw[:4], "little") == 128
        assert load_fvecs(p).shape == (10, 128)

    def test_truncated_record(self, tmp_path):
        data = synthetic_vectors(3, 4, seed=2)
        p = tmp_path / "cut.fvecs"
        save_fvecs(p, data)
        whole = p.read_bytes()
        p.write_bytes(whole[:-6])
        with pytest.raises(FormatError) as exc:
            load_fvecs(p)
        assert exc.value.offset == 2 * 20  # two intact 20-byte records

    def test_inconsistent_dimension(self, tmp_path):
        rec1 = bytes([2, 0, 0, 0]) + np.zeros(2, "<f4").tobytes()
        rec2 = bytes([5, 0, 0, 0]) + np.zeros(2, "<f4").tobytes()
        p = tmp_path / "mixed.fvecs"
        p.write_bytes(rec1 + rec2)
        with pytest.raises(FormatError) as exc:
            load_fvecs(p)
        assert exc.value.offset == len(rec1)


class TestIvecs:
    def test_worked_byte_example(self, tmp_path):
        raw = bytes([0x01, 0, 0, 0, 0x05, 0, 0, 0])
        p = tmp_path / "gt.ivecs"
        p.write_bytes(raw)
        assert load_ivecs(p).tolist() == [[5]]

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        data = rng.integers(-1000, 1000, size=(50, 7)).astype(np.int32)
        p = tmp_path / "r.ivecs"
        save_ivecs(p, data)
        assert np.array_equal(load_ivecs(p), data)

    def test_row_width_is_uniform(self, tmp_path):
        data = np.arange(12, dtype=np.int32).reshape(4, 3)
        p = tmp_path / "w.ivecs"
        save_ivecs(p, data)
        assert load_ivecs(p).shape == (4, 3)


class TestSnapshot:
    def test_round_trip_preserves_everything(self, tmp_path, gaussian_1k):
        g = build_index(gaussian_1k[:200])
        mark_delete(g, 17)
        mark_delete(g, 3)
        p = tmp_path / "index.bin"
        save_index(g, p)
        h = load_index(p)
        assert h.size == g.size
        assert h.entry_point == g.entry_point
        assert h.max_layer == g.max_layer
        assert list(h.deleted_list) == list(g.deleted_list)
        assert h.label_index == g.label_index
        assert np.array_equal(h.vectors[:200], g.vectors[:200])
        assert np.array_equal(h.levels[:200], g.levels[:200])
        assert np.array_equal(h.deleted[:200], g.deleted[:200])
        for layer in range(g.n_layers):
            assert np.array_equal(h._adj[layer], g._adj[layer])
            assert np.array_equal(h._adj_cnt[layer], g._adj_cnt[layer])
        assert audit_structure(h).ok

    def test_save_load_save_is_bit_identical(self, tmp_path, gaussian_1k):
        g = build_index(gaussian_1k[:120])
        p1 = tmp_path / "a.bin"
        p2 = tmp_path / "b.bin"
        save_index(g, p1)
        save_index(load_index(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_rng_state_survives(self, tmp_path, gaussian_1k):
        g = build_index(gaussian_1k[:50])
        p = tmp_path / "c.bin"
        save_index(g, p)
        h = load_index(p)
        assert [g.draw_level() for _ in range(20)] == \
               [h.draw_level() for _ in range(20)]

    def test_queries_agree_after_reload(self, tmp_path, gaussian_1k):
        g = build_index(gaussian_1k[:150])
        p = tmp_path / "d.bin"
        save_index(g, p)
        h = load_index(p)
        q = gaussian_1k[500]
        assert knn_search(g, q, 10, 50).entries == knn_search(h, q, 10, 50).entries

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "junk.bin"
        p.write_bytes(b"NOPE" + bytes(64))
        with pytest.raises(FormatError):
            load_index(p)

    def test_truncated_snapshot(self, tmp_path, gaussian_1k):
        g = build_index(gaussian_1k[:30])
        p = tmp_path / "cut.bin"
        save_index(g, p)
        whole = p.read_bytes()
        p.write_bytes(whole[:len(whole) // 2])
        with pytest.raises(FormatError):
            load_index(p)


class TestSynthetic:
    def test_deterministic(self):
        a = synthetic_vectors(10, 4, seed=5)
        b = synthetic_vectors(10, 4, seed=5)
        assert np.array_equal(a, b)
        assert a.dtype == np.float32

    def test_kinds(self):
        u = synthetic_vectors(100, 3, seed=1, kind="uniform")
        assert (u >= 0).all() and (u < 1).all()
        with pytest.raises(Exception):
            synthetic_vectors(5, 2, kind="cauchy")
