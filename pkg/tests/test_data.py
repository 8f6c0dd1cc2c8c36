"""
Data layer: view files, manifests, normalization, missingness simulation,
shuffling, synthetic generation and chunk sources.
"""

import json
import os

import numpy as np
import pytest

from data import (
    BinaryFileSource,
    DatasetManifest,
    InMemorySource,
    load_dataset,
    load_labels,
    load_mask,
    load_view,
    make_synthetic,
    normalize_instances,
    open_mvc1,
    read_matrix,
    read_mvc1_header,
    save_dataset,
    shuffle_instances,
    simulate_missing,
    write_mvc1
)
from data.formats import write_csv_matrix
from data.preprocess import missing_count, normalize_dataset
from metrics import accuracy, nmi
from model import DatasetMeta, PresenceMask, SolverConfig
from solver import run
from helpers import synthetic_dataset


def _write(path, text):
    path.write_text(text)
    return str(path)


class TestViewFiles:

    def test_csv_view(self, tmp_path):
        x = load_view(_write(tmp_path / "v.csv", "1,2,3\n4,5,6\n"))
        assert x.tolist() == [[1, 2, 3], [4, 5, 6]]

    def test_csv_values_are_bit_exact(self, tmp_path, rng):
        x = rng.standard_normal((4, 50))
        x[0, :3] = [0.1 + 0.2, 1 / 3, 1e-300]
        path = str(tmp_path / "exact.csv")
        write_csv_matrix(path, x)
        np.testing.assert_array_equal(read_matrix(path), x)

    def test_masked_column_is_zeroed(self, tmp_path):
        x = load_view(_write(tmp_path / "v.csv", "1,2,3\n4,5,6\n"), mask_row=np.array([True, False, True]))
        assert x.tolist() == [[1, 0, 3], [4, 0, 6]]

    def test_shape_mismatch(self, tmp_path):
        with pytest.raises(ValueError):
            load_view(_write(tmp_path / "v.csv", "1,2\n3,4\n"), expected_dims=(None, 3))

    def test_non_numeric_token(self, tmp_path):
        with pytest.raises(ValueError):
            load_view(_write(tmp_path / "v.csv", "1,x\n3,4\n"))

    def test_nan_in_present_column(self, tmp_path):
        path = _write(tmp_path / "v.csv", "1,nan\n3,4\n")
        with pytest.raises(ValueError):
            load_view(path)
        assert load_view(path, mask_row=np.array([True, False])).tolist() == [[1, 0], [3, 0]]

    def test_mvc1_layout(self, tmp_path, rng):
        x = rng.standard_normal((3, 7))
        path = str(tmp_path / "v.mvc")
        write_mvc1(path, x)

        assert os.path.getsize(path) == 20 + 3 * 7 * 8
        assert read_mvc1_header(path) == (3, 7)
        np.testing.assert_array_equal(open_mvc1(path), x)
        np.testing.assert_array_equal(read_matrix(path), x)

    def test_mvc1_bad_magic(self, tmp_path):
        path = tmp_path / "v.mvc"
        path.write_bytes(b"NOPE" + bytes(16))
        with pytest.raises(ValueError):
            read_mvc1_header(str(path))

    def test_mvc1_truncated_body(self, tmp_path, rng):
        path = str(tmp_path / "v.mvc")
        write_mvc1(path, rng.standard_normal((2, 5)))
        with open(path, "r+b") as f:
            f.truncate(20 + 8 * 6)
        with pytest.raises(IOError):
            open_mvc1(path)

    def test_mask_file(self, tmp_path):
        mask = load_mask(_write(tmp_path / "m.csv", "1,0,1\n0,1,1\n"), 2, 3)
        assert mask.bits.tolist() == [[True, False, True], [False, True, True]]

    def test_mask_with_orphan_instance(self, tmp_path):
        with pytest.raises(ValueError):
            load_mask(_write(tmp_path / "m.csv", "1,0,1\n1,0,1\n"))

    def test_mask_with_bad_entries(self, tmp_path):
        with pytest.raises(ValueError):
            load_mask(_write(tmp_path / "m.csv", "1,2\n1,1\n"))

    def test_labels_must_be_integers(self, tmp_path):
        assert load_labels(_write(tmp_path / "l.txt", "0\n2\n1\n")).tolist() == [0, 2, 1]
        with pytest.raises(ValueError):
            load_labels(_write(tmp_path / "bad.txt", "0\n1.5\n"))


class TestManifest:

    def test_paths_are_relative_to_the_manifest(self, tmp_path):
        (tmp_path / "sub").mkdir()
        manifest_path = tmp_path / "sub" / "manifest.json"
        manifest_path.write_text(json.dumps({"views": ["a.csv"], "mask": None, "labels": "l.txt", "n_clusters": 2}))

        manifest = DatasetManifest.from_file(str(manifest_path))

        assert manifest.view_paths == [str(tmp_path / "sub" / "a.csv")]
        assert manifest.mask_path is None
        assert manifest.labels_path == str(tmp_path / "sub" / "l.txt")
        assert manifest.n_clusters == 2

    def test_manifest_without_views(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"views": []}))
        with pytest.raises(ValueError):
            DatasetManifest.from_file(str(path))

    @pytest.mark.parametrize("fmt", ["csv", "mvc1"])
    def test_saved_dataset_loads_back(self, tmp_path, fmt):
        dataset = synthetic_dataset(n_instances=40, rate=0.3, seed=2)
        manifest_path = save_dataset(dataset, str(tmp_path / fmt), fmt=fmt)

        loaded = load_dataset(manifest_path)

        assert loaded.n_clusters == 3
        assert loaded.mask.bits.tolist() == dataset.mask.bits.tolist()
        assert loaded.labels.tolist() == dataset.labels.tolist()
        for x, y in zip(loaded.views, dataset.views):
            np.testing.assert_array_equal(x, y)

    def test_clusters_from_labels_when_unspecified(self, tmp_path):
        dataset = synthetic_dataset(n_clusters=4, n_instances=40)
        manifest_path = save_dataset(dataset, str(tmp_path / "d"))
        with open(manifest_path) as f:
            raw = json.load(f)
        raw["n_clusters"] = None
        with open(manifest_path, "w") as f:
            json.dump(raw, f)
        assert load_dataset(manifest_path).n_clusters == 4

    def test_view_length_mismatch(self, tmp_path):
        with pytest.raises(ValueError):
            load_dataset(view_paths=[_write(tmp_path / "a.csv", "1,2,3\n"), _write(tmp_path / "b.csv", "1,2\n")],
                         n_clusters=2)

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            save_dataset(synthetic_dataset(n_instances=10), str(tmp_path), fmt="parquet")


class TestNormalization:

    def test_scales_to_unit_norm(self):
        np.testing.assert_allclose(normalize_instances(np.array([[3.0], [4.0]]), np.array([True])), [[0.6], [0.8]])

    def test_absent_column_stays_zero(self):
        out = normalize_instances(np.array([[3.0, 0.0], [4.0, 0.0]]), np.array([True, False]))
        assert out[:, 1].tolist() == [0.0, 0.0]

    def test_idempotent_on_unit_columns(self, rng):
        x = rng.standard_normal((5, 8))
        x /= np.linalg.norm(x, axis=0, keepdims=True)
        np.testing.assert_allclose(normalize_instances(x, np.ones(8, dtype=bool)), x, rtol=0, atol=1e-15)

    def test_zero_present_column(self):
        with pytest.raises(ValueError):
            normalize_instances(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([True, True]))

    def test_dataset_views_are_normalized(self):
        dataset = synthetic_dataset(n_instances=30, rate=0.3)
        dataset.views = [3.0 * x for x in dataset.views]
        out = normalize_dataset(dataset)
        for v, x in enumerate(out.views):
            norms = np.linalg.norm(x, axis=0)
            np.testing.assert_allclose(norms[dataset.mask.bits[v]], 1.0)
            assert not norms[~dataset.mask.bits[v]].any()


class TestSimulateMissing:

    def test_zero_rate_is_complete(self):
        mask = simulate_missing(DatasetMeta(3, 50, [2, 2, 2], 2), 0.0, 1)
        assert mask.bits.all()

    def test_exact_per_view_counts(self):
        mask = simulate_missing(DatasetMeta(2, 100, [2, 2], 2), 0.4, 7)
        assert mask.bits.sum(axis=1).tolist() == [60, 60]
        assert mask.bits.any(axis=0).all()

    @pytest.mark.parametrize("n_views,rate", [(2, 0.3), (3, 0.5), (4, 0.6), (5, 0.4)])
    def test_realized_ratio(self, n_views, rate):
        N = 200
        mask = simulate_missing(DatasetMeta(n_views, N, [1] * n_views, 2), rate, 3)
        expected = n_views * missing_count(rate, N) / (n_views * N)
        assert abs(mask.missing_ratio() - expected) <= N / (n_views * N)
        assert mask.bits.any(axis=0).all()

    def test_deterministic(self):
        meta = DatasetMeta(3, 80, [1, 1, 1], 2)
        assert np.array_equal(simulate_missing(meta, 0.5, 9).bits, simulate_missing(meta, 0.5, 9).bits)

    def test_infeasible_rate(self):
        with pytest.raises(ValueError):
            simulate_missing(DatasetMeta(2, 10, [1, 1], 2), 0.6, 0)

    @pytest.mark.parametrize("rate", [-0.1, 1.0])
    def test_rate_out_of_range(self, rate):
        with pytest.raises(ValueError):
            simulate_missing(DatasetMeta(2, 10, [1, 1], 2), rate, 0)

    def test_rounding_halves_up(self):
        assert missing_count(0.25, 10) == 3
        assert missing_count(0.24, 10) == 2


class TestShuffle:

    def test_inverse_restores_order(self):
        dataset = synthetic_dataset(n_instances=50, rate=0.3)
        shuffled, perm = shuffle_instances(dataset, 4)
        restored = shuffled.take(np.argsort(perm))
        assert restored.labels.tolist() == dataset.labels.tolist()
        assert restored.mask.bits.tolist() == dataset.mask.bits.tolist()
        for x, y in zip(restored.views, dataset.views):
            np.testing.assert_array_equal(x, y)

    def test_consistent_across_views_and_labels(self):
        dataset = synthetic_dataset(n_instances=50)
        shuffled, perm = shuffle_instances(dataset, 4)
        assert shuffled.labels.tolist() == dataset.labels[perm].tolist()
        np.testing.assert_array_equal(shuffled.views[1][:, 0], dataset.views[1][:, perm[0]])

    def test_metrics_unchanged(self, rng):
        pred, truth = rng.integers(0, 3, size=50), rng.integers(0, 3, size=50)
        perm = np.random.default_rng(4).permutation(50)
        assert nmi(pred[perm], truth[perm]) == pytest.approx(nmi(pred, truth), abs=1e-12)

    def test_single_instance(self):
        dataset = synthetic_dataset(n_clusters=1, n_instances=1)
        shuffled, perm = shuffle_instances(dataset, 0)
        assert perm.tolist() == [0]
        np.testing.assert_array_equal(shuffled.views[0], dataset.views[0])

    def test_deterministic(self):
        dataset = synthetic_dataset(n_instances=30)
        assert shuffle_instances(dataset, 8)[1].tolist() == shuffle_instances(dataset, 8)[1].tolist()


class TestMakeSynthetic:

    def test_no_noise_puts_instances_on_centers(self):
        views, labels = make_synthetic(3, 2, [4, 6], 30, separation=1.0, noise=0.0, rng_seed=1)
        for x in views:
            for k in range(3):
                members = x[:, labels == k]
                np.testing.assert_allclose(members, members[:, :1].repeat(members.shape[1], axis=1), atol=1e-15)
        assert accuracy(labels, labels) == 1.0

    def test_single_cluster(self):
        _, labels = make_synthetic(1, 1, [3], 10, 1.0, 0.1, 0)
        assert labels.tolist() == [0] * 10

    def test_balanced_unit_norm_and_deterministic(self):
        views, labels = make_synthetic(4, 2, [5, 3], 100, 1.0, 0.2, 7)
        again, _ = make_synthetic(4, 2, [5, 3], 100, 1.0, 0.2, 7)
        assert np.bincount(labels).tolist() == [25] * 4
        for x, y in zip(views, again):
            np.testing.assert_allclose(np.linalg.norm(x, axis=0), 1.0)
            np.testing.assert_array_equal(x, y)

    def test_well_separated_data_is_recoverable(self):
        views, labels = make_synthetic(3, 2, [20, 20], 300, separation=1.0, noise=0.05, rng_seed=3)
        mask = PresenceMask.full(2, 300)
        perm = np.random.default_rng(0).permutation(300)
        source = InMemorySource([x[:, perm] for x in views], mask, 3)
        best = max(
            nmi(run(source, SolverConfig(chunk_size=300, rng_seed=seed)).assignments, labels[perm])
            for seed in range(10)
        )
        assert best >= 0.99

    @pytest.mark.parametrize("kwargs", [
        dict(n_clusters=0), dict(separation=0.0), dict(noise=-1.0), dict(dims=[3]), dict(n_instances=2),
    ])
    def test_invalid_arguments(self, kwargs):
        args = dict(n_clusters=3, n_views=2, dims=[3, 3], n_instances=30, separation=1.0, noise=0.1, rng_seed=0)
        args.update(kwargs)
        with pytest.raises(ValueError):
            make_synthetic(**args)


class TestChunkSources:

    def test_in_memory_chunks_reassemble_the_dataset(self):
        dataset = normalize_dataset(synthetic_dataset(n_instances=53, rate=0.3))
        source = InMemorySource(dataset.views, dataset.mask, 3)

        chunks = list(source.iter_chunks(10))

        assert [c.chunk_index for c in chunks] == list(range(6))
        assert [c.size for c in chunks] == [10] * 5 + [3]
        for v, x in enumerate(dataset.views):
            np.testing.assert_array_equal(np.hstack([c.data[v] for c in chunks]), x)
        assert np.hstack([c.mask_slice for c in chunks]).tolist() == dataset.mask.bits.tolist()

    def test_sources_replay_from_the_start(self):
        dataset = synthetic_dataset(n_instances=20)
        source = InMemorySource(dataset.views, dataset.mask, 3)
        assert [c.start for c in source.iter_chunks(7)] == [c.start for c in source.iter_chunks(7)] == [0, 7, 14]

    def test_invalid_chunk_size(self):
        dataset = synthetic_dataset(n_instances=20)
        with pytest.raises(ValueError):
            next(InMemorySource(dataset.views, dataset.mask, 3).iter_chunks(0))

    def test_binary_source_matches_in_memory(self, tmp_path):
        dataset = synthetic_dataset(n_instances=45, rate=0.3, seed=6)
        raw = [3.0 * x for x in dataset.views]
        paths = []
        for v, x in enumerate(raw):
            paths.append(str(tmp_path / f"view_{v}.mvc"))
            write_mvc1(paths[-1], x)

        disk = BinaryFileSource(paths, dataset.mask, 3)
        memory = InMemorySource(dataset.views, dataset.mask, 3)

        assert disk.meta.dims == memory.meta.dims == [20, 20]
        for a, b in zip(disk.iter_chunks(8), memory.iter_chunks(8)):
            assert a.start == b.start and a.size == b.size
            for x, y in zip(a.data, b.data):
                np.testing.assert_allclose(x, y, atol=1e-12)

        cfg = SolverConfig(chunk_size=8, n_passes=2)
        assert run(disk, cfg).assignments.labels.tolist() == run(memory, cfg).assignments.labels.tolist()

    def test_binary_source_shorter_than_mask(self, tmp_path, caplog):
        dataset = synthetic_dataset(n_instances=30)
        paths = []
        for v, x in enumerate(dataset.views):
            paths.append(str(tmp_path / f"view_{v}.mvc"))
            write_mvc1(paths[-1], x[:, :25])

        source = BinaryFileSource(paths, dataset.mask, 3)
        with caplog.at_level("WARNING"):
            assert sum(c.size for c in source.iter_chunks(10)) == 25
        assert "mask declares 30" in caplog.text
        with pytest.raises(IOError):
            run(source, SolverConfig(chunk_size=10))

    @pytest.mark.parametrize("normalize", [True, False])
    def test_binary_source_rejects_nan_in_present_instance(self, tmp_path, normalize):
        dataset = synthetic_dataset(n_instances=30)
        bits = dataset.mask.bits.copy()
        bits[0, 13] = True
        mask = PresenceMask(bits)
        x = dataset.views[0].copy()
        x[2, 13] = np.nan
        paths = [str(tmp_path / "view_0.mvc"), str(tmp_path / "view_1.mvc")]
        write_mvc1(paths[0], x)
        write_mvc1(paths[1], dataset.views[1])

        source = BinaryFileSource(paths, mask, 3, normalize=normalize)
        with pytest.raises(ValueError, match=r"view_0\.mvc: NaN in present instance 13"):
            list(source.iter_chunks(10))

    def test_binary_source_ignores_nan_in_absent_instance(self, tmp_path):
        dataset = synthetic_dataset(n_instances=30, rate=0.3, seed=4)
        absent = int(np.flatnonzero(~dataset.mask.bits[0])[0])
        x = dataset.views[0].copy()
        x[:, absent] = np.nan
        paths = [str(tmp_path / "view_0.mvc"), str(tmp_path / "view_1.mvc")]
        write_mvc1(paths[0], x)
        write_mvc1(paths[1], dataset.views[1])

        chunks = list(BinaryFileSource(paths, dataset.mask, 3).iter_chunks(10))
        assert not any(np.isnan(c.data[0]).any() for c in chunks)

    def test_binary_source_view_count(self, tmp_path):
        dataset = synthetic_dataset(n_instances=10)
        path = str(tmp_path / "view_0.mvc")
        write_mvc1(path, dataset.views[0])
        with pytest.raises(ValueError):
            BinaryFileSource([path], dataset.mask, 3)
