"""
Streaming solver: the per-chunk inner loop and full multi-pass runs.
"""

import time

import numpy as np
import pytest

from metrics import accuracy, nmi
from model import DatasetMeta, FactorSet, GlobalStats, SolverConfig, stats_apply_chunk, stats_init
from model.types import MultiViewChunk
from solver import imc_fit, process_chunk, run
from oracles import lloyd_trajectory
from helpers import random_chunk, stream_of, synthetic_dataset


def _stats_with_prior(rng, dims, K, n_prior, chunk_size):
    stats = stats_init(DatasetMeta(len(dims), 10_000, list(dims), K))
    for t in range(n_prior):
        prior = random_chunk(rng, dims, chunk_size, missing=0.3, chunk_index=t, start=t * chunk_size)
        stats_apply_chunk(stats, prior, rng.integers(0, K, size=chunk_size))
    return stats


class TestProcessChunk:

    def test_points_on_known_centers_converge_immediately(self):
        centers = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        labels = np.array([0, 1, 2, 2, 1, 0])
        prior = MultiViewChunk(0, 0, [centers[:, labels]], np.ones((1, 6), dtype=bool))
        stats = stats_apply_chunk(stats_init(DatasetMeta(1, 12, [3], 3)), prior, labels)

        order = np.array([2, 0, 1, 1, 0, 2])
        chunk = MultiViewChunk(1, 6, [centers[:, order]], np.ones((1, 6), dtype=bool))
        result = process_chunk(stats, FactorSet([centers.copy()]), chunk, SolverConfig(alpha=0.0))

        assert result.inner_iters <= 2
        assert result.labels.tolist() == order.tolist()
        np.testing.assert_allclose(result.factors.centers[0], centers, atol=1e-12)

    def test_does_not_mutate_statistics(self, rng):
        stats = _stats_with_prior(rng, [4, 3], 3, 2, 10)
        snapshot = stats.copy()
        chunk = random_chunk(rng, [4, 3], 10, missing=0.3, chunk_index=2, start=20)
        factors = FactorSet([rng.random((4, 3)), rng.random((3, 3))])

        process_chunk(stats, factors, chunk, SolverConfig())

        for r, r0 in zip(stats.R, snapshot.R):
            np.testing.assert_array_equal(r, r0)
        assert stats.chunk_labels.keys() == snapshot.chunk_labels.keys()

    def test_relabeling_clusters_relabels_the_result(self, rng):
        dims, K = [4, 3], 4
        for _ in range(10):
            stats = _stats_with_prior(rng, dims, K, 3, 20)
            factors = FactorSet([rng.standard_normal((d, K)) for d in dims])
            chunk = random_chunk(rng, dims, 30, missing=0.3, chunk_index=3, start=60)
            start = rng.integers(0, K, size=30)
            order = rng.permutation(K)
            relabel = np.argsort(order)
            relabeled_stats = GlobalStats(
                R=[r[:, order] for r in stats.R],
                T=[t[order] for t in stats.T],
                chunk_labels={i: relabel[labels] for i, labels in stats.chunk_labels.items()},
            )

            base = process_chunk(stats, factors, chunk, SolverConfig(), initial_labels=start)
            moved = process_chunk(relabeled_stats, factors.permuted(order), chunk, SolverConfig(),
                                  initial_labels=relabel[start])

            assert moved.labels.tolist() == relabel[base.labels].tolist()
            for u, w in zip(moved.factors.centers, base.factors.permuted(order).centers):
                np.testing.assert_allclose(u, w, rtol=0, atol=1e-12)

    def test_inner_iterations_are_capped(self, rng):
        cfg = SolverConfig(max_inner_iters=3)
        for _ in range(20):
            chunk = random_chunk(rng, [5], 40)
            result = process_chunk(stats_init(DatasetMeta(1, 40, [5], 6)), None, chunk, cfg)
            assert 1 <= result.inner_iters <= 3

    def test_initial_labels_override(self, rng):
        chunk = random_chunk(rng, [3], 8)
        seen = []
        process_chunk(stats_init(DatasetMeta(1, 8, [3], 2)), None, chunk, SolverConfig(),
                      initial_labels=np.array([0, 1] * 4), on_iteration=seen.append)
        assert seen[0].labels.tolist() == [0, 1] * 4


class TestLloydReduction:
    """One complete view, alpha = 0 and the whole dataset as one chunk is Lloyd's k-means."""

    def test_trajectory_matches_textbook_lloyd(self):
        rng = np.random.default_rng(2024)
        for _ in range(20):
            n = int(rng.integers(20, 200))
            d = int(rng.integers(1, 21))
            K = int(rng.integers(1, 9))
            x = rng.standard_normal((d, n))
            x /= np.linalg.norm(x, axis=0, keepdims=True)
            start = rng.integers(0, K, size=n)
            chunk = MultiViewChunk(0, 0, [x], np.ones((1, n), dtype=bool))

            records = []
            process_chunk(stats_init(DatasetMeta(1, n, [d], K)), None, chunk,
                          SolverConfig(alpha=0.0, max_inner_iters=50),
                          initial_labels=start, on_iteration=records.append)
            expected = lloyd_trajectory(x, start, K, max_iters=50)

            assert len(records) == len(expected)
            for record, (centers, next_labels) in zip(records, expected):
                np.testing.assert_allclose(record.factors.centers[0], centers, rtol=0, atol=1e-10)
                assert record.next_labels.tolist() == next_labels.tolist()


class TestMonotonicity:
    """The chunk objective never increases inside the inner loop, except across a repair."""

    def test_randomized_chunks(self):
        rng = np.random.default_rng(7)
        checked = 0
        for trial in range(1000):
            n_views = int(rng.integers(1, 4))
            dims = [int(d) for d in rng.integers(1, 8, size=n_views)]
            K = int(rng.integers(1, 6))
            s = int(rng.integers(1, 30))
            cfg = SolverConfig(
                alpha=float(rng.choice([0.0, 1e-3, 0.1, 1.0, 10.0])),
                rng_seed=trial,
                fill_degenerate=bool(rng.integers(0, 2)),
            )

            first = trial % 4 == 0
            if first:
                stats = stats_init(DatasetMeta(n_views, 10_000, dims, K))
                factors = None
            else:
                stats = _stats_with_prior(rng, dims, K, int(rng.integers(0, 4)), int(rng.integers(1, 20)))
                factors = FactorSet([rng.standard_normal((d, K)) for d in dims])
            chunk = random_chunk(rng, dims, s, missing=float(rng.choice([0.0, 0.3, 0.5])),
                                 chunk_index=99, start=0)

            records = []
            process_chunk(stats, factors, chunk, cfg, on_iteration=records.append)

            previous = None
            for record in records:
                slack = 1e-9 * max(1.0, abs(record.objective_after_repair))
                assert record.objective_after_assign <= record.objective_after_repair + slack
                if not record.repaired:
                    assert record.objective_after_repair == record.objective_after_update
                if previous is not None:
                    slack = 1e-9 * max(1.0, abs(previous.objective_after_assign))
                    assert record.objective_after_update <= previous.objective_after_assign + slack
                previous = record
                checked += 1
        assert checked >= 1000


class _TruncatedSource:
    """Declares the full dataset but drops the last chunk."""

    def __init__(self, inner):
        self.inner = inner

    @property
    def meta(self):
        return self.inner.meta

    def iter_chunks(self, chunk_size):
        chunks = list(self.inner.iter_chunks(chunk_size))
        yield from chunks[:-1]


class _ShiftedSource(_TruncatedSource):
    def iter_chunks(self, chunk_size):
        for chunk in self.inner.iter_chunks(chunk_size):
            chunk.start += 1
            yield chunk


class TestRun:

    @pytest.fixture
    def source(self):
        source, _ = stream_of(synthetic_dataset(n_instances=90, rate=0.3, seed=1), shuffle_seed=1)
        return source

    def test_trace_and_callbacks(self, source):
        cfg = SolverConfig(chunk_size=20, n_passes=2)
        seen_labels, passes = [], []

        result = run(source, cfg,
                     on_chunk=lambda step, labels: seen_labels.append(labels.copy()),
                     on_pass=lambda p, a, f, r: passes.append((p, a, r)))

        assert len(result.trace) == 2 * 5
        assert [s.pass_index for s in result.trace] == [1] * 5 + [2] * 5
        assert [s.chunk_index for s in result.trace[:5]] == [0, 1, 2, 3, 4]
        assert [s.report.scanned for s in result.trace] == [20, 40, 60, 80, 90] + [90] * 5
        assert all(1 <= s.inner_iters <= cfg.max_inner_iters for s in result.trace)

        assert (seen_labels[0][20:] == -1).all()
        assert (seen_labels[0][:20] >= 0).all()
        assert [p for p, _, _ in passes] == [1, 2]
        assert np.array_equal(passes[-1][1].labels, result.assignments.labels)
        assert passes[-1][2] is result.trace[-1].report

    def test_deterministic(self, source):
        cfg = SolverConfig(chunk_size=15, n_passes=3, rng_seed=5)
        a, b = run(source, cfg), run(source, cfg)
        assert np.array_equal(a.assignments.labels, b.assignments.labels)
        assert all(np.array_equal(u, w) for u, w in zip(a.factors.centers, b.factors.centers))
        assert [s.report.average_loss for s in a.trace] == [s.report.average_loss for s in b.trace]

    def test_chunk_size_one(self, source):
        result = run(source, SolverConfig(chunk_size=1))
        assert len(result.trace) == source.meta.n_instances
        assert result.factors.is_finite()

    def test_chunk_larger_than_dataset(self, source):
        result = run(source, SolverConfig(chunk_size=1000))
        assert len(result.trace) == 1

    def test_truncated_stream(self, source):
        with pytest.raises(IOError):
            run(_TruncatedSource(source), SolverConfig(chunk_size=20))

    def test_out_of_order_chunk(self, source):
        with pytest.raises(IOError):
            run(_ShiftedSource(source), SolverConfig(chunk_size=20))

    def test_invalid_config(self, source):
        with pytest.raises(ValueError):
            run(source, SolverConfig(alpha=-1.0))
        with pytest.raises(ValueError):
            run(source, SolverConfig(n_passes=0))

    def test_statistics_are_full_dataset_after_each_pass(self, source):
        reports = []
        run(source, SolverConfig(chunk_size=20, n_passes=3), on_pass=lambda p, a, f, r: reports.append(r))
        present_pairs = int(source.mask.bits.sum())
        assert len(reports) == 3
        for report in reports:
            assert report.scanned == source.meta.n_instances
            assert report.objective - report.average_loss * report.scanned == pytest.approx(present_pairs)


@pytest.fixture(scope="module")
def recovery_dataset():
    """3 clusters, 2 views, separation / noise = 10, 30% missing, class-sorted."""
    return synthetic_dataset(n_clusters=3, dims=(20, 20), n_instances=3000, noise=0.1, rate=0.3, seed=11)


class TestRecovery:
    """Chunks of 50, 2 passes, shuffled with the run seed."""

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    def test_two_passes_recover_clusters(self, recovery_dataset, seed):
        source, truth = stream_of(recovery_dataset, shuffle_seed=seed)
        cfg = SolverConfig(alpha=0.1, chunk_size=50, n_passes=2, rng_seed=seed)

        offline = imc_fit(source.views, source.mask, 3, cfg)
        assert nmi(offline.assignments, truth) >= 0.95

        result = run(source, cfg)
        assert nmi(result.assignments, truth) >= 0.95
        assert accuracy(result.assignments, truth) >= 0.95

    def test_average_loss_settles_over_passes(self, recovery_dataset):
        for seed in range(5):
            source, _ = stream_of(recovery_dataset, shuffle_seed=seed)
            result = run(source, SolverConfig(alpha=0.1, chunk_size=50, n_passes=20, rng_seed=seed))

            per_pass = [s.report.average_loss for s in result.trace if s.chunk_index == result.trace[-1].chunk_index]
            assert len(per_pass) == 20
            assert per_pass[19] <= per_pass[1] + 1e-9 * abs(per_pass[1])
            tail = per_pass[15:]
            assert (max(tail) - min(tail)) <= 0.01 * abs(np.mean(tail))

            # After the first pass the full objective can only go down, chunk by chunk.
            later = [s.report.objective for s in result.trace if s.pass_index >= 2]
            for before, after in zip(later, later[1:]):
                assert after <= before + 1e-9 * abs(before)


class TestDegenerateFilling:

    def test_unfilled_empty_clusters_collapse_to_origin(self):
        dataset = synthetic_dataset(n_clusters=3, dims=(10, 10), n_instances=120, noise=0.05, seed=2)
        source, _ = stream_of(dataset)
        off = run(source, SolverConfig(alpha=0.0, chunk_size=2, fill_degenerate=False, rng_seed=0))
        on = run(source, SolverConfig(alpha=0.0, chunk_size=2, fill_degenerate=True, rng_seed=0))

        assert off.factors.is_finite() and on.factors.is_finite()
        # Two instances cannot populate three clusters, so the first chunk always leaves one empty.
        first_off = process_chunk(stats_init(source.meta), None, next(source.iter_chunks(2)),
                                  SolverConfig(alpha=0.0, fill_degenerate=False))
        first_on = process_chunk(stats_init(source.meta), None, next(source.iter_chunks(2)),
                                 SolverConfig(alpha=0.0, fill_degenerate=True))
        empty_off = [k for k in range(3) if not first_off.factors.centers[0][:, k].any()]
        assert empty_off
        for k in empty_off:
            assert first_on.factors.centers[0][:, k].any()

    def test_class_sorted_stream_with_and_without_filling(self):
        dataset = synthetic_dataset(n_clusters=3, dims=(10, 10), n_instances=300, noise=0.1, seed=5)
        source, truth = stream_of(dataset)
        scores = {}
        for fill in (True, False):
            scores[fill] = []
            for seed in range(5):
                result = run(source, SolverConfig(chunk_size=10, fill_degenerate=fill, rng_seed=seed))
                assert result.factors.is_finite()
                scores[fill].append(nmi(result.assignments, truth))
        assert np.median(scores[True]) >= np.median(scores[False])


@pytest.mark.slow
class TestStreamingScale:
    """N = 100,000 vs 200,000 instances, 3 views of 50 features, K = 10, chunks of 2,000."""

    def test_runtime_grows_linearly(self):
        durations = []
        for n in (100_000, 200_000):
            source, _ = stream_of(synthetic_dataset(n_clusters=10, dims=(50, 50, 50), n_instances=n, rate=0.4))
            started = time.perf_counter()
            result = run(source, SolverConfig(chunk_size=2000))
            durations.append(time.perf_counter() - started)
            assert result.assignments.labels.size == n
        assert durations[1] <= 2.5 * durations[0]
