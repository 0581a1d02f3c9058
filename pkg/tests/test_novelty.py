import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from esqd.archive import BoundedBox, EliteArchive, Evaluation, GridSpec
from esqd.novelty import (
    EMPTY_STORE_NOVELTY,
    NoveltyArchive,
    NoveltyConfig,
    novelty_score,
    novelty_scores,
)


def brute_force_knn_mean(query, stored, k):
    dists = np.sort([np.linalg.norm(query - s) for s in stored])
    return float(np.mean(dists[: min(k, len(dists))]))


class TestConfig:
    def test_capacity_below_k_rejected(self):
        with pytest.raises(ValueError):
            NoveltyConfig(k_nearest=10, fifo_capacity=5)

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError):
            NoveltyConfig(backend="kd_tree")


class TestInsert:
    def test_fifo_evicts_oldest(self):
        archive = NoveltyArchive(capacity=3)
        archive.insert(np.array([[1.0], [2.0], [3.0], [4.0]]))
        assert np.array_equal(archive.snapshot(), np.array([[2.0], [3.0], [4.0]]))

    def test_below_capacity_keeps_order(self):
        archive = NoveltyArchive(capacity=10)
        rows = np.arange(6.0).reshape(3, 2)
        archive.insert(rows)
        assert np.array_equal(archive.snapshot(), rows)

    def test_unbounded_never_evicts(self):
        archive = NoveltyArchive(capacity=None)
        archive.insert(np.random.default_rng(0).normal(size=(10_000, 2)))
        assert len(archive) == 10_000

    def test_dimension_mismatch(self):
        archive = NoveltyArchive()
        archive.insert(np.zeros((1, 2)))
        with pytest.raises(ValueError):
            archive.insert(np.zeros((1, 3)))


class TestNoveltyScore:
    def test_mean_of_two_nearest(self):
        q = np.zeros(2)
        stored = np.array([[1.0, 0.0], [3.0, 0.0], [10.0, 0.0]])
        assert novelty_scores(q[None], stored, 2)[0] == pytest.approx(2.0)

    def test_single_stored_feature(self):
        stored = np.array([[3.0, 4.0]])
        assert novelty_scores(np.zeros((1, 2)), stored, 1)[0] == pytest.approx(5.0)

    def test_small_store_averages_over_all(self):
        stored = np.array([[1.0, 0.0], [2.0, 0.0]])
        assert novelty_scores(np.zeros((1, 2)), stored, 10)[0] == pytest.approx(1.5)

    def test_empty_store_sentinel(self):
        assert novelty_scores(np.zeros((1, 2)), np.empty((0, 0)), 3)[0] == EMPTY_STORE_NOVELTY

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(17)
        stored = rng.uniform(size=(200, 2))
        queries = rng.uniform(size=(20, 2))
        scores = novelty_scores(queries, stored, 10)
        for q, s in zip(queries, scores):
            assert s == pytest.approx(brute_force_knn_mean(q, stored, 10), rel=1e-12)

    def test_fifo_equals_all_until_capacity(self):
        rng = np.random.default_rng(3)
        cap = 50
        fifo = NoveltyArchive(capacity=cap)
        full = NoveltyArchive(capacity=None)
        for _ in range(5):
            rows = rng.normal(size=(10, 2))
            fifo.insert(rows)
            full.insert(rows)
            queries = rng.normal(size=(4, 2))
            assert np.array_equal(
                novelty_scores(queries, fifo.snapshot(), 5),
                novelty_scores(queries, full.snapshot(), 5),
            )
        assert fifo.total_inserted == cap

    @given(
        st.lists(
            st.tuples(
                st.floats(-100, 100, allow_nan=False),
                st.floats(-100, 100, allow_nan=False),
            ),
            min_size=1,
            max_size=30,
        ),
        st.tuples(
            st.floats(-100, 100, allow_nan=False),
            st.floats(-100, 100, allow_nan=False),
        ),
        st.tuples(st.integers(-50, 50), st.integers(-50, 50)),
    )
    def test_translation_invariance(self, stored, query, shift):
        stored = np.array(stored, dtype=float)
        query = np.array(query, dtype=float)[None, :]
        shift = np.array(shift, dtype=float)
        a = novelty_scores(query, stored, 3)
        b = novelty_scores(query + shift, stored + shift, 3)
        assert a == pytest.approx(b, rel=1e-9, abs=1e-9)

    def test_closer_insertion_never_increases_score(self):
        rng = np.random.default_rng(8)
        query = np.zeros(2)
        stored = rng.uniform(1.0, 2.0, size=(20, 2))
        k = 5
        before = novelty_scores(query[None], stored, k)[0]
        kth = np.sort(np.linalg.norm(stored, axis=1))[k - 1]
        closer = np.array([[kth / 4, 0.0]])
        after = novelty_scores(query[None], np.vstack([stored, closer]), k)[0]
        assert after <= before

    def test_elites_backend_reads_archive_features(self):
        spec = GridSpec(BoundedBox(np.zeros(2), np.ones(2)), np.array([10, 10]))
        archive = EliteArchive(spec)
        archive.try_add(np.zeros(1), Evaluation(1.0, np.array([0.1, 0.1])))
        archive.try_add(np.zeros(1), Evaluation(1.0, np.array([0.9, 0.9])))
        score = novelty_score(np.array([0.1, 0.1]), archive, 1)
        assert score == pytest.approx(0.0)
