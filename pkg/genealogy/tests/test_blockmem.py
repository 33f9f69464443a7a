"""
Tests for the block memory: learning, collision policies, voting,
collision-rate bookkeeping and dense/sparse storage equivalence.
"""

import numpy as np
from django.test import SimpleTestCase

from vacoal.blockmem import (
    COLLISION,
    EMPTY,
    BlockMemory,
    LabelTable,
    expected_collision_rate,
    majority_vote,
    majority_vote_rows,
)
from vacoal.exceptions import DimensionError, FrozenMemoryError
from vacoal.hypervector import Hypervector, generate_token


def keys(count, length=1600, seed=0):
    return [generate_token(f"k{i}", length, seed) for i in range(count)]


class LabelTableTestCase(SimpleTestCase):

    def test_tids_are_dense_and_stable(self):
        """Test that labels get dense ids in first-seen order."""
        table = LabelTable(["a", "b"])
        self.assertEqual(table.assign("a"), 0)
        self.assertEqual(table.assign("c"), 2)
        self.assertEqual(table.label(1), "b")
        self.assertIsNone(table.tid("zzz"))


class MajorityVoteTestCase(SimpleTestCase):

    def test_negative_cells_are_dont_care(self):
        """Test that empty and collided cells cast no vote."""
        result = majority_vote([4, 4, 4, COLLISION, EMPTY, 7])
        self.assertEqual(result.winner_tid, 4)
        self.assertEqual(result.winner_votes, 3)
        self.assertEqual(result.dont_care_blocks, 2)
        self.assertEqual(result.losing_votes, 1)
        self.assertAlmostEqual(result.cr1, 0.5)
        self.assertFalse(result.fires)

    def test_ties_go_to_the_lowest_tid(self):
        """Test that equal vote counts resolve to the smaller label id."""
        result = majority_vote([3, 3, 1, 1, -1])
        self.assertEqual(result.winner_tid, 1)
        self.assertAlmostEqual(result.cr1, 0.4)

    def test_all_dont_care_has_no_winner(self):
        result = majority_vote([COLLISION] * 8)
        self.assertIsNone(result.winner_tid)
        self.assertEqual(result.cr1, 0.0)
        self.assertEqual(result.dont_care_blocks, 8)

    def test_majority_survives_heavy_random_corruption(self):
        """Test that the true label wins with 60 of 128 cells corrupted at random."""
        rng = np.random.default_rng(2024)
        trials, blocks, corrupted, truth = 10000, 128, 60, 4321
        votes = np.full((trials, blocks), truth, dtype=np.int64)
        for row in votes:
            positions = rng.choice(blocks, size=corrupted, replace=False)
            row[positions] = rng.integers(0, 10000, size=corrupted)
        correct = sum(1 for row in votes if majority_vote(row).winner_tid == truth)
        self.assertGreaterEqual(correct, 9999)


class ExpectedCollisionRateTestCase(SimpleTestCase):

    def test_first_write_never_collides(self):
        self.assertEqual(expected_collision_rate(1, 10), 0.0)
        self.assertEqual(expected_collision_rate(0, 10), 0.0)

    def test_light_load_matches_the_birthday_approximation(self):
        """Test the expected collision rate at light load."""
        k, m = 1000, 24
        approx = (k - 1) / (2 * 2 ** m)
        self.assertAlmostEqual(expected_collision_rate(k, m) / approx, 1.0, places=2)

    def test_rate_grows_with_load(self):
        rates = [expected_collision_rate(k, 10) for k in (10, 100, 1000, 10000)]
        self.assertEqual(rates, sorted(rates))
        self.assertLess(rates[-1], 1.0)


class LearnAndReadTestCase(SimpleTestCase):

    def setUp(self):
        self.memory = BlockMemory(blocks=16, depth_exp=16, length=1600, master_seed=1)

    def test_learned_key_votes_unanimously(self):
        """Test that a learned key reads back its label in every block."""
        hv = keys(1)[0]
        self.memory.learn(hv, "mentor")
        result = self.memory.vote(hv)
        self.assertEqual(self.memory.labels.label(result.winner_tid), "mentor")
        self.assertEqual(result.cr1, 1.0)
        self.assertTrue(result.fires)

    def test_unknown_key_reads_empty(self):
        self.memory.learn(keys(1)[0], "mentor")
        result = self.memory.vote(generate_token("stranger", 1600, 0))
        self.assertIsNone(result.winner_tid)

    def test_relearning_is_idempotent(self):
        """Test that repeating a learned pair changes no counter"""
        hv = keys(1)[0]
        self.memory.learn(hv, "mentor")
        before = self.memory.stats.as_dict()
        self.memory.learn(hv, "mentor")
        self.assertEqual(self.memory.stats.as_dict(), before)

    def test_relearning_onto_collided_cells_is_idempotent(self):
        """Test that repeating a pair whose cells are already flagged is not a new collision"""
        memory = BlockMemory(blocks=4, depth_exp=1, length=64, master_seed=0)
        hvs = keys(8, length=64)
        for i, hv in enumerate(hvs):
            memory.learn(hv, f"l{i}")
        self.assertTrue((memory.read_votes(hvs[0]) == COLLISION).any())
        before = memory.stats.as_dict()
        cells = memory.read_votes(hvs[0]).copy()
        self.assertEqual(memory.learn(hvs[0], "l0"), 0)
        self.assertEqual(memory.stats.as_dict(), before)
        np.testing.assert_array_equal(memory.read_votes(hvs[0]), cells)

    def test_same_key_under_a_new_label_still_collides(self):
        """Test that only an identical (key, label) pair is skipped"""
        hv = keys(1)[0]
        self.memory.learn(hv, "a")
        self.memory.learn(hv, "a")
        self.memory.learn(hv, "b")
        self.assertEqual(self.memory.stats.collision_attempts, 16)

    def test_conflicting_label_flags_every_block(self):
        """Test that relearning a key under a new label collides in all B blocks."""
        hv = keys(1)[0]
        self.memory.learn(hv, "a")
        self.memory.learn(hv, "b")
        self.assertTrue((self.memory.read_votes(hv) == COLLISION).all())
        self.assertEqual(self.memory.stats.collision_attempts, 16)
        self.assertEqual(self.memory.stats.flagged_cells, 16)
        self.assertEqual(self.memory.stats.write_attempts, 32)
        self.assertAlmostEqual(self.memory.stats.count_rate, 0.5)
        self.assertAlmostEqual(self.memory.stats.location_rate, 16 / (16 * 2 ** 16))

    def test_learning_after_finalize_is_rejected(self):
        """Test that a finalized memory raises FrozenMemoryError on learn."""
        self.memory.finalize()
        with self.assertRaises(FrozenMemoryError):
            self.memory.learn(keys(1)[0], "late")

    def test_length_mismatch_raises(self):
        with self.assertRaises(DimensionError):
            self.memory.learn(Hypervector.zeros(800), "x")

    def test_force_dont_care_lowers_cr1(self):
        """Test that forcing cells to don't-care lowers CR1 by the forced share."""
        hv = keys(1)[0]
        self.memory.learn(hv, "mentor")
        self.memory.force_dont_care(hv, [0, 1, 2])
        result = self.memory.vote(hv)
        self.assertEqual(result.dont_care_blocks, 3)
        self.assertAlmostEqual(result.cr1, 13 / 16)


class VoteStrengthTestCase(SimpleTestCase):

    def test_winner_votes_fall_with_hamming_distance(self):
        """Test that winner votes drop as the query moves away from the key."""
        length = 12800
        memory = BlockMemory(blocks=128, depth_exp=16, length=length, master_seed=2)
        hv = generate_token("key", length, 2)
        memory.learn(hv, "mentor")
        rng = np.random.default_rng(8)
        means = []
        for distance in (0, 1, 2, 4, 8, 16, 32, 64, 128, 256):
            queries = []
            for _ in range(1000):
                bits = hv.bits().copy()
                bits[rng.choice(length, distance, replace=False)] ^= 1
                queries.append(Hypervector.from_bits(bits))
            results = majority_vote_rows(memory.read_many(queries))
            means.append(np.mean([r.winner_votes for r in results]))
        self.assertEqual(means[0], 128)
        for closer, farther in zip(means, means[1:]):
            self.assertGreaterEqual(closer, farther)
        self.assertLess(means[-1], 40)


class BucketPolicyTestCase(SimpleTestCase):

    def test_bucket_keeps_every_colliding_tid(self):
        """Test that the bucket policy stores each colliding label for a cell."""
        memory = BlockMemory(blocks=8, depth_exp=12, length=800, master_seed=2, collision_policy="bucket")
        hv = keys(1, length=800)[0]
        for label in ("a", "b", "c", "b"):
            memory.learn(hv, label)
        cells = memory.read_votes(hv)
        self.assertTrue((cells <= -2).all())
        self.assertEqual(memory.bucket(int(cells[0])), [0, 1, 2])
        self.assertEqual(len(memory.buckets), 8)
        self.assertEqual(memory.stats.flagged_cells, 8)
        self.assertEqual(memory.stats.collision_attempts, 16)
        self.assertIsNone(majority_vote(cells).winner_tid)

    def test_unknown_policy_is_rejected(self):
        with self.assertRaises(ValueError):
            BlockMemory(blocks=8, depth_exp=8, length=800, collision_policy="ignore")


class StorageEquivalenceTestCase(SimpleTestCase):

    def test_sparse_storage_reads_like_dense(self):
        """Test that sparse and dense storage return identical reads."""
        hvs = keys(300, length=1600, seed=4)
        labels = [f"m{i % 37}" for i in range(300)]
        dense = BlockMemory(blocks=16, depth_exp=10, length=1600, master_seed=3)
        sparse = BlockMemory(blocks=16, depth_exp=10, length=1600, master_seed=3, dense_cell_limit=0)
        self.assertEqual((dense.storage, sparse.storage), ("dense", "sparse"))
        dense.learn_many(hvs, labels)
        sparse.learn_many(hvs, labels)
        np.testing.assert_array_equal(dense.read_many(hvs), sparse.read_many(hvs))
        dense.finalize()
        sparse.finalize()
        queries = hvs + keys(50, length=1600, seed=99)
        np.testing.assert_array_equal(dense.read_many(queries), sparse.read_many(queries))
        self.assertEqual(dense.stats.as_dict(), sparse.stats.as_dict())

    def test_force_dont_care_on_finalized_sparse_memory(self):
        memory = BlockMemory(blocks=16, depth_exp=20, length=1600, master_seed=3, dense_cell_limit=0)
        hv = keys(1)[0]
        memory.learn(hv, "mentor")
        memory.finalize()
        memory.force_dont_care(hv, [5])
        self.assertEqual(int(memory.read_votes(hv)[5]), COLLISION)
        self.assertEqual(memory.vote(hv).dont_care_blocks, 1)

    def test_collision_rate_tracks_the_prediction(self):
        """Test the measured count rate against the analytic estimate."""
        hvs = keys(2000, length=1600, seed=8)
        memory = BlockMemory(blocks=16, depth_exp=12, length=1600, master_seed=5)
        memory.learn_many(hvs, [f"m{i}" for i in range(2000)])
        predicted = expected_collision_rate(2000, 12)
        self.assertLess(abs(memory.stats.count_rate - predicted), 0.25 * predicted)
