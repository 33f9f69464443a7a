"""
Tests for Galois LFSR diffusion: determinism, linearity, address range,
avalanche and address uniformity.
"""

import numpy as np
from django.test import SimpleTestCase
from scipy.stats import chi2

from vacoal.exceptions import DimensionError
from vacoal.galois import (
    BlockDiffuser,
    DiffuserBank,
    FeedbackPolynomial,
    avalanche_stats,
    derive,
    diffuse,
    lfsr_states,
    sample_polynomial,
)


def diffuser(seed=1, depth_exp=24, segment_bytes=None):
    return BlockDiffuser(sample_polynomial(derive(seed, 0)), derive(seed, 1), depth_exp, segment_bytes)


class PolynomialTestCase(SimpleTestCase):

    def test_constant_term_is_required(self):
        """Test that a polynomial without the constant term is rejected."""
        with self.assertRaises(ValueError):
            FeedbackPolynomial(0b10)

    def test_from_draw_forces_constant_term(self):
        self.assertEqual(FeedbackPolynomial.from_draw(0b100).coeffs, 0b101)

    def test_sampling_is_deterministic(self):
        """Test that polynomial sampling depends only on the seed."""
        self.assertEqual(sample_polynomial(1234), sample_polynomial(1234))
        self.assertNotEqual(sample_polynomial(1234), sample_polynomial(1235))

    def test_zero_seed_is_rejected(self):
        """Test that an all-zero LFSR state is refused."""
        with self.assertRaises(ValueError):
            BlockDiffuser(FeedbackPolynomial(1), 0, 16)

    def test_depth_range_is_checked(self):
        with self.assertRaises(ValueError):
            BlockDiffuser(FeedbackPolynomial(1), 1, 33)


class DiffusionTestCase(SimpleTestCase):

    def test_addresses_fit_in_m_bits(self):
        """Test that every address lies below 2^m."""
        rng = np.random.default_rng(1)
        d = diffuser(depth_exp=12)
        segments = rng.integers(0, 256, size=(5000, 13), dtype=np.uint8)
        addresses = d.addresses(segments)
        self.assertTrue((addresses >= 0).all())
        self.assertTrue((addresses < 2 ** 12).all())

    def test_diffuse_is_deterministic(self):
        d = diffuser()
        self.assertEqual(diffuse(d, b"hello world!!"), diffuse(d, b"hello world!!"))
        self.assertNotEqual(diffuse(d, b"hello world!!"), diffuse(d, b"hello world!?"))

    def test_lfsr_is_affine_in_the_input(self):
        """Test that diffusion is affine over GF(2)."""
        rng = np.random.default_rng(2)
        poly = sample_polynomial(77)
        a = rng.integers(0, 256, size=(100, 16), dtype=np.uint8)
        b = rng.integers(0, 256, size=(100, 16), dtype=np.uint8)
        zero = np.zeros_like(a)
        left = lfsr_states(5, poly.coeffs, a ^ b)
        right = lfsr_states(5, poly.coeffs, a) ^ lfsr_states(5, poly.coeffs, b) ^ lfsr_states(5, poly.coeffs, zero)
        np.testing.assert_array_equal(left, right)

    def test_single_bit_avalanche_is_near_half(self):
        """Test that flipping one input bit flips about half the address bits."""
        score = avalanche_stats(diffuser(seed=11, depth_exp=24), trials=10000, segment_bits=1024, seed=3)
        self.assertGreaterEqual(score, 0.47)
        self.assertLessEqual(score, 0.53)

    def test_addresses_of_random_segments_are_uniform(self):
        """Test address uniformity with a chi-square check."""
        rng = np.random.default_rng(4)
        d = diffuser(seed=5, depth_exp=8)
        addresses = d.addresses(rng.integers(0, 256, size=(51200, 13), dtype=np.uint8))
        counts = np.bincount(addresses, minlength=256)
        expected = addresses.shape[0] / 256
        statistic = float(((counts - expected) ** 2 / expected).sum())
        self.assertGreater(chi2.sf(statistic, df=255), 0.001)

    def test_segment_width_is_checked(self):
        with self.assertRaises(DimensionError):
            diffuser(segment_bytes=13).addresses(np.zeros((1, 12), dtype=np.uint8))


class DiffuserBankTestCase(SimpleTestCase):

    def test_bank_is_reproducible_from_master_seed(self):
        """Test that one master seed rebuilds the same bank."""
        rng = np.random.default_rng(6)
        segments = rng.integers(0, 256, size=(20, 16, 13), dtype=np.uint8)
        first = DiffuserBank(42, 16, 20, 13)
        second = DiffuserBank(42, 16, 20, 13)
        self.assertEqual(first, second)
        np.testing.assert_array_equal(first.addresses(segments), second.addresses(segments))
        self.assertFalse(np.array_equal(first.addresses(segments), DiffuserBank(43, 16, 20, 13).addresses(segments)))

    def test_bank_matches_per_block_diffusers(self):
        """Test that the batched bank agrees with per-block diffusion."""
        rng = np.random.default_rng(7)
        bank = DiffuserBank(9, 8, 16, 13)
        segments = rng.integers(0, 256, size=(8, 13), dtype=np.uint8)
        batch = bank.addresses(segments)
        for b in range(8):
            self.assertEqual(int(batch[b]), diffuse(bank[b], segments[b]))

    def test_blocks_use_distinct_polynomials(self):
        bank = DiffuserBank(0, 64, 16)
        self.assertEqual(len({d.poly.coeffs for d in bank.diffusers}), 64)

    def test_block_count_is_checked(self):
        with self.assertRaises(DimensionError):
            DiffuserBank(1, 8, 16, 13).addresses(np.zeros((7, 13), dtype=np.uint8))

    def test_healthy_bank_has_no_weak_blocks(self):
        """Test that a freshly drawn bank passes the avalanche screen."""
        self.assertEqual(DiffuserBank(3, 8, 16).weak_blocks(trials=2000, segment_bits=256), [])
