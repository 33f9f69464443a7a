"""
Tests for the hypervector algebra.

Covers token determinism, bind/unbind reversibility, bundling ties,
Hamming metrics, the bipolar identity, segmentation and codebook
persistence.
"""

import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from vacoal.exceptions import ArtifactIOError, DimensionError, EmptyInputError, SnapshotFormatError
from vacoal.hypervector import (
    Hypervector,
    TokenCodebook,
    bind,
    bipolar_inner_product,
    bundle,
    generate_token,
    hamming,
    segment_rows,
    similarity,
    unbind,
    unbind_role,
)


def random_hv(rng, length):
    return Hypervector.from_bits(rng.integers(0, 2, size=length, dtype=np.uint8))


class TokenGenerationTestCase(SimpleTestCase):
    """Deterministic token vectors."""

    def test_same_name_and_seed_give_same_vector(self):
        """Test token determinism for one name and seed."""
        self.assertEqual(generate_token("Q42", 12800, 7), generate_token("Q42", 12800, 7))

    def test_seed_and_name_both_matter(self):
        base = generate_token("Q42", 12800, 7)
        self.assertNotEqual(base, generate_token("Q42", 12800, 8))
        self.assertNotEqual(base, generate_token("Q43", 12800, 7))

    def test_tokens_are_balanced_and_nearly_orthogonal(self):
        """Test that tokens are about half ones and pairwise near 0.5 similarity."""
        a = generate_token("alpha", 10000, 1)
        b = generate_token("beta", 10000, 1)
        ones = int(a.bits().sum())
        self.assertLess(abs(ones - 5000), 5 * 50)
        self.assertLess(abs(similarity(a, b) - 0.5), 5 / np.sqrt(10000))

    def test_codebook_is_independent_of_request_order(self):
        """Test that tokens do not depend on the order they are requested in."""
        first = TokenCodebook(3, 800)
        second = TokenCodebook(3, 800)
        first.token("a"), first.token("b")
        second.token("b"), second.token("a")
        self.assertEqual(first.token("a"), second.token("a"))
        self.assertEqual(first.token("b"), second.token("b"))

    def test_length_must_be_a_multiple_of_eight(self):
        with self.assertRaises(DimensionError):
            generate_token("x", 1001, 0)


class BindingTestCase(SimpleTestCase):
    """bind / unbind / unbind_role."""

    def test_unbind_recovers_first_operand_exactly(self):
        """Test that unbind with the role recovers the bound value."""
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            a = random_hv(rng, 10000)
            b = random_hv(rng, 10000)
            self.assertEqual(unbind(bind(a, b), b), a)

    def test_unbind_role_recovers_second_operand_exactly(self):
        """Test that unbind_role recovers the rotated operand."""
        rng = np.random.default_rng(5)
        for _ in range(50):
            role = random_hv(rng, 10000)
            filler = random_hv(rng, 10000)
            self.assertEqual(unbind_role(bind(role, filler), role), filler)

    def test_bind_is_not_commutative(self):
        """Test that bind(a, b) differs from bind(b, a)."""
        rng = np.random.default_rng(6)
        a, b = random_hv(rng, 1024), random_hv(rng, 1024)
        self.assertNotEqual(bind(a, b), bind(b, a))

    def test_bound_vector_is_dissimilar_to_operands(self):
        rng = np.random.default_rng(8)
        a, b = random_hv(rng, 10000), random_hv(rng, 10000)
        product = bind(a, b)
        self.assertLess(abs(similarity(product, a) - 0.5), 0.05)
        self.assertLess(abs(similarity(product, b) - 0.5), 0.05)

    def test_length_mismatch_raises(self):
        """Test that binding vectors of different lengths raises DimensionError."""
        with self.assertRaises(DimensionError):
            bind(Hypervector.zeros(64), Hypervector.zeros(128))


class BundleTestCase(SimpleTestCase):
    """Majority bundling."""

    def test_odd_bundle_is_bitwise_majority(self):
        """Test that an odd bundle takes the bitwise majority."""
        rng = np.random.default_rng(11)
        vs = [random_hv(rng, 512) for _ in range(5)]
        tiebreak = random_hv(rng, 512)
        expected = (np.stack([v.bits() for v in vs]).sum(axis=0) >= 3).astype(np.uint8)
        np.testing.assert_array_equal(bundle(vs, tiebreak).bits(), expected)

    def test_ties_copy_the_tiebreak_bit(self):
        """Test that even-count ties copy the tiebreak vector."""
        rng = np.random.default_rng(12)
        a, b, tiebreak = random_hv(rng, 512), random_hv(rng, 512), random_hv(rng, 512)
        result = bundle([a, b], tiebreak).bits()
        agree = a.bits() == b.bits()
        np.testing.assert_array_equal(result[agree], a.bits()[agree])
        np.testing.assert_array_equal(result[~agree], tiebreak.bits()[~agree])

    def test_single_vector_bundle_is_identity(self):
        rng = np.random.default_rng(13)
        a = random_hv(rng, 800)
        self.assertEqual(bundle([a], random_hv(rng, 800)), a)

    def test_empty_bundle_raises(self):
        with self.assertRaises(EmptyInputError):
            bundle([], Hypervector.zeros(64))


class MetricTestCase(SimpleTestCase):
    """Hamming distance, similarity and the bipolar identity."""

    def test_hamming_of_complement_is_length(self):
        rng = np.random.default_rng(21)
        a = random_hv(rng, 1000)
        result = hamming(a, a.invert())
        self.assertEqual(result.distance, 1000)
        self.assertEqual(result.similarity, 0.0)

    def test_inner_product_equals_length_minus_twice_distance(self):
        """Test the bipolar identity <a, b> = L - 2 * hamming(a, b)."""
        rng = np.random.default_rng(22)
        length = 1024
        for _ in range(10000):
            a, b = random_hv(rng, length), random_hv(rng, length)
            self.assertEqual(bipolar_inner_product(a, b), length - 2 * hamming(a, b).distance)


class SegmentationTestCase(SimpleTestCase):
    """Per-block segments when q is not a multiple of 8."""

    def test_segments_reassemble_the_vector(self):
        """Test that the B segments concatenate back to the vector."""
        rng = np.random.default_rng(31)
        hv = random_hv(rng, 12800)
        segments = hv.segments(128)
        self.assertEqual(segments.shape, (128, 13))
        bits = np.unpackbits(segments, axis=-1, count=100, bitorder="little").reshape(-1)
        np.testing.assert_array_equal(bits, hv.bits())

    def test_pad_bits_are_zero(self):
        rng = np.random.default_rng(32)
        segments = segment_rows(random_hv(rng, 12800).data, 12800, 128)
        self.assertTrue((segments[:, -1] < 16).all())

    def test_blocks_must_divide_length(self):
        with self.assertRaises(DimensionError):
            segment_rows(np.zeros(100, dtype=np.uint8), 800, 7)

    def test_odd_length_vector_masks_pad_bits(self):
        """Test that bits past L are cleared on construction."""
        hv = Hypervector(np.full(2, 0xFF, dtype=np.uint8), 12)
        self.assertEqual(int(hv.data[1]), 0x0F)


class CodebookPersistenceTestCase(SimpleTestCase):
    """TokenCodebook save/load."""

    def test_saved_codebook_reloads_the_same_tokens(self):
        """Test that a saved codebook loads with the same names and vectors."""
        book = TokenCodebook(99, 1600)
        for name in ("Q1", "Q2", "__ord__0"):
            book.token(name)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "tokens.vcbk"
            book.save(path)
            loaded = TokenCodebook.load(path)
        self.assertEqual(loaded.names(), book.names())
        self.assertEqual(loaded.token("Q2"), book.token("Q2"))
        self.assertEqual(loaded.token("Q3"), book.token("Q3"))

    def test_truncated_codebook_header_is_a_format_error(self):
        """Test that a header cut short reports a format error rather than a struct error."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "tokens.vcbk"
            TokenCodebook(99, 1600).save(path)
            path.write_bytes(path.read_bytes()[:10])
            with self.assertRaises(SnapshotFormatError):
                TokenCodebook.load(path)

    def test_codebook_cut_inside_a_record_is_a_format_error(self):
        """Test that cuts inside the records raise SnapshotFormatError."""
        book = TokenCodebook(99, 1600)
        book.token("Q1")
        book.token("Q2")
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "tokens.vcbk"
            book.save(path)
            data = path.read_bytes()
            for cut in (22, 26, len(data) - 50):
                path.write_bytes(data[:cut])
                with self.subTest(cut=cut), self.assertRaises(SnapshotFormatError):
                    TokenCodebook.load(path)

    def test_missing_codebook_is_an_io_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ArtifactIOError):
                TokenCodebook.load(Path(tmp) / "absent.vcbk")
