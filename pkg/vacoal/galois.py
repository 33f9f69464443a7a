"""
Galois-field diffusion: degree-64 feedback polynomials and per-block LFSRs.

Each block owns a ``BlockDiffuser`` (polynomial, nonzero seed, depth m). A
packed segment is injected byte by byte into a 64-bit Galois-configuration
LFSR that steps right, CRC style; the low m bits of the final state are the
block's memory address. Only that m-bit residue is ever produced.

Functions:
    sample_polynomial: Deterministic polynomial from a 64-bit rng state
    diffuse: Address of one segment under one diffuser
    lfsr_states: Vectorised LFSR over arbitrary batches of segments
    avalanche_stats: Mean fraction of address bits flipped by single-bit input flips

Classes:
    FeedbackPolynomial, BlockDiffuser, DiffuserBank
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import config
from .exceptions import DimensionError

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_ONE = np.uint64(1)


def mix64(x: int) -> int:
    """SplitMix64 finaliser."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive(master_seed: int, counter: int) -> int:
    """Counter-hashed 64-bit value; one master seed reproduces a whole bank."""
    return mix64(master_seed + (counter + 1) * _GOLDEN)


@dataclass(frozen=True)
class FeedbackPolynomial:
    """
    G(x) over GF(2) of degree 64.

    ``coeffs`` bit i is the coefficient of x^i; the x^64 term is implicit.
    """

    coeffs: int

    def __post_init__(self):
        if not 0 <= self.coeffs <= MASK64:
            raise ValueError("Polynomial coefficients must fit in 64 bits")
        if not self.coeffs & 1:
            raise ValueError("Polynomial must have g_0 = 1")

    @classmethod
    def from_draw(cls, draw: int) -> "FeedbackPolynomial":
        return cls((draw & MASK64) | 1)

    def __str__(self):
        return f"0x{self.coeffs:016x}"


def sample_polynomial(rng_state: int) -> FeedbackPolynomial:
    return FeedbackPolynomial.from_draw(mix64(rng_state))


def lfsr_states(seeds, coeffs, segments: np.ndarray) -> np.ndarray:
    """
    Run the Galois LFSR over a batch of packed segments.

    Args:
        seeds: Initial states, broadcastable to ``segments.shape[:-1]``
        coeffs: Feedback masks, broadcastable likewise
        segments: uint8 array (..., n_bytes)

    Returns:
        np.ndarray: uint64 final states of shape ``segments.shape[:-1]``
    """
    segments = np.asarray(segments, dtype=np.uint8)
    shape = segments.shape[:-1]
    state = np.broadcast_to(np.asarray(seeds, dtype=np.uint64), shape).copy()
    taps = np.asarray(coeffs, dtype=np.uint64)
    for j in range(segments.shape[-1]):
        state ^= segments[..., j].astype(np.uint64)
        for _ in range(8):
            lsb = state & _ONE
            state = (state >> _ONE) ^ (taps * lsb)
    return state


def _mask(depth_exp: int) -> np.uint64:
    return np.uint64((1 << depth_exp) - 1)


@dataclass(frozen=True)
class BlockDiffuser:
    poly: FeedbackPolynomial
    seed: int
    depth_exp: int
    segment_bytes: Optional[int] = None

    def __post_init__(self):
        if self.seed == 0 or not 0 < self.seed <= MASK64:
            raise ValueError("Diffuser seed must be a nonzero 64-bit value")
        if not 1 <= self.depth_exp <= 32:
            raise ValueError(f"Depth exponent must lie in [1, 32], got {self.depth_exp}")

    def addresses(self, segments: np.ndarray) -> np.ndarray:
        """Addresses for a batch of segments of shape (n, n_bytes)."""
        segments = np.asarray(segments, dtype=np.uint8)
        if self.segment_bytes is not None and segments.shape[-1] != self.segment_bytes:
            raise DimensionError(
                f"Segment has {segments.shape[-1]} bytes, expected {self.segment_bytes}"
            )
        states = lfsr_states(self.seed, self.poly.coeffs, segments)
        return (states & _mask(self.depth_exp)).astype(np.int64)


def diffuse(diffuser: BlockDiffuser, segment) -> int:
    """m-bit address of one packed segment."""
    seg = np.frombuffer(bytes(segment), dtype=np.uint8) if isinstance(segment, (bytes, bytearray)) else np.asarray(segment, dtype=np.uint8)
    return int(diffuser.addresses(seg.reshape(1, -1))[0])


def _flip_fraction(diff: np.ndarray, depth_exp: int) -> np.ndarray:
    diff = (diff & _mask(depth_exp)).astype("<u8")
    ones = np.unpackbits(diff.view(np.uint8).reshape(-1, 8), axis=1).sum(axis=1)
    return ones / depth_exp


def avalanche_stats(
    diffuser: BlockDiffuser,
    trials: int,
    segment_bits: Optional[int] = None,
    flips: int = 1,
    seed: int = 0,
) -> float:
    """
    Mean fraction of the m address bits that change when ``flips`` random
    input bits of a random segment are inverted.

    Raises:
        ValueError: If trials is not positive
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if segment_bits is None:
        segment_bits = (diffuser.segment_bytes or 8) * 8
    n_bytes = (segment_bits + 7) // 8
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(trials, n_bytes * 8), dtype=np.uint8)
    bits[:, segment_bits:] = 0
    flipped = bits.copy()
    if flips:
        for row in range(trials):
            positions = rng.choice(segment_bits, size=flips, replace=False)
            flipped[row, positions] ^= 1
    base = np.packbits(bits, axis=1, bitorder="little")
    moved = np.packbits(flipped, axis=1, bitorder="little")
    a = lfsr_states(diffuser.seed, diffuser.poly.coeffs, base)
    b = lfsr_states(diffuser.seed, diffuser.poly.coeffs, moved)
    return float(_flip_fraction(a ^ b, diffuser.depth_exp).mean())


class DiffuserBank:
    """
    B independent diffusers derived from one master seed.

    Polynomials and seeds are re-derived from (master_seed, B, m); nothing
    else needs to be stored to reproduce the bank.
    """

    def __init__(self, master_seed: int, blocks: int, depth_exp: int, segment_bytes: Optional[int] = None):
        if blocks <= 0:
            raise ValueError("Block count must be positive")
        self.master_seed = master_seed & MASK64
        self.blocks = blocks
        self.depth_exp = depth_exp
        self.segment_bytes = segment_bytes
        diffusers: List[BlockDiffuser] = []
        for b in range(blocks):
            poly = sample_polynomial(derive(self.master_seed, 2 * b))
            seed = derive(self.master_seed, 2 * b + 1) or 1
            diffusers.append(BlockDiffuser(poly, seed, depth_exp, segment_bytes))
        self.diffusers: Tuple[BlockDiffuser, ...] = tuple(diffusers)
        self._seeds = np.array([d.seed for d in diffusers], dtype=np.uint64)
        self._coeffs = np.array([d.poly.coeffs for d in diffusers], dtype=np.uint64)
        self._mask = _mask(depth_exp)

    def __len__(self):
        return self.blocks

    def __getitem__(self, block: int) -> BlockDiffuser:
        return self.diffusers[block]

    def addresses(self, segments: np.ndarray) -> np.ndarray:
        """
        Per-block addresses for segments of shape (..., B, n_bytes).

        Returns:
            np.ndarray: int64 addresses of shape (..., B)
        """
        segments = np.asarray(segments, dtype=np.uint8)
        if segments.ndim < 2 or segments.shape[-2] != self.blocks:
            raise DimensionError(f"Expected {self.blocks} segments per vector, got shape {segments.shape}")
        if self.segment_bytes is not None and segments.shape[-1] != self.segment_bytes:
            raise DimensionError(
                f"Segments have {segments.shape[-1]} bytes, expected {self.segment_bytes}"
            )
        states = lfsr_states(self._seeds, self._coeffs, segments)
        return (states & self._mask).astype(np.int64)

    def weak_blocks(self, trials: int = 2000, segment_bits: Optional[int] = None, seed: int = 0) -> List[Tuple[int, float]]:
        """Blocks whose measured avalanche falls outside the healthy band."""
        low, high = config.avalanche_band
        weak = []
        for b, diffuser in enumerate(self.diffusers):
            score = avalanche_stats(diffuser, trials, segment_bits, seed=seed + b)
            if not low <= score <= high:
                weak.append((b, score))
        if weak:
            logger.warning(f"{len(weak)} of {self.blocks} diffusers fall outside the avalanche band")
        return weak

    def __eq__(self, other):
        if not isinstance(other, DiffuserBank):
            return NotImplemented
        return (self.master_seed, self.blocks, self.depth_exp) == (
            other.master_seed,
            other.blocks,
            other.depth_exp,
        )

    def __repr__(self):
        return f"DiffuserBank(master_seed={self.master_seed}, blocks={self.blocks}, depth_exp={self.depth_exp})"
