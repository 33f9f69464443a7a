"""
Binary hypervectors and the HDC algebra.

A hypervector is a fixed-length binary vector stored packed, LSB-first:
bit ``i`` lives at bit ``i % 8`` of byte ``i // 8``; trailing pad bits are
zero. Every operation here is pure and returns new immutable vectors.

Functions:
    generate_token: Deterministic atomic vector for a (name, length, seed)
    bind / unbind / unbind_role: XOR-with-rotation composition and its inverses
    bundle: Bitwise majority with a tiebreak vector
    hamming: Hamming distance and similarity
    bipolar_inner_product: ±1 inner product (D - 2 * distance identity)

Classes:
    Hypervector: Immutable packed binary vector
    TokenCodebook: Thread-safe, persistable map of token names to vectors

Usage:
    from vacoal.hypervector import TokenCodebook, bind, unbind

    book = TokenCodebook(seed=42, length=12800)
    key = bind(book.token("Q1"), book.token("__ord__0"))
    assert unbind(key, book.token("__ord__0")) == book.token("Q1")
"""

import hashlib
import logging
import struct
import threading
from typing import Dict, Iterable, NamedTuple, Sequence

import numpy as np

from . import config
from .exceptions import ArtifactIOError, DimensionError, EmptyInputError, SnapshotFormatError

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1

# popcount of every byte value
_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint16)


def packed_size(length: int) -> int:
    """Number of bytes needed to hold ``length`` bits."""
    return (length + 7) // 8


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a 0/1 array along its last axis, LSB-first."""
    return np.packbits(np.asarray(bits, dtype=np.uint8), axis=-1, bitorder="little")


def unpack_bits(data: np.ndarray, length: int) -> np.ndarray:
    """Unpack LSB-first bytes along the last axis and keep ``length`` bits."""
    return np.unpackbits(data, axis=-1, count=length, bitorder="little")


def popcount(data: np.ndarray, axis=-1) -> np.ndarray:
    """Number of set bits of packed bytes, summed along ``axis``."""
    return _POPCOUNT[data].sum(axis=axis)


def rotate_rows(rows: np.ndarray, length: int, shift: int) -> np.ndarray:
    """
    Circularly rotate packed rows by ``shift`` bit positions.

    A positive shift moves bit ``i`` to position ``(i + shift) % length``
    (a left rotation of the little-endian integer the row encodes).
    """
    bits = unpack_bits(rows, length)
    return pack_bits(np.roll(bits, shift, axis=-1))


def segment_rows(rows: np.ndarray, length: int, blocks: int) -> np.ndarray:
    """
    Split packed rows into ``blocks`` equal segments, each re-packed.

    Args:
        rows: uint8 array of shape (..., packed_size(length))
        length: Logical bit length L
        blocks: Block count B; must divide L

    Returns:
        np.ndarray: uint8 array of shape (..., B, ceil(q/8)) with q = L/B
    """
    if length % blocks:
        raise DimensionError(f"Length {length} is not a multiple of block count {blocks}")
    q = length // blocks
    bits = unpack_bits(rows, length)
    bits = bits.reshape(bits.shape[:-1] + (blocks, q))
    return pack_bits(bits)


class Hypervector:
    """
    Immutable binary hypervector of ``length`` bits.

    Attributes:
        data: Read-only uint8 array of shape (ceil(length/8),)
        length: Number of logical bits
    """

    __slots__ = ("data", "length")

    def __init__(self, data: np.ndarray, length: int):
        if length <= 0:
            raise DimensionError("Hypervector length must be positive")
        arr = np.array(data, dtype=np.uint8, copy=True).reshape(-1)
        if arr.shape != (packed_size(length),):
            raise DimensionError(
                f"Packed size {arr.shape[0]} does not match length {length}"
            )
        tail = length % 8
        if tail:
            arr[-1] &= (1 << tail) - 1
        arr.flags.writeable = False
        self.data = arr
        self.length = length

    @classmethod
    def from_bits(cls, bits) -> "Hypervector":
        bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
        return cls(pack_bits(bits), bits.shape[0])

    @classmethod
    def zeros(cls, length: int) -> "Hypervector":
        return cls(np.zeros(packed_size(length), dtype=np.uint8), length)

    @classmethod
    def from_bytes(cls, raw: bytes, length: int) -> "Hypervector":
        return cls(np.frombuffer(raw, dtype=np.uint8), length)

    def bits(self) -> np.ndarray:
        """Unpacked 0/1 array of shape (length,)."""
        return unpack_bits(self.data, self.length)

    def segments(self, blocks: int) -> np.ndarray:
        """Packed per-block segments, shape (blocks, ceil(q/8))."""
        return segment_rows(self.data, self.length, blocks)

    def rotate(self, shift: int) -> "Hypervector":
        return Hypervector(rotate_rows(self.data, self.length, shift), self.length)

    def invert(self) -> "Hypervector":
        return Hypervector(np.bitwise_not(self.data), self.length)

    def to_bytes(self) -> bytes:
        return self.data.tobytes()

    def __len__(self):
        return self.length

    def __eq__(self, other):
        if not isinstance(other, Hypervector):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.length, self.data.tobytes()))

    def __repr__(self):
        ones = int(popcount(self.data))
        return f"Hypervector(length={self.length}, popcount={ones})"


class HammingResult(NamedTuple):
    distance: int
    similarity: float


def _check_pair(a: Hypervector, b: Hypervector):
    if a.length != b.length:
        raise DimensionError(f"Length mismatch: {a.length} != {b.length}")


def _token_seed(name: str, seed: int) -> np.random.SeedSequence:
    """Mix (seed, name) into a seed sequence; independent of call order."""
    digest = hashlib.blake2b(
        name.encode("utf-8"),
        digest_size=16,
        key=(seed & _MASK64).to_bytes(8, "little"),
    ).digest()
    words = struct.unpack("<4I", digest)
    return np.random.SeedSequence(entropy=list(words) + [seed & 0xFFFFFFFF, (seed >> 32) & 0xFFFFFFFF])


def generate_token(name: str, length: int, seed: int) -> Hypervector:
    """
    Deterministic pseudorandom hypervector for a token name.

    The (seed, name) pair is hashed into a seed sequence that keys a
    counter-based Philox generator, so the result never depends on which
    tokens were generated before.

    Raises:
        DimensionError: If length is not a positive multiple of 8
    """
    if length <= 0 or length % 8:
        raise DimensionError(f"Token length must be a positive multiple of 8, got {length}")
    rng = np.random.Generator(np.random.Philox(_token_seed(name, seed)))
    return Hypervector(np.frombuffer(rng.bytes(length // 8), dtype=np.uint8), length)


def bind(a: Hypervector, b: Hypervector) -> Hypervector:
    """``a XOR rotate_left(b, 1)``; binding with the same ``b`` again restores ``a``."""
    _check_pair(a, b)
    rotated = rotate_rows(b.data, b.length, 1)
    return Hypervector(np.bitwise_xor(a.data, rotated), a.length)


def unbind(product: Hypervector, filler: Hypervector) -> Hypervector:
    """Recover the first operand of ``bind(role, filler)``."""
    return bind(product, filler)


def unbind_role(product: Hypervector, role: Hypervector) -> Hypervector:
    """Recover the second operand of ``bind(role, filler)``."""
    _check_pair(product, role)
    mixed = np.bitwise_xor(product.data, role.data)
    return Hypervector(rotate_rows(mixed, product.length, -1), product.length)


def bundle(vs: Sequence[Hypervector], tiebreak: Hypervector) -> Hypervector:
    """
    Bitwise majority of ``vs``; exact ties copy the tiebreak bit.

    Raises:
        EmptyInputError: If ``vs`` is empty
        DimensionError: If lengths differ
    """
    if not vs:
        raise EmptyInputError("Cannot bundle an empty sequence")
    length = vs[0].length
    for v in list(vs) + [tiebreak]:
        if v.length != length:
            raise DimensionError(f"Length mismatch: {v.length} != {length}")
    rows = np.stack([v.data for v in vs])
    counts = unpack_bits(rows, length).sum(axis=0, dtype=np.int64) * 2
    k = len(vs)
    bits = np.where(counts == k, tiebreak.bits(), counts > k).astype(np.uint8)
    return Hypervector.from_bits(bits)


def hamming(a: Hypervector, b: Hypervector) -> HammingResult:
    """Hamming distance and similarity ``1 - distance / L``."""
    _check_pair(a, b)
    distance = int(popcount(np.bitwise_xor(a.data, b.data)))
    return HammingResult(distance, 1.0 - distance / a.length)


def similarity(a: Hypervector, b: Hypervector) -> float:
    return hamming(a, b).similarity


def to_bipolar(hv: Hypervector) -> np.ndarray:
    """Map bit 0 -> +1 and bit 1 -> -1."""
    return 1 - 2 * hv.bits().astype(np.int64)


def bipolar_inner_product(a: Hypervector, b: Hypervector) -> int:
    """Inner product of the ±1 images; equals ``L - 2 * hamming distance``."""
    _check_pair(a, b)
    return int(np.dot(to_bipolar(a), to_bipolar(b)))


class TokenCodebook:
    """
    Deterministic map from token names to hypervectors.

    Reads are lock-free; insertion of a newly generated token is serialised.
    """

    def __init__(self, seed: int, length: int):
        if length <= 0 or length % 8:
            raise DimensionError(f"Codebook length must be a positive multiple of 8, got {length}")
        self.seed = seed & _MASK64
        self.length = length
        self._entries: Dict[str, Hypervector] = {}
        self._lock = threading.Lock()

    def token(self, name: str) -> Hypervector:
        hv = self._entries.get(name)
        if hv is None:
            with self._lock:
                hv = self._entries.get(name)
                if hv is None:
                    hv = generate_token(name, self.length, self.seed)
                    self._entries[name] = hv
        return hv

    def tokens(self, names: Iterable[str]) -> np.ndarray:
        """Packed rows for ``names``, shape (n, L/8)."""
        names = list(names)
        if not names:
            return np.zeros((0, self.length // 8), dtype=np.uint8)
        return np.stack([self.token(name).data for name in names])

    def ordinal(self, j: int) -> Hypervector:
        return self.token(f"{config.ordinal_prefix}{j}")

    @property
    def tiebreak(self) -> Hypervector:
        return self.token(config.tiebreak_token)

    def bundle(self, vs: Sequence[Hypervector]) -> Hypervector:
        return bundle(vs, self.tiebreak)

    def __contains__(self, name):
        return name in self._entries

    def __len__(self):
        return len(self._entries)

    def names(self):
        return list(self._entries)

    def save(self, path) -> None:
        """Write header (magic, L, seed) then (name length, name, packed bits) records."""
        with self._lock:
            items = list(self._entries.items())
        with open(path, "wb") as fh:
            fh.write(config.codebook_magic)
            fh.write(struct.pack("<IQI", self.length, self.seed, len(items)))
            for name, hv in items:
                raw = name.encode("utf-8")
                fh.write(struct.pack("<I", len(raw)))
                fh.write(raw)
                fh.write(hv.to_bytes())
        logger.info(f"Saved codebook with {len(items)} tokens to {path}")

    @classmethod
    def load(cls, path) -> "TokenCodebook":
        """
        Raises:
            SnapshotFormatError: If the file is foreign or truncated
            ArtifactIOError: If the file cannot be read
        """
        try:
            with open(path, "rb") as fh:
                if fh.read(4) != config.codebook_magic:
                    raise SnapshotFormatError(f"{path} is not a codebook file")
                length, seed, count = struct.unpack("<IQI", fh.read(16))
                book = cls(seed, length)
                width = packed_size(length)
                for _ in range(count):
                    (size,) = struct.unpack("<I", fh.read(4))
                    name = fh.read(size).decode("utf-8")
                    raw = fh.read(width)
                    if len(raw) != width:
                        raise SnapshotFormatError(f"Truncated codebook record for {name!r}")
                    book._entries[name] = Hypervector.from_bytes(raw, length)
        except (struct.error, UnicodeDecodeError) as e:
            raise SnapshotFormatError(f"Truncated or corrupt codebook {path}: {e}") from e
        except OSError as e:
            raise ArtifactIOError(f"Cannot read codebook {path}: {e}") from e
        return book
