"""Prefix-free lossless codec whose codeword length is the complexity surrogate.

A codeword spells, in order: an 8-bit format version, the 8-bit alphabet
size, the block order m and the length n as Elias-gamma integers, the first
m symbols, the full (m+1)-block count table in fixed-width fields, and
finally the enumerative index of the sequence inside its type class
(omitted when the class is a singleton).  Every field is self-delimiting
given the previous ones, so the code is prefix-free and the decoder needs
no out-of-band length.

The concrete "machine constants" of this codec, used by every bound:

- c_prime(m, n): bits of the fixed header fields (version, alphabet size,
  and the two gamma envelopes);
- K_sym = ceil(log2 l): cost of naming one symbol;
- the count table costs l**(m+1) * ceil(log2(n-m+1)) bits and the prefix
  m * ceil(log2 l) bits.

The index field costs ceil(log2 |T|) <= -(n-m) * sum_j f_j log2 Q_j + 1 for
any Markov law Q positive on the observed blocks, which is what makes
codelength <= paper_upper_bound an exact inequality rather than an
asymptotic one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CorruptError,
    GuardExceededError,
    TooShortError,
    ValidationError,
    ZeroProbabilityBlockError,
)
from .models import Alphabet, MarkovModel, SymbolSequence
from .typeclass import BlockFrequencyVector, block_frequencies, rank_in_type_class, type_class_size, unrank

CODEC_VERSION = 1
HEADER_GUARD_BITS = 1 << 26


def log_star(n) -> int:
    """Iterated-log count: 0 for n <= 1, else 1 + log_star(log2 n)."""
    if n < 0:
        raise ValidationError("log_star: argument must be non-negative")
    x = float(n)
    count = 0
    while x > 1.0:
        x = math.log2(x)
        count += 1
    return count


class Bitstream:
    """Self-delimiting bit array with MSB-first reader/writer cursors."""

    def __init__(self, bits: bytearray | None = None, length: int = 0) -> None:
        self._buf = bytearray() if bits is None else bits
        self.length = length
        self._pos = 0

    def __len__(self) -> int:
        return self.length

    def _canonical(self) -> bytes:
        """Buffer truncated to length bits with dead tail bits zeroed."""
        nbytes = (self.length + 7) // 8
        out = bytearray(self._buf[:nbytes])
        tail = self.length % 8
        if nbytes and tail:
            out[-1] &= 0xFF << (8 - tail) & 0xFF
        return bytes(out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Bitstream)
            and self.length == other.length
            and self._canonical() == other._canonical()
        )

    # writing --------------------------------------------------------------

    def write_bits(self, value: int, width: int) -> None:
        if width < 0 or (width == 0 and value != 0) or value < 0 or (width and value >> width):
            raise ValidationError(f"cannot write value {value} in {width} bits")
        for i in range(width - 1, -1, -1):
            bit = (value >> i) & 1
            byte_i, off = divmod(self.length, 8)
            if off == 0:
                self._buf.append(0)
            if bit:
                self._buf[byte_i] |= 0x80 >> off
            self.length += 1

    def write_gamma(self, value: int) -> None:
        """Elias gamma code of a positive integer."""
        if value < 1:
            raise ValidationError("gamma code needs a positive integer")
        b = value.bit_length()
        self.write_bits(0, b - 1)
        self.write_bits(value, b)

    # reading --------------------------------------------------------------

    def read_bits(self, width: int) -> int:
        if self._pos + width > self.length:
            raise CorruptError("codeword truncated")
        out = 0
        for _ in range(width):
            byte_i, off = divmod(self._pos, 8)
            out = (out << 1) | ((self._buf[byte_i] >> (7 - off)) & 1)
            self._pos += 1
        return out

    def read_gamma(self) -> int:
        zeros = 0
        while True:
            bit = self.read_bits(1)
            if bit:
                break
            zeros += 1
            if zeros > 64:
                raise CorruptError("gamma envelope too long")
        return (1 << zeros) | self.read_bits(zeros)

    def bits_left(self) -> int:
        return self.length - self._pos

    def rewind(self) -> None:
        self._pos = 0

    # byte serialization -----------------------------------------------------

    def to_bytes(self) -> bytes:
        """Pad to a byte boundary; the final 3 bits store the pad width."""
        pad = (-(self.length + 3)) % 8
        out = Bitstream(bytearray(self._buf), self.length)
        out.write_bits(0, pad)
        out.write_bits(pad, 3)
        return bytes(out._buf)

    @staticmethod
    def from_bytes(raw: bytes) -> "Bitstream":
        total = 8 * len(raw)
        if total < 3:
            raise CorruptError("codeword file shorter than its pad trailer")
        pad = raw[-1] & 0b111
        payload = total - 3 - pad
        if payload < 0:
            raise CorruptError("pad trailer inconsistent with file size")
        return Bitstream(bytearray(raw), payload)


def gamma_length(value: int) -> int:
    return 2 * value.bit_length() - 1


def symbol_width(l: int) -> int:
    """ceil(log2 l): fixed cost of naming one symbol."""
    return max(1, (l - 1).bit_length())


def count_field_width(n: int, m: int) -> int:
    """Width of one count field; counts range over 0..n-m."""
    return (n - m).bit_length() if n > m else 0


def c_prime(m: int, n: int) -> int:
    """Fixed header bits: version + alphabet size + the two gamma envelopes."""
    return 16 + gamma_length(m + 1) + gamma_length(n + 1)


def header_length(l: int, m: int, n: int) -> int:
    return c_prime(m, n) + m * symbol_width(l) + l ** (m + 1) * count_field_width(n, m)


@dataclass(frozen=True)
class CodecParams:
    """Block order selection: a fixed m, or the (1/2 - eps)/log2(l) * log2(n) schedule."""

    m: int | None = None
    epsilon: float = 0.1

    def __post_init__(self) -> None:
        if self.m is not None and self.m < 0:
            raise ValidationError("codec order m must be non-negative")
        if self.m is None and not 0.0 < self.epsilon < 0.5:
            raise ValidationError("schedule epsilon must lie in (0, 0.5)")

    @staticmethod
    def fixed(m: int) -> "CodecParams":
        return CodecParams(m=m)

    @staticmethod
    def schedule(epsilon: float = 0.1) -> "CodecParams":
        return CodecParams(m=None, epsilon=epsilon)

    def resolve_m(self, n: int, l: int) -> int:
        if self.m is not None:
            return self.m
        if n < 2:
            return 0
        return int(((0.5 - self.epsilon) / math.log2(l)) * math.log2(n))


def _check_guard(l: int, m: int, n: int) -> None:
    # guard: l**(m+1) * ceil(log2(n+1)) header bits must stay below 2**26;
    # the cheap log test first so absurd header claims never materialize l**(m+1)
    if n > 1 << 31:
        raise GuardExceededError(f"sequence length {n} above the 2**31 cap")
    if (m + 1) * math.log2(l) > 40 or l ** (m + 1) * max(1, n.bit_length()) > HEADER_GUARD_BITS:
        raise GuardExceededError(
            f"count table of l**(m+1) fields at m = {m} exceeds the header guard"
        )


def encode(seq: SymbolSequence, params: CodecParams) -> Bitstream:
    """Encode a sequence into a self-delimiting codeword."""
    n = len(seq)
    l = seq.alphabet.size
    m = params.resolve_m(n, l)
    if n < m:
        raise TooShortError(f"cannot encode n = {n} < m = {m}")
    if l > 255:
        raise GuardExceededError("alphabet size above the 8-bit header field")
    _check_guard(l, m, n)
    desc = block_frequencies(seq, m)
    size = type_class_size(desc)
    bits = Bitstream()
    bits.write_bits(CODEC_VERSION, 8)
    bits.write_bits(l, 8)
    bits.write_gamma(m + 1)
    bits.write_gamma(n + 1)
    sw = symbol_width(l)
    for s in desc.prefix:
        bits.write_bits(s, sw)
    w = count_field_width(n, m)
    for c in desc.counts:
        bits.write_bits(c, w)
    if size > 1:
        index = rank_in_type_class(seq, m)
        bits.write_bits(index, (size - 1).bit_length())
    return bits


def decode(bits: Bitstream, alphabet: Alphabet | None = None) -> SymbolSequence:
    """Decode a codeword produced by encode; inverse on every valid input.

    The decoder recomputes the type-class size from the header and reads
    exactly ceil(log2 |T|) index bits; any inconsistency raises Corrupt.
    """
    bits.rewind()
    version = bits.read_bits(8)
    if version != CODEC_VERSION:
        raise CorruptError(f"unknown codec version {version}")
    l = bits.read_bits(8)
    if l < 2:
        raise CorruptError(f"alphabet size {l} out of range")
    m = bits.read_gamma() - 1
    n = bits.read_gamma() - 1
    if n < m:
        raise CorruptError("header claims n < m")
    _check_guard(l, m, n)
    if alphabet is None:
        alphabet = Alphabet(tuple(str(i) for i in range(l)))
    elif alphabet.size != l:
        raise CorruptError("alphabet size does not match the header")
    sw = symbol_width(l)
    prefix = tuple(bits.read_bits(sw) for _ in range(m))
    if any(s >= l for s in prefix):
        raise CorruptError("prefix symbol out of alphabet")
    w = count_field_width(n, m)
    counts = tuple(bits.read_bits(w) for _ in range(l ** (m + 1)))
    if sum(counts) != n - m:
        raise CorruptError("count table does not sum to n - m")
    desc = BlockFrequencyVector(alphabet=alphabet, order=m, prefix=prefix, counts=counts, n=n)
    size = type_class_size(desc)
    if size == 0:
        raise CorruptError("count table admits no sequence")
    index = 0
    if size > 1:
        index = bits.read_bits((size - 1).bit_length())
        if index >= size:
            raise CorruptError(f"index {index} outside the type class")
    if bits.bits_left():
        raise CorruptError(f"{bits.bits_left()} trailing bits after the codeword")
    return unrank(desc, index)


def codelength(seq: SymbolSequence, params: CodecParams) -> int:
    """Exact bit length of encode(seq, params) without materializing it."""
    n = len(seq)
    l = seq.alphabet.size
    m = params.resolve_m(n, l)
    if n < m:
        raise TooShortError(f"cannot encode n = {n} < m = {m}")
    _check_guard(l, m, n)
    size = type_class_size(block_frequencies(seq, m))
    index_bits = (size - 1).bit_length() if size > 1 else 0
    return header_length(l, m, n) + index_bits


def codelength_from_counts(desc: BlockFrequencyVector) -> int:
    """codelength of any member of the descriptor's type class."""
    size = type_class_size(desc)
    if size == 0:
        raise ValidationError("descriptor admits no sequence")
    index_bits = (size - 1).bit_length() if size > 1 else 0
    return header_length(desc.l, desc.order, desc.n) + index_bits


def paper_upper_bound(seq: SymbolSequence, params: CodecParams, model: MarkovModel) -> float:
    """Closed-form bound on codelength with this codec's concrete constants.

    C'(m,n) + log*(m) + l*K_sym + m*ceil(log2 l) + l**(m+1)*ceil(log2(n-m+1))
    - (n-m) sum_j f_j log2 Q_j, where Q is the model's conditional law on
    length-m windows.  Raises ZeroProbabilityBlock if an observed block has
    Q = 0 (the bound is +infinity there).
    """
    n = len(seq)
    l = seq.alphabet.size
    m = params.resolve_m(n, l)
    if n < m:
        raise TooShortError(f"cannot bound n = {n} < m = {m}")
    desc = block_frequencies(seq, m)
    ksym = symbol_width(l)
    constant = (
        c_prime(m, n)
        + log_star(m)
        + l * ksym
        + m * ksym
        + l ** (m + 1) * count_field_width(n, m)
    )
    loglik = 0.0
    window_cache: dict[int, np.ndarray] = {}
    for j, cnt in enumerate(desc.counts):
        if cnt == 0:
            continue
        ctx_code, x = divmod(j, l)
        if ctx_code not in window_cache:
            digits = []
            cc = ctx_code
            for _ in range(m):
                digits.append(cc % l)
                cc //= l
            window_cache[ctx_code] = model.conditional_given_window(tuple(reversed(digits)))
        qv = float(window_cache[ctx_code][x])
        if qv <= 0.0:
            raise ZeroProbabilityBlockError(
                f"block {j} observed {cnt} times but has zero model probability"
            )
        loglik += cnt * math.log2(qv)
    return constant - loglik
