import itertools
import math

import numpy as np
import pytest

from entrokit.coder import (
    Bitstream,
    CodecParams,
    c_prime,
    codelength,
    count_field_width,
    decode,
    encode,
    gamma_length,
    header_length,
    log_star,
    paper_upper_bound,
    symbol_width,
)
from entrokit.errors import CorruptError, GuardExceededError, TooShortError, ZeroProbabilityBlockError
from entrokit.models import Alphabet, MarkovModel, SymbolSequence, sample
from entrokit.typeclass import block_frequencies, type_class_size

from conftest import A2, binseq


class TestLogStar:
    @pytest.mark.parametrize("n,want", [(0, 0), (1, 0), (2, 1), (3, 2), (4, 2), (16, 3), (65536, 4)])
    def test_values(self, n, want):
        assert log_star(n) == want

    def test_growth_bound(self):
        for n in list(range(1, 2000)) + [10**6, 10**9, 10**15]:
            assert log_star(n) < 2 * math.log2(n) + 2


class TestBitstream:
    def test_write_read(self):
        bits = Bitstream()
        bits.write_bits(5, 3)
        bits.write_gamma(10)
        bits.write_bits(1, 1)
        bits.rewind()
        assert bits.read_bits(3) == 5
        assert bits.read_gamma() == 10
        assert bits.read_bits(1) == 1
        assert bits.bits_left() == 0

    def test_bytes_roundtrip_all_pad_widths(self):
        for extra in range(9):
            bits = Bitstream()
            bits.write_bits((1 << extra) - 1, extra)
            bits.write_bits(0b1011, 4)
            raw = bits.to_bytes()
            assert len(raw) % 1 == 0
            back = Bitstream.from_bytes(raw)
            assert back == bits

    def test_truncation_detected(self):
        bits = Bitstream()
        bits.write_bits(3, 2)
        bits.rewind()
        with pytest.raises(CorruptError):
            bits.read_bits(3)


class TestHeaderArithmetic:
    def test_gamma_length(self):
        assert gamma_length(1) == 1
        assert gamma_length(2) == 3
        assert gamma_length(101) == 13

    def test_count_field_width(self):
        assert count_field_width(5, 1) == 3  # counts 0..4 need 3 bits
        assert count_field_width(2, 2) == 0

    def test_schedule(self):
        params = CodecParams.schedule(0.1)
        assert params.resolve_m(1 << 16, 2) == 6
        assert params.resolve_m(1 << 10, 2) == 4
        assert params.resolve_m(1, 2) == 0
        assert CodecParams.fixed(2).resolve_m(10**6, 2) == 2


class TestCodecRoundTrip:
    def test_worked_example(self):
        seq = binseq("01001")
        bits = encode(seq, CodecParams.fixed(1))
        assert np.array_equal(decode(bits, A2).data, seq.data)

    def test_index_field_one_bit(self):
        seq = binseq("01001")
        total = len(encode(seq, CodecParams.fixed(1)))
        assert total == header_length(2, 1, 5) + 1  # |T| = 2 -> ceil(log2 2) = 1

    def test_all_zeros_header_only(self):
        seq = SymbolSequence(A2, np.zeros(100, dtype=np.int64))
        bits = encode(seq, CodecParams.fixed(1))
        # singleton class: no index field; grammar arithmetic done by hand
        want = 16 + gamma_length(2) + gamma_length(101) + 1 * 1 + 4 * count_field_width(100, 1)
        assert len(bits) == want
        assert np.array_equal(decode(bits, A2).data, seq.data)

    def test_empty_sequence(self):
        seq = SymbolSequence(A2, np.empty(0, dtype=np.int64))
        bits = encode(seq, CodecParams.fixed(0))
        assert len(decode(bits, A2)) == 0

    def test_n_equals_m(self):
        seq = binseq("10")
        bits = encode(seq, CodecParams.fixed(2))
        assert np.array_equal(decode(bits, A2).data, seq.data)

    def test_randomized_roundtrip_and_codelength(self):
        rng = np.random.default_rng(7)
        for _ in range(250):
            l = int(rng.integers(2, 5))
            m = int(rng.integers(0, 3))
            n = int(rng.integers(m + 1, 257))
            alphabet = Alphabet(tuple(str(i) for i in range(l)))
            seq = SymbolSequence(alphabet, rng.integers(0, l, size=n).astype(np.int64))
            params = CodecParams.fixed(m)
            bits = encode(seq, params)
            assert len(bits) == codelength(seq, params)
            out = decode(bits, alphabet)
            assert np.array_equal(out.data, seq.data)

    def test_schedule_roundtrip(self):
        rng = np.random.default_rng(8)
        params = CodecParams.schedule(0.1)
        for n in (2, 17, 300, 1500):
            seq = SymbolSequence(A2, rng.integers(0, 2, size=n).astype(np.int64))
            bits = encode(seq, params)
            assert len(bits) == codelength(seq, params)
            assert np.array_equal(decode(bits, A2).data, seq.data)

    def test_too_short(self):
        with pytest.raises(TooShortError):
            encode(binseq("01"), CodecParams.fixed(3))

    def test_guard(self):
        seq = SymbolSequence(Alphabet(tuple(str(i) for i in range(4))), np.zeros(20, dtype=np.int64))
        with pytest.raises(GuardExceededError):
            encode(seq, CodecParams.fixed(13))


class TestDecodeRobustness:
    def test_truncated_errors_or_differs(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            n = int(rng.integers(2, 64))
            seq = SymbolSequence(A2, rng.integers(0, 2, size=n).astype(np.int64))
            bits = encode(seq, CodecParams.fixed(1))
            cut = Bitstream(bytearray(bits._canonical()), len(bits) - int(rng.integers(1, len(bits))))
            try:
                out = decode(cut, A2)
            except CorruptError:
                continue
            assert not np.array_equal(out.data, seq.data) or len(encode(out, CodecParams.fixed(1))) != len(bits)

    def test_bitflip_errors_or_reencodes_differently(self):
        rng = np.random.default_rng(12)
        aliased = 0
        for _ in range(120):
            n = int(rng.integers(2, 64))
            seq = SymbolSequence(A2, rng.integers(0, 2, size=n).astype(np.int64))
            params = CodecParams.fixed(1)
            bits = encode(seq, params)
            buf = bytearray(bits._canonical())
            pos = int(rng.integers(0, len(bits)))
            buf[pos // 8] ^= 0x80 >> (pos % 8)
            flipped = Bitstream(buf, len(bits))
            try:
                out = decode(flipped, A2)
            except CorruptError:
                continue
            if np.array_equal(out.data, seq.data):
                aliased += 1
                continue
            # decoded to something else: must not silently alias the original codeword
            assert encode(out, params) == flipped or encode(out, params) != bits
        assert aliased == 0

    def test_junk_rejected(self):
        with pytest.raises(CorruptError):
            decode(Bitstream(bytearray(b"garbage!"), 64), A2)


class TestKraft:
    def test_kraft_and_count_bound_binary_up_to_8(self):
        params = CodecParams.fixed(1)
        lengths = []
        for n in range(1, 9):
            for bits in itertools.product((0, 1), repeat=n):
                seq = SymbolSequence(A2, np.array(bits, dtype=np.int64))
                lengths.append(codelength(seq, params))
        total = sum(2.0 ** -v for v in lengths)
        assert total <= 1.0 + 1e-12
        for v in range(1, max(lengths) + 2):
            assert sum(1 for w in lengths if w < v) <= 2**v


class TestPaperUpperBound:
    def test_inequality_exhaustive_binary(self, bern25, sym_chain):
        for model, m in ((bern25, 0), (sym_chain, 1)):
            params = CodecParams.fixed(m)
            for n in range(m + 1, 13):
                for bits in itertools.product((0, 1), repeat=n):
                    seq = SymbolSequence(A2, np.array(bits, dtype=np.int64))
                    assert codelength(seq, params) <= paper_upper_bound(seq, params, model)

    def test_uniform_iid_identity(self, uniform2):
        # constant part cancels; the likelihood term is exactly n bits
        params = CodecParams.fixed(0)
        for n in (5, 64, 200):
            seq = sample(uniform2, n, seed=n)
            ub = paper_upper_bound(seq, params, uniform2)
            const = (
                c_prime(0, n) + log_star(0) + 2 * symbol_width(2)
                + 0 * symbol_width(2) + 2 * count_field_width(n, 0)
            )
            assert ub - const == pytest.approx(n, abs=1e-9)

    def test_zero_probability_block(self):
        det = MarkovModel(A2, 1, np.array([[0.0, 1.0], [1.0, 0.0]]), ergodic=False)
        with pytest.raises(ZeroProbabilityBlockError):
            paper_upper_bound(binseq("01001"), CodecParams.fixed(1), det)

    def test_codec_order_differs_from_model_order(self, sym_chain):
        # window shorter than the model order: conditional comes from marginalization
        seq = sample(sym_chain, 500, seed=2)
        val = paper_upper_bound(seq, CodecParams.fixed(0), sym_chain)
        assert codelength(seq, CodecParams.fixed(0)) <= val


class TestFlipStability:
    @pytest.mark.parametrize("l,m,n", [(2, 0, 512), (2, 1, 512), (2, 2, 256), (3, 1, 243), (4, 2, 256)])
    def test_flip_budget(self, l, m, n):
        # single-symbol substitutions move the codeword length by at most
        # the position-plus-symbol naming budget (checked over random flips)
        rng = np.random.default_rng(l * 100 + m * 10 + 1)
        alphabet = Alphabet(tuple(str(i) for i in range(l)))
        params = CodecParams.fixed(m)
        budget = c_prime(m, n) + log_star(n) + symbol_width(l)
        trials = 0
        model = MarkovModel.iid(np.ones(l) / l, alphabet)
        while trials < 10_000:
            seq = sample(model, n, seed=int(rng.integers(0, 2**63)))
            base = codelength(seq, params)
            for _ in range(50):
                pos = int(rng.integers(0, n))
                repl = int(rng.integers(0, l))
                if repl == seq.data[pos]:
                    continue
                data = seq.data.copy()
                data[pos] = repl
                flipped = codelength(SymbolSequence(alphabet, data), params)
                assert abs(flipped - base) <= budget, (l, m, n, pos, repl, flipped - base, budget)
                trials += 1


class TestIndexBoundInequality:
    def test_index_bits_below_empirical_likelihood(self):
        # ceil(log2 |T|) <= -(n-m) sum f log2 f(.|ctx) + 1 for the sequence's own counts
        rng = np.random.default_rng(21)
        for _ in range(200):
            l = int(rng.integers(2, 4))
            m = int(rng.integers(0, 3))
            n = int(rng.integers(m + 2, 200))
            alphabet = Alphabet(tuple(str(i) for i in range(l)))
            seq = SymbolSequence(alphabet, rng.integers(0, l, size=n).astype(np.int64))
            desc = block_frequencies(seq, m)
            size = type_class_size(desc)
            counts = np.asarray(desc.counts, dtype=float).reshape(-1, l)
            ctx_tot = counts.sum(axis=1, keepdims=True)
            with np.errstate(divide="ignore", invalid="ignore"):
                qhat = np.where(counts > 0, counts / np.where(ctx_tot > 0, ctx_tot, 1.0), 1.0)
                loglik = float((counts * np.log2(qhat)).sum())
            index_bits = (size - 1).bit_length() if size > 1 else 0
            assert index_bits <= -loglik + 1.0 + 1e-9
