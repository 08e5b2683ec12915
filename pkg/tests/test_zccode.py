import itertools
import math

import numpy as np
import pytest

from zclink import (
    GrayCoder,
    ZcAlphabet,
    ZcCodebook,
    crossing_count,
    detect,
    encode_pattern,
    fm_detect,
    fm_pattern,
    fm_segments,
    hamming_metric,
)

# published Gray table for the 3-bit-per-2-symbol scheme at two receive
# samples per symbol: bit block -> 4-sample pattern, for either value of
# the preceding sample
GRAY_TABLE_M2 = {
    "000": {1: [1, 1, 1, 1], -1: [-1, -1, -1, -1]},
    "001": {1: [1, 1, 1, -1], -1: [-1, -1, -1, 1]},
    "011": {1: [1, 1, -1, -1], -1: [-1, -1, 1, 1]},
    "010": {1: [1, -1, -1, -1], -1: [-1, 1, 1, 1]},
    "110": {1: [1, -1, -1, 1], -1: [-1, 1, 1, -1]},
    "111": {1: [-1, -1, -1, 1], -1: [1, 1, 1, -1]},
    "101": {1: [-1, -1, -1, -1], -1: [1, 1, 1, 1]},
    "100": {1: [-1, -1, 1, 1], -1: [1, 1, -1, -1]},
}


def _codebook(m_rx=2, pilot=1):
    return ZcCodebook(ZcAlphabet(m_rx), pilot=pilot)


class TestAlphabet:
    @pytest.mark.parametrize("m_rx", [1, 2, 3, 7])
    def test_cardinality(self, m_rx):
        assert ZcAlphabet(m_rx).cardinality == m_rx + 1

    def test_no_crossing_is_last_index(self):
        assert ZcAlphabet(3).no_crossing == 3


class TestSegments:
    def test_no_crossing_segment_is_constant(self):
        cb = _codebook()
        assert list(cb.segment_for(2, 1)) == [1, 1]
        assert list(cb.segment_for(2, -1)) == [-1, -1]

    def test_crossing_position_encodes_symbol(self):
        cb = _codebook()
        # crossing in sub-interval 1: flip right after the chaining sample
        assert list(cb.segment_for(0, 1)) == [-1, -1]
        # crossing in sub-interval 2
        assert list(cb.segment_for(1, 1)) == [1, -1]

    @pytest.mark.parametrize("m_rx", [2, 3])
    def test_sign_symmetry(self, m_rx):
        cb = _codebook(m_rx)
        for symbol in range(m_rx + 1):
            assert np.array_equal(
                cb.segment_for(symbol, -1), -cb.segment_for(symbol, 1)
            )

    def test_symbol_out_of_range(self):
        with pytest.raises(ValueError):
            _codebook().segment_for(3, 1)

    @pytest.mark.parametrize("m_rx", [2, 3])
    def test_codeword_inventory(self, m_rx):
        cb = _codebook(m_rx)
        words = cb.codewords()
        assert len(words) == 2 * (m_rx + 1)
        blocks = {tuple(w) for _, _, w in words}
        assert len(blocks) == len(words)
        # backward mapping inverts every valid codeword
        for rho, symbol, block in words:
            assert block[0] == rho
            assert cb.decode_block(block) == symbol


class TestEncodePattern:
    def test_all_no_crossing_is_constant(self):
        cb = _codebook()
        assert np.array_equal(encode_pattern([2, 2, 2], cb), np.ones(7, dtype=int))

    def test_pilot_heads_the_pattern(self):
        cb = _codebook(pilot=-1)
        assert encode_pattern([2], cb)[0] == -1

    def test_gray_010_example(self):
        cb = _codebook()
        coder = GrayCoder(2)
        pattern = encode_pattern(coder.bits_to_symbols([0, 1, 0]), cb)
        assert list(pattern) == [1, 1, -1, -1, -1]

    def test_crossing_count_equals_crossing_symbols(self):
        cb = _codebook()
        rng = np.random.default_rng(3)
        for _ in range(50):
            x = rng.integers(0, 3, 20)
            pattern = encode_pattern(x, cb)
            assert crossing_count(pattern) == int(np.sum(x != 2))

    def test_sign_covariance_in_pilot(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            x = rng.integers(0, 4, 12)
            plus = encode_pattern(x, _codebook(3, pilot=1))
            minus = encode_pattern(x, _codebook(3, pilot=-1))
            assert np.array_equal(minus, -plus)

    def test_at_most_one_crossing_per_symbol(self):
        cb = _codebook(3)
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = rng.integers(0, 4, 10)
            pattern = encode_pattern(x, cb)
            for i in range(len(x)):
                block = pattern[i * 3 : (i + 1) * 3 + 1]
                assert crossing_count(block) <= 1


class TestGrayTable:
    def test_table_reproduced_cell_for_cell(self):
        coder = GrayCoder(2)
        cb = _codebook()
        for bits_str, by_rho in GRAY_TABLE_M2.items():
            bits = [int(c) for c in bits_str]
            symbols = coder.bits_to_symbols(bits)
            for rho, expected in by_rho.items():
                out = []
                prev = rho
                for s in symbols:
                    seg = cb.segment_for(int(s), prev)
                    out.extend(int(v) for v in seg)
                    prev = seg[-1]
                assert out == expected, f"bits {bits_str}, rho {rho}"

    def test_roundtrip_all_blocks(self):
        coder = GrayCoder(2)
        for bits in itertools.product((0, 1), repeat=3):
            symbols = coder.bits_to_symbols(list(bits))
            assert list(coder.symbols_to_bits(symbols)) == list(bits)

    def test_rate_and_conversion_loss(self):
        coder = GrayCoder(2)
        assert coder.bits_per_symbol == pytest.approx(1.5)
        assert coder.conversion_loss == pytest.approx(math.log2(3) - 1.5, abs=1e-12)
        assert coder.conversion_loss == pytest.approx(0.085, abs=1e-3)

    def test_power_of_two_per_symbol_labels(self):
        coder = GrayCoder(3)
        assert coder.block_symbols == 1
        assert coder.block_bits == 2
        labels = coder.symbol_labels()
        # no-crossing at one end of the reflected order
        assert labels[3] == "00"
        assert labels[0] == "01"
        assert labels[1] == "11"
        assert labels[2] == "10"

    def test_gray_adjacency_power_of_two(self):
        # codewords at adjacent crossing positions differ in one bit
        coder = GrayCoder(3)
        labels = coder.symbol_labels()

        def hdist(a, b):
            return sum(c1 != c2 for c1, c2 in zip(a, b))

        for j in range(2):
            assert hdist(labels[j], labels[j + 1]) == 1
        assert hdist(labels[3], labels[0]) == 1  # no-crossing next to crossing-1

    def test_unused_pair_decodes_deterministically(self):
        coder = GrayCoder(2)
        out1 = coder.symbols_to_bits([1, 0])
        out2 = coder.symbols_to_bits([1, 0])
        assert np.array_equal(out1, out2)
        assert len(out1) == 3

    def test_bad_lengths_rejected(self):
        coder = GrayCoder(2)
        with pytest.raises(ValueError):
            coder.bits_to_symbols([0, 1])
        with pytest.raises(ValueError):
            coder.symbols_to_bits([0])

    def test_unsupported_alphabet(self):
        with pytest.raises(ValueError):
            GrayCoder(4)  # cardinality 5


class TestHammingMetric:
    def test_counts_differing_positions(self):
        assert hamming_metric([1, 1, -1], [1, -1, -1]) == 1

    def test_identical_is_zero(self):
        a = np.array([1, -1, 1, 1])
        assert hamming_metric(a, a) == 0

    def test_negation_is_full_length(self):
        a = np.array([1, -1, 1, 1])
        assert hamming_metric(a, -a) == 4

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            hamming_metric([1, 1], [1, 1, -1])


def _all_sequences(cardinality, length):
    return itertools.product(range(cardinality), repeat=length)


class TestDetect:
    @pytest.mark.parametrize("m_rx", [2, 3])
    @pytest.mark.parametrize("pilot", [1, -1])
    def test_noiseless_roundtrip_exhaustive(self, m_rx, pilot):
        cb = _codebook(m_rx, pilot)
        lengths = range(1, 5 if m_rx == 3 else 7)
        for n in lengths:
            for x in _all_sequences(m_rx + 1, n):
                x = np.array(x)
                assert np.array_equal(detect(encode_pattern(x, cb), cb), x)

    @pytest.mark.parametrize("m_rx", [2, 3])
    def test_single_flip_matches_brute_force(self, m_rx):
        # flipping any single sample must yield exactly the brute-force
        # nearest-codeword decision in every block
        cb = _codebook(m_rx)
        codewords = cb.codewords()
        rng = np.random.default_rng(11)
        for _ in range(30):
            x = rng.integers(0, m_rx + 1, 6)
            clean = encode_pattern(x, cb)
            for flip in range(len(clean)):
                z = clean.copy()
                z[flip] = -z[flip]
                got = detect(z, cb)
                expected = []
                for i in range(len(x)):
                    block = z[i * m_rx : (i + 1) * m_rx + 1]
                    best = min(
                        range(len(codewords)),
                        key=lambda k: hamming_metric(block, codewords[k][2]),
                    )
                    expected.append(codewords[best][1])
                assert np.array_equal(got, expected), f"flip at {flip}"

    def test_tie_break_is_lowest_codeword_index(self):
        cb = _codebook(2)
        codewords = cb.codewords()
        # brute-force search for a tie among all +-1 blocks
        found = None
        for block in itertools.product((1, -1), repeat=4):
            dists = [hamming_metric(np.array(block[:3]), w) for _, _, w in codewords]
            if sorted(dists)[0] == sorted(dists)[1]:
                found = np.array(block[:3])
                break
        assert found is not None
        dists = [hamming_metric(found, w) for _, _, w in codewords]
        winner = dists.index(min(dists))
        z = np.concatenate([found, [1, 1]])  # pad to one full 2-symbol pattern
        got = detect(z, cb)
        assert got[0] == codewords[winner][1]

    def test_corrected_chaining_variant_runs(self):
        cb = _codebook(2)
        x = np.array([0, 1, 2, 1])
        clean = encode_pattern(x, cb)
        assert np.array_equal(detect(clean, cb, chain_corrected=True), x)

    def test_bad_length_rejected(self):
        with pytest.raises(ValueError):
            detect(np.ones(6, dtype=int), _codebook(2))


class TestForwardMappingBaseline:
    def test_segment_table(self):
        table = fm_segments(2)
        assert table.shape == (3, 2)
        assert list(table[0]) == [-1, -1]
        assert list(table[1]) == [1, -1]
        assert list(table[2]) == [1, 1]

    def test_segments_distinct(self):
        for m_rx in (2, 3):
            table = fm_segments(m_rx)
            assert len({tuple(r) for r in table}) == m_rx + 1

    def test_stateless_concatenation(self):
        x = [1, 1, 0]
        out = fm_pattern(x, 2)
        table = fm_segments(2)
        assert out[0] == 1
        assert np.array_equal(out[1:], np.concatenate([table[s] for s in x]))

    def test_more_crossings_than_zc(self):
        cb = _codebook(2)
        rng = np.random.default_rng(9)
        total_fm = total_zc = 0
        for _ in range(200):
            x = rng.integers(0, 3, 16)
            total_fm += crossing_count(fm_pattern(x, 2))
            total_zc += crossing_count(encode_pattern(x, cb))
        assert total_fm > total_zc

    def test_detect_inverts_noiseless(self):
        rng = np.random.default_rng(10)
        for m_rx in (2, 3):
            x = rng.integers(0, m_rx + 1, 12)
            assert np.array_equal(fm_detect(fm_pattern(x, m_rx), m_rx), x)

    def test_symbol_out_of_range(self):
        with pytest.raises(ValueError):
            fm_pattern([3], 2)
