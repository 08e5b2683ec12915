"""Zero-crossing symbol alphabet, pattern construction, Gray coding, detection.

A symbol either places a zero-crossing in one of the ``m_rx`` sub-intervals
of its symbol period or places no crossing, so the alphabet has m_rx + 1
entries.  Symbol index j < m_rx means "crossing in sub-interval j + 1";
index m_rx means "no crossing".  Encoding chains segments through the last
sample of the previous segment (rho), starting from a pilot sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ZcAlphabet:
    """Symbol alphabet for one oversampling factor."""

    m_rx: int

    def __post_init__(self):
        if self.m_rx < 1:
            raise ValueError("m_rx must be >= 1")

    @property
    def cardinality(self) -> int:
        return self.m_rx + 1

    @property
    def no_crossing(self) -> int:
        """Index of the symbol without a zero-crossing."""
        return self.m_rx

    def symbols(self) -> range:
        return range(self.cardinality)


@dataclass(frozen=True)
class ZcCodebook:
    """Valid (rho, segment) codewords plus the pilot convention.

    The codeword list enumerates rho = +1 first, then rho = -1, each with
    symbols in index order; Hamming-fallback ties are broken by the lowest
    position in this list.
    """

    alphabet: ZcAlphabet
    pilot: int = 1

    def __post_init__(self):
        if self.pilot not in (1, -1):
            raise ValueError("pilot must be +1 or -1")

    @property
    def m_rx(self) -> int:
        return self.alphabet.m_rx

    def segment_for(self, symbol: int, rho_prev: int) -> np.ndarray:
        """Length-m_rx sign segment encoding ``symbol`` after a sample
        ``rho_prev``; flipping rho_prev negates the segment."""
        m = self.m_rx
        if not 0 <= symbol <= m:
            raise ValueError(f"symbol {symbol} outside alphabet of size {m + 1}")
        if rho_prev not in (1, -1):
            raise ValueError("rho_prev must be +1 or -1")
        seg = np.full(m, rho_prev, dtype=int)
        if symbol < m:
            # crossing in sub-interval symbol+1: the extended block
            # [rho, seg] flips sign between positions symbol and symbol+1
            seg[symbol:] = -rho_prev
        return seg

    def codewords(self) -> list[tuple[int, int, np.ndarray]]:
        """All 2*(m_rx + 1) valid codewords as (rho, symbol, [rho, segment])."""
        out = []
        for rho in (1, -1):
            for symbol in self.alphabet.symbols():
                block = np.concatenate(([rho], self.segment_for(symbol, rho)))
                out.append((rho, symbol, block))
        return out

    def decode_block(self, block: np.ndarray) -> int | None:
        """Backward-map one [rho, segment] block to its symbol, or None if
        the block is not a valid codeword."""
        flips = np.flatnonzero(block[1:] != block[:-1])
        if len(flips) == 0:
            return self.alphabet.no_crossing
        if len(flips) == 1:
            return int(flips[0])
        return None


def encode_pattern(symbols, codebook: ZcCodebook) -> np.ndarray:
    """Target sign pattern for a symbol sequence: pilot sample followed by
    the chained segments; length n_symbols * m_rx + 1."""
    symbols = np.asarray(symbols, dtype=int)
    m = codebook.m_rx
    out = np.empty(len(symbols) * m + 1, dtype=int)
    out[0] = codebook.pilot
    rho = codebook.pilot
    pos = 1
    for s in symbols:
        seg = codebook.segment_for(int(s), rho)
        out[pos : pos + m] = seg
        rho = int(seg[-1])
        pos += m
    return out


def crossing_count(pattern: np.ndarray) -> int:
    """Number of sign changes between consecutive samples."""
    pattern = np.asarray(pattern)
    return int(np.sum(pattern[1:] != pattern[:-1]))


def hamming_metric(a, b) -> int:
    """Number of differing positions between two sign sequences."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.sum(np.abs(a - b)) // 2)


def detect(z, codebook: ZcCodebook, chain_corrected: bool = False) -> np.ndarray:
    """Recover the symbol sequence from a received sign pattern.

    The pattern is split into overlapping blocks of m_rx + 1 samples whose
    first sample plays the role of the previous segment's last sample.
    Valid blocks are backward-mapped directly; invalid ones fall back to
    the valid codeword at minimum Hamming distance (ties: lowest codeword
    index).  By default the chaining sample is the raw received one; with
    ``chain_corrected`` the first sample of each block is replaced by the
    last sample of the previous block's winning codeword.
    """
    z = np.asarray(z, dtype=int)
    m = codebook.m_rx
    if (len(z) - 1) % m != 0:
        raise ValueError(f"pattern length {len(z)} is not n*m_rx + 1")
    n = (len(z) - 1) // m
    codewords = codebook.codewords()
    decided = np.empty(n, dtype=int)
    rho_hat = int(z[0])
    for i in range(n):
        block = z[i * m : (i + 1) * m + 1].copy()
        if chain_corrected:
            block[0] = rho_hat
        symbol = codebook.decode_block(block)
        if symbol is None:
            dists = [hamming_metric(block, cw) for _, _, cw in codewords]
            _, symbol, best = min(
                ((d, sym, cw) for d, (_, sym, cw) in zip(dists, codewords)),
                key=lambda item: item[0],
            )
            last = int(best[-1])
        else:
            last = int(block[-1])
        decided[i] = symbol
        rho_hat = last if chain_corrected else int(z[(i + 1) * m])
    return decided


def fm_segments(m_rx: int) -> np.ndarray:
    """Stateless forward-mapping segment table, shape (m_rx + 1, m_rx).

    Row j is the segment for symbol j: the single-flip segments anchored at
    a previous sample of +1, plus the constant all-ones segment for the
    no-crossing symbol.  Being independent of the actual previous sample,
    concatenation produces extra crossings at segment boundaries.
    """
    table = np.empty((m_rx + 1, m_rx), dtype=int)
    for j in range(m_rx):
        table[j] = 1
        table[j, j:] = -1
    table[m_rx] = 1
    return table


def fm_pattern(symbols, m_rx: int, pilot: int = 1) -> np.ndarray:
    """Forward-mapping baseline pattern: pilot plus fixed per-symbol
    segments, same length and rate as the zero-crossing pattern."""
    symbols = np.asarray(symbols, dtype=int)
    if symbols.size and (symbols.min() < 0 or symbols.max() > m_rx):
        raise ValueError("symbol outside the alphabet")
    table = fm_segments(m_rx)
    out = np.empty(len(symbols) * m_rx + 1, dtype=int)
    out[0] = pilot
    if len(symbols):
        out[1:] = table[symbols].reshape(-1)
    return out


def fm_detect(z, m_rx: int) -> np.ndarray:
    """Per-segment nearest-neighbour detector for the forward-mapping
    baseline (ties: lowest symbol index)."""
    z = np.asarray(z, dtype=int)
    if (len(z) - 1) % m_rx != 0:
        raise ValueError(f"pattern length {len(z)} is not n*m_rx + 1")
    n = (len(z) - 1) // m_rx
    table = fm_segments(m_rx)
    blocks = z[1:].reshape(n, m_rx)
    dists = np.sum(blocks[:, None, :] != table[None, :, :], axis=2)
    return np.argmin(dists, axis=1)


def _brgc(width: int) -> list[int]:
    """Binary-reflected Gray sequence of 2**width code values."""
    return [v ^ (v >> 1) for v in range(1 << width)]


# Bit-block -> symbol-pair map for the 3-bits-per-2-symbols scheme at
# m_rx = 2 (alphabet: 0 = crossing sub-interval 1, 1 = crossing
# sub-interval 2, 2 = no crossing).  Adjacent crossings differ in one bit.
_GRAY_M2_PAIRS: dict[int, tuple[int, int]] = {
    0b000: (2, 2),
    0b001: (2, 1),
    0b011: (2, 0),
    0b010: (1, 2),
    0b110: (1, 1),
    0b111: (0, 1),
    0b101: (0, 2),
    0b100: (0, 0),
}


@dataclass(frozen=True)
class GrayCoder:
    """Bijection between bit blocks and symbol blocks.

    For a power-of-two alphabet each symbol carries log2(m_rx + 1) bits in
    binary-reflected Gray order over (no crossing, crossing 1, ...,
    crossing m_rx).  For m_rx = 2 the alphabet has 3 symbols and 3 bits map
    to a pair of symbols; the pair table leaves one of the nine pairs
    unused, and the decoder resolves it to the nearest used pair.
    """

    m_rx: int
    block_symbols: int = field(init=False)
    block_bits: int = field(init=False)

    def __post_init__(self):
        r_in = self.m_rx + 1
        if r_in == 3:
            object.__setattr__(self, "block_symbols", 2)
            object.__setattr__(self, "block_bits", 3)
        elif r_in & (r_in - 1) == 0:
            object.__setattr__(self, "block_symbols", 1)
            object.__setattr__(self, "block_bits", r_in.bit_length() - 1)
        else:
            raise ValueError(
                f"no Gray scheme for alphabet size {r_in} (supported: 3 or powers of two)"
            )

    @property
    def bits_per_symbol(self) -> float:
        return self.block_bits / self.block_symbols

    @property
    def conversion_loss(self) -> float:
        """Rate given up versus log2(m_rx + 1) bits per symbol."""
        return math.log2(self.m_rx + 1) - self.bits_per_symbol

    def _symbol_order(self) -> list[int]:
        # no crossing at one end, then crossings in sub-interval order
        return [self.m_rx] + list(range(self.m_rx))

    def _tables(self):
        if self.m_rx == 2:
            enc = dict(_GRAY_M2_PAIRS)
            dec = {pair: bits for bits, pair in enc.items()}
            # the one unused pair resolves to the used pair differing in a
            # single symbol with the lowest bit label
            for a in range(3):
                for b in range(3):
                    if (a, b) not in dec:
                        bits = min(
                            code
                            for pair, code in sorted(dec.items())
                            if pair[0] == a or pair[1] == b
                        )
                        dec[(a, b)] = bits
            return enc, dec
        order = self._symbol_order()
        enc = {code: (order[rank],) for rank, code in enumerate(_brgc(self.block_bits))}
        dec = {pair: bits for bits, pair in enc.items()}
        return enc, dec

    def bits_to_symbols(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=int)
        if np.any((bits != 0) & (bits != 1)):
            raise ValueError("bits must be 0/1")
        if len(bits) % self.block_bits != 0:
            raise ValueError(
                f"bit count {len(bits)} not divisible by block size {self.block_bits}"
            )
        enc, _ = self._tables()
        out = []
        for blk in bits.reshape(-1, self.block_bits):
            code = int("".join(map(str, blk)), 2)
            out.extend(enc[code])
        return np.asarray(out, dtype=int)

    def symbols_to_bits(self, symbols) -> np.ndarray:
        symbols = np.asarray(symbols, dtype=int)
        if len(symbols) % self.block_symbols != 0:
            raise ValueError(
                f"symbol count {len(symbols)} not divisible by block size {self.block_symbols}"
            )
        _, dec = self._tables()
        out = []
        for blk in symbols.reshape(-1, self.block_symbols):
            code = dec[tuple(int(s) for s in blk)]
            out.extend(int(b) for b in format(code, f"0{self.block_bits}b"))
        return np.asarray(out, dtype=int)

    def symbol_labels(self) -> dict[int, str]:
        """Per-symbol bit labels for power-of-two alphabets."""
        if self.block_symbols != 1:
            raise ValueError("per-symbol labels only exist for power-of-two alphabets")
        enc, _ = self._tables()
        return {
            pair[0]: format(code, f"0{self.block_bits}b") for code, pair in enc.items()
        }
