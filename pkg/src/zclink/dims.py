"""Block-size bookkeeping for the oversampled link."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SystemDims:
    """Sample-count bookkeeping for one transmit block.

    A block carries ``n_symbols`` symbols of duration ``symbol_duration``
    seconds each.  The transmitter emits ``m_tx`` samples per symbol, the
    receiver takes ``m_rx`` samples per symbol, and the rate ratio
    ``m = m_rx / m_tx`` must be a positive integer so that every transmit
    sample instant coincides with a receive sample instant.
    """

    n_symbols: int
    m_tx: int
    m_rx: int
    symbol_duration: float = 1.0

    def __post_init__(self):
        if self.n_symbols < 1:
            raise ValueError(f"n_symbols must be >= 1, got {self.n_symbols}")
        if self.m_tx < 1 or self.m_rx < 1:
            raise ValueError("m_tx and m_rx must be >= 1")
        if self.m_rx % self.m_tx != 0:
            raise ValueError(
                f"m_rx ({self.m_rx}) must be an integer multiple of m_tx ({self.m_tx})"
            )
        if not self.symbol_duration > 0:
            raise ValueError("symbol_duration must be positive")

    @property
    def m(self) -> int:
        """Receiver/transmitter rate ratio."""
        return self.m_rx // self.m_tx

    @property
    def n_q(self) -> int:
        """Number of transmit samples in a block."""
        return self.m_tx * self.n_symbols + 1

    @property
    def n_tot(self) -> int:
        """Number of receive samples in a block."""
        return self.m_rx * self.n_symbols + 1

    @property
    def rx_interval(self) -> float:
        """Receive-side sample spacing in seconds."""
        return self.symbol_duration / self.m_rx

    @property
    def tx_interval(self) -> float:
        """Transmit-side sample spacing in seconds."""
        return self.symbol_duration / self.m_tx
