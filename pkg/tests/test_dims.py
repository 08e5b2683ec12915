import pytest

from zclink import SystemDims


def test_sample_counts():
    dims = SystemDims(n_symbols=50, m_tx=2, m_rx=2)
    assert dims.n_q == 101
    assert dims.n_tot == 101
    assert dims.m == 1
    assert dims.n_tot == dims.m * (dims.n_q - 1) + 1


def test_rate_ratio_counts():
    dims = SystemDims(n_symbols=4, m_tx=1, m_rx=3)
    assert dims.m == 3
    assert dims.n_q == 5
    assert dims.n_tot == 13
    assert dims.n_tot == dims.m * (dims.n_q - 1) + 1
    assert dims.rx_interval == pytest.approx(1.0 / 3.0)
    assert dims.tx_interval == pytest.approx(1.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_symbols=0, m_tx=1, m_rx=1),
        dict(n_symbols=4, m_tx=2, m_rx=3),  # non-integer ratio
        dict(n_symbols=4, m_tx=0, m_rx=2),
        dict(n_symbols=4, m_tx=1, m_rx=1, symbol_duration=0.0),
    ],
)
def test_invalid_dims_rejected(kwargs):
    with pytest.raises(ValueError):
        SystemDims(**kwargs)
