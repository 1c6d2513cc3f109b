import pytest

from canlab import bitcodec
from canlab.frame import CanFrame


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jit kernels (when active) before any timed test."""
    frame = CanFrame.data_frame(0x244, bytes([0, 0, 0, 0x99, 0x99]))
    assert bitcodec.decode_bits(bitcodec.encode_bits(frame)) == frame
    bitcodec.unstuff_bits(bitcodec.stuff_bits([0, 1] * 8))
    bitcodec.crc15([1, 0, 1])
