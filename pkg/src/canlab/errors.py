"""Exception hierarchy shared across the laboratory."""


class CanLabError(Exception):
    """Base class for every error raised by this package."""


class FrameTextError(CanLabError, ValueError):
    """Malformed `ID#HEXDATA` frame text."""


class BadHexError(FrameTextError):
    """Frame text contains non-hexadecimal characters or no `#`."""


class OddDigitCountError(FrameTextError):
    """Data part of the frame text has an odd number of hex digits."""


class IdRangeError(FrameTextError):
    """Identifier does not fit in 11 bits."""


class DataLengthError(FrameTextError):
    """More than 8 data bytes in the frame text."""


class BitStreamError(CanLabError, ValueError):
    """Could not decode a bit stream back into a frame."""


class StuffingViolationError(BitStreamError):
    """Six identical consecutive bits inside the stuffed region."""


class CrcMismatchError(BitStreamError):
    """Received CRC sequence does not match the recomputed one."""


class TruncatedStreamError(BitStreamError):
    """Bit stream ended before the frame layout was complete."""


class DetachedNodeError(CanLabError):
    """Operation on a node handle that is no longer attached to the bus."""


class FrameMapError(CanLabError, ValueError):
    """Malformed or inconsistent frame-map file."""


class LogFormatError(CanLabError, ValueError):
    """Malformed traffic log line."""


class SessionError(CanLabError):
    """Session to the victim is closed or cannot be opened."""


class UnknownInterfaceError(SessionError):
    """Named bus interface does not exist on the session's end."""
