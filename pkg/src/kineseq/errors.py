"""Exception types raised across the engine."""


class KineseqError(Exception):
    """Base class for all engine errors."""


class DegenerateTriangle(KineseqError, ValueError):
    """A vertex coincides with one of its endpoints, so no angle is defined."""


class ParseError(KineseqError, ValueError):
    pass


class InconsistentScale(ParseError):
    """Position magnitudes differ between dataset rows."""


class EmptyDataset(KineseqError, ValueError):
    pass


class OutOfOrderFrame(KineseqError, ValueError):
    pass


class SpanOutOfRange(KineseqError, IndexError):
    pass


class UnknownLabel(KineseqError, KeyError):
    pass


class StreamFormatError(ParseError):
    pass


class ConfigError(KineseqError, ValueError):
    pass
