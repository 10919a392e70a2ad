"""Exception hierarchy shared by all subpackages."""


class SMTError(Exception):
    """Base class for every error raised by this package."""


class DataError(SMTError):
    """Input data is malformed or inconsistent (CLI exit code 2)."""


# kern-core
class MalformedHeader(DataError):
    pass


class SpineMismatch(DataError):
    def __init__(self, line_no, expected, got):
        super().__init__(f"line {line_no}: expected {expected} cells, got {got}")
        self.line_no = line_no
        self.expected = expected
        self.got = got


class UnknownComponent(DataError):
    def __init__(self, symbol, line_no=None, char=None):
        where = f" (line {line_no})" if line_no is not None else ""
        what = f" unexpected {char!r}" if char is not None else ""
        super().__init__(f"cannot parse symbol {symbol!r}{where}:{what}")
        self.symbol = symbol
        self.line_no = line_no


class DanglingFragment(DataError):
    pass


class MixedSchemes(DataError):
    pass


class UnknownToken(DataError):
    pass


class IdOutOfRange(DataError):
    pass


# metrics
class EmptyReference(DataError):
    pass


class EmptyCorpus(DataError):
    pass


# synthgen
class EmptyPool(DataError):
    pass


class MeterMismatch(DataError):
    pass


class MergeConflict(DataError):
    pass


class TextureTooSmall(DataError):
    pass


class ExternalRendererUnavailable(SMTError):
    pass


# model
class ShapeError(SMTError):
    pass


class BadChannelCount(SMTError):
    pass


class PrefixTooLong(SMTError):
    pass


class NaNLoss(SMTError):
    pass


# curriculum
class WrongStage(SMTError):
    pass
