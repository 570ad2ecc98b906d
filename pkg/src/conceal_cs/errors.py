"""Exception hierarchy shared by every module in the package."""


class ConcealError(Exception):
    """Base class for all errors raised by conceal_cs."""


class ValidationError(ConcealError, ValueError):
    """Bad user input: shapes, parameters, malformed files."""


class DegenerateStateError(ConcealError):
    """A linear shift register was handed the all-zero state."""


class ShapeError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class EnergyOverflowError(ValidationError):
    """Plaintext energy exceeds the public energy cap."""

    def __init__(self, energy, e_max, block_index=None):
        self.energy = energy
        self.e_max = e_max
        self.block_index = block_index
        where = "" if block_index is None else f"block {block_index}: "
        super().__init__(f"{where}energy {energy:.6g} exceeds E_max {e_max:.6g}")


class MatrixReuseError(ConcealError):
    """A one-time sensing matrix was used for a second encryption."""


class SupportSizeError(ValidationError):
    """Requested more atoms than there are measurements."""


class InconsistentInputError(ConcealError):
    """A ciphertext value is not generated by any +-1 row over the plaintext."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class UndefinedCorrelationError(ConcealError):
    pass


class FormatError(ValidationError):
    """Structured parse failure for key, signal or ciphertext files."""
