"""Exception types shared across the toolkit."""


class HHEError(Exception):
    """Base class for toolkit errors."""


class ParameterError(HHEError, ValueError):
    """Invalid parameters (bad k, N, preset, bus config ...)."""


class ContractError(HHEError, ValueError):
    """An operand violates an operation's precondition."""


class StateError(HHEError, RuntimeError):
    """Object in the wrong domain, basis or lifecycle state."""


class FormatError(HHEError, ValueError):
    """Malformed file, packet or program text."""

    def __init__(self, message, offset=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"offset {offset}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.offset = offset
        self.line = line


class FixedPointOverflow(HHEError, ArithmeticError):
    """A fixed-point value left the signed 29-bit range."""

    def __init__(self, stage, peak):
        super().__init__(f"fixed-point overflow at stage {stage} (|value| = {peak:.4g})")
        self.stage = stage
        self.peak = peak


class SimulationError(HHEError, RuntimeError):
    """Structural failure inside the accelerator simulator (e.g. deadlock)."""
