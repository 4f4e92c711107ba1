class ContractViolation(RuntimeError):
    """An input or oracle broke an invariant the computation relies on."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class InstanceTooLarge(ValueError):
    """The exhaustive search would exceed its declared size limit."""


class NonStabilization(RuntimeError):
    """A limit could not be certified from the available probes."""
