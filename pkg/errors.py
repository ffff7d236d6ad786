class LabError(Exception):
    exit_code = 1


class ConfigError(LabError):
    exit_code = 2


class PreconditionError(LabError, ValueError):
    exit_code = 3


class ConsistencyError(LabError, ArithmeticError):
    exit_code = 4


class DimensionMismatch(PreconditionError):
    pass


class WraparoundError(PreconditionError):
    def __init__(self, required_extent, extent):
        self.required_extent = required_extent
        self.extent = extent
        super().__init__(
            f"pointer shift would wrap around the grid: need extent >= {required_extent:.6g}, have {extent:.6g}"
        )


class UndefinedWeakValue(PreconditionError):
    def __init__(self, overlap):
        self.overlap = overlap
        super().__init__(f"weak value undefined: |<post|pre>| = {overlap:.3e}")


class ScanUndefined(PreconditionError):
    pass


class PostselectionError(PreconditionError):
    pass


class NotInformationallyComplete(PreconditionError):
    pass


class NotPureError(PreconditionError):
    pass


class NonUnitaryError(PreconditionError):
    def __init__(self, deviation):
        self.deviation = deviation
        super().__init__(f"matrix is not unitary: ||U^H U - 1|| = {deviation:.3e}")


class UnknownIdError(PreconditionError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DegenerateInput(PreconditionError):
    pass
