"""Exception taxonomy for redent.

Every error raised by the library derives from :class:`RedentError`. Errors
about invalid values also derive from :class:`ValueError` and numerical
failures from :class:`ArithmeticError`, so callers may catch either family.
"""

from __future__ import annotations


class RedentError(Exception):
    """Base class of all library errors."""


class InvalidMatrix(RedentError, ValueError):
    pass


class ShapeMismatch(InvalidMatrix):
    def __init__(self, shapes):
        self.shapes = tuple(shapes)
        super().__init__(f"matrices do not share a dimension: {self.shapes}")


class NotHermitian(InvalidMatrix):
    def __init__(self, skew: float):
        self.skew = skew
        super().__init__(f"matrix is not Hermitian (max |M - M*| = {skew:.3e})")


class NotPositiveDefinite(InvalidMatrix):
    def __init__(self, smallest: float, floor: float):
        self.smallest = smallest
        self.floor = floor
        super().__init__(
            f"smallest eigenvalue {smallest:.3e} is not above the floor {floor:.3e}"
        )


class NotAContraction(InvalidMatrix):
    def __init__(self, sigma_max: float):
        self.sigma_max = sigma_max
        super().__init__(f"largest singular value {sigma_max:.12g} exceeds 1")


class NotInvertible(InvalidMatrix):
    def __init__(self, sigma_min: float):
        self.sigma_min = sigma_min
        super().__init__(f"smallest singular value {sigma_min:.3e} is below the floor")


class NotUnitary(InvalidMatrix):
    def __init__(self, deviation: float):
        self.deviation = deviation
        super().__init__(f"matrix is not unitary (max |U*U - I| = {deviation:.3e})")


class DomainViolation(RedentError, ValueError):
    def __init__(self, value: float, guard: str):
        self.value = value
        self.guard = guard
        super().__init__(f"value {value!r} violates domain condition '{guard}'")


class ConvergenceFailure(RedentError, ArithmeticError):
    pass


class ImaginaryResidue(RedentError, ArithmeticError):
    def __init__(self, imaginary: float, scale: float):
        self.imaginary = imaginary
        self.scale = scale
        super().__init__(
            f"trace has imaginary part {imaginary:.3e} at scale {scale:.3e}"
        )


class QTooCloseToOne(RedentError, ValueError):
    def __init__(self, q: float):
        self.q = q
        super().__init__(f"q = {q!r} is too close to 1 for this form")


class TraceConstraintViolation(RedentError, ValueError):
    def __init__(self, trace: float, expected: float):
        self.trace = trace
        self.expected = expected
        super().__init__(f"trace {trace!r} differs from the required {expected!r}")


class PreconditionViolation(RedentError, ValueError):
    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        message = f"precondition '{condition}' does not hold"
        super().__init__(f"{message}: {detail}" if detail else message)


class HypothesisViolation(PreconditionViolation):
    pass


class CommutationViolation(RedentError, ValueError):
    def __init__(self, norm: float):
        self.norm = norm
        super().__init__(f"matrices do not commute (||XZ - ZX|| = {norm:.3e})")


class PartitionOfIdentityViolation(RedentError, ValueError):
    def __init__(self, deviation: float):
        self.deviation = deviation
        super().__init__(
            f"sum of H_j* H_j deviates from the identity by {deviation:.3e}"
        )


class OrderingViolation(RedentError, ValueError):
    def __init__(self, failed: list[str]):
        self.failed = list(failed)
        super().__init__(f"matrix ordering violated: {', '.join(self.failed)}")


class ParameterViolation(RedentError, ValueError):
    pass


class InvalidSpec(RedentError, ValueError):
    pass


class OptimizerDidNotConverge(RedentError, ArithmeticError):
    pass


class ConfigError(RedentError, ValueError):
    pass


class FingerprintVersionMismatch(RedentError, ValueError):
    def __init__(self, fingerprint: str, reason: str):
        self.fingerprint = fingerprint
        super().__init__(f"cannot regenerate '{fingerprint}': {reason}")


class ReportWriteError(RedentError, OSError):
    pass
