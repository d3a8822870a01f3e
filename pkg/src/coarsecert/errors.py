"""Exception taxonomy for coarsecert.

Every error raised by the library derives from CoarseCertError so that the
CLI can map library failures to exit code 2 (input/usage) uniformly, keeping
exit code 1 for honest verification failures.
"""

from __future__ import annotations


class CoarseCertError(Exception):
    """Base class for all coarsecert errors."""


# ---------------------------------------------------------------------------
# metric loading / queries
# ---------------------------------------------------------------------------

class MetricError(CoarseCertError):
    """A loaded distance function violates a metric axiom."""


class AsymmetryError(MetricError):
    def __init__(self, x: int, y: int, dxy: float, dyx: float):
        self.pair = (x, y)
        super().__init__(f"d({x},{y})={dxy!r} but d({y},{x})={dyx!r}")


class NegativeDistanceError(MetricError):
    def __init__(self, x: int, y: int, d: float):
        self.pair = (x, y)
        super().__init__(f"d({x},{y})={d!r} < 0")


class NonzeroDiagonalError(MetricError):
    def __init__(self, x: int, d: float):
        self.point = x
        super().__init__(f"d({x},{x})={d!r} != 0")


class ZeroOffDiagonalError(MetricError):
    def __init__(self, x: int, y: int):
        self.pair = (x, y)
        super().__init__(f"d({x},{y})=0 for distinct points {x} != {y}")


class TriangleViolationError(MetricError):
    def __init__(self, x: int, y: int, z: int, dxz: float, dxy: float, dyz: float):
        self.triple = (x, y, z)
        super().__init__(
            f"d({x},{z})={dxz!r} > d({x},{y})+d({y},{z})={dxy + dyz!r}"
        )


class DisconnectedError(CoarseCertError):
    def __init__(self, representative: int):
        self.representative = representative
        super().__init__(
            f"graph is disconnected; point {representative} is stranded"
        )


class MixedArityError(CoarseCertError):
    pass


class BadNormError(CoarseCertError):
    pass


class EmptySetError(CoarseCertError):
    pass


class InvalidInputError(CoarseCertError):
    """Malformed input outside the named metric-axiom violations."""


# ---------------------------------------------------------------------------
# simplex / partitions of unity
# ---------------------------------------------------------------------------

class NotACoverError(CoarseCertError):
    def __init__(self, point: int):
        self.point = point
        super().__init__(f"point {point} is not covered by any member")


class NotARetractionError(CoarseCertError):
    pass


class SupportEscapesError(CoarseCertError):
    pass


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

class BadModeError(CoarseCertError):
    pass


# ---------------------------------------------------------------------------
# covers / decomposition
# ---------------------------------------------------------------------------

class NotTwoSDisjointError(CoarseCertError):
    def __init__(self, level: int, witness: tuple):
        self.level = level
        self.witness = witness
        super().__init__(f"level {level} is not 2s-disjoint; witness {witness}")


class NotAGridError(CoarseCertError):
    pass


class ScaleTooSmallError(CoarseCertError):
    pass


class ConstructionFailedError(CoarseCertError):
    """A construction's mandatory post-hoc verification did not pass."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


# ---------------------------------------------------------------------------
# extension pipeline
# ---------------------------------------------------------------------------

class PreconditionViolatedError(CoarseCertError):
    def __init__(self, name: str, detail: str = ""):
        self.name = name
        super().__init__(f"precondition {name} violated" + (f": {detail}" if detail else ""))


class NotRDisjointError(CoarseCertError):
    def __init__(self, witness: tuple):
        self.witness = witness
        super().__init__(f"family is not R-disjoint; witness {witness}")


class BudgetTooSmallError(CoarseCertError):
    def __init__(self, budget: float, required: float):
        self.budget = budget
        self.required = required
        super().__init__(f"budget {budget!r} < 2/(R+1) = {required!r}")


class UnderflowError_(CoarseCertError):
    """A schedule budget fell below 1e-300 and is not representable."""

    def __init__(self, level: int, detail: str = ""):
        self.level = level
        msg = f"budget underflow at level {level}; consider a linear modulus"
        super().__init__(msg + (f" ({detail})" if detail else ""))


class BadEpsilonError(CoarseCertError):
    pass


class ScheduleMismatchError(CoarseCertError):
    def __init__(self, level: int, tree_radius: float, required: float):
        self.level = level
        self.tree_radius = tree_radius
        self.required = required
        super().__init__(
            f"tree radius R_{level}={tree_radius!r} below schedule "
            f"requirement {required!r}"
        )


class VerificationFailedError(CoarseCertError):
    """A mandatory post-construction verification failed (construction bug)."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)
