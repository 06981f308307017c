"""Exception hierarchy shared by all optoarray modules."""


class OptoarrayError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameterError(OptoarrayError, ValueError):
    """A scalar argument lies outside its physical domain."""


class ValidationError(OptoarrayError):
    """A network description violates one or more invariants.

    ``errors`` holds ``(code, message)`` pairs, one per violated invariant, so
    callers can match on the code (e.g. ``"cascade-not-forward"``).
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{code}: {msg}" for code, msg in self.errors))

    @property
    def codes(self):
        return [code for code, _ in self.errors]


class NonPhysicalError(OptoarrayError):
    """A covariance matrix violates the uncertainty relation."""


class UnstableError(OptoarrayError):
    """The drift matrix is not Hurwitz, so no steady state exists."""

    code = "unstable-no-steady-state"

    def __init__(self, report, message=None):
        self.report = report
        super().__init__(message or f"{self.code}: max Re(eig A) = {report.max_real_eig:.6g}")


class TruncationError(OptoarrayError):
    """Fock-space truncation is over budget or has not converged."""


class ScenarioError(OptoarrayError):
    """A scenario file could not be parsed."""


class EliminatedModelUnstable(OptoarrayError):
    """The adiabatically eliminated mechanical model has no steady state."""

    code = "eliminated-model-unstable"
