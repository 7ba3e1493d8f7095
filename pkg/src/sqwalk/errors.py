"""Exception hierarchy shared by the walk, limit-law and oracle modules."""


class SqwalkError(Exception):
    """Base class for all errors raised by sqwalk."""


class NormalizationError(SqwalkError, ValueError):
    """An initial coin state does not have unit norm."""

    def __init__(self, deviation: float, tol: float):
        self.deviation = deviation
        self.tol = tol
        super().__init__(
            f"initial coin state is not normalized: |norm^2 - 1| = {deviation:.3e} > {tol:.1e}"
        )


class LatticeBoundError(SqwalkError):
    """A step would move amplitude beyond the pre-allocated lattice."""


class QuadratureError(SqwalkError):
    """Resolution doubling changed a quadrature result by more than the tolerance."""


class SpectralError(SqwalkError):
    """An eigen-decomposition failed its residual check."""


class BandMatchingError(SpectralError):
    """A band could not be followed across neighbouring momentum points."""


class OracleError(SpectralError):
    """Too many momentum samples were discarded while building the oracle."""
