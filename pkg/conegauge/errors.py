"""Exception hierarchy shared by the library and the CLI."""
from typing import Optional

from .config import SCHEMA_VERSION


class ConeGaugeError(Exception):
    """Base error carrying a detail message and a process exit status."""

    status = 1

    def __init__(self, detail: str, status: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if status is not None:
            self.status = status

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "error": type(self).__name__,
            "detail": self.detail,
        }


class ConeSpecError(ConeGaugeError):
    """The cone description is degenerate or does not define a proper cone."""


class DimensionError(ConeGaugeError):
    """A vector does not match the ambient dimension of its cone."""


class MembershipError(ConeGaugeError):
    """A point lies outside the open cone or closure an operation requires."""


class UnsupportedConeError(ConeGaugeError):
    """The operation is not defined for this cone class."""


class FaceEnumerationError(ConeGaugeError):
    """Vertex enumeration was requested beyond the dimension cap."""


class SingularMapError(ConeGaugeError):
    """A linear primitive, derivative or sample matrix is numerically singular."""


class InvalidPayloadError(ConeGaugeError):
    """A horofunction payload or JSON document is malformed."""


class PreconditionError(ConeGaugeError):
    """An operation's precondition failed (e.g. map not gauge-reversing)."""


class ConvergenceError(ConeGaugeError):
    """An iterative limit did not settle within its grid."""

    def __init__(self, detail: str, defect: float = float("nan")):
        super().__init__(detail)
        self.defect = defect

    def to_dict(self) -> dict:
        payload = super().to_dict()
        payload["defect"] = self.defect
        return payload


class VerificationError(ConeGaugeError):
    """A numerical verification failed."""

    status = 2
