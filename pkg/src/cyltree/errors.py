"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the CLI when it
emits an error object.
"""


class CyltreeError(Exception):
    code = "error"

    def to_json(self):
        return {"error": self.code, "message": str(self)}


class ParseError(CyltreeError):
    code = "ParseError"


class NotInFamily(CyltreeError):
    code = "NotInFamily"


class UnknownGenerator(CyltreeError):
    code = "UnknownGenerator"


class UnsupportedConjugator(CyltreeError):
    code = "UnsupportedConjugator"


class Unsupported(CyltreeError):
    """A backend lacks an optional capability (intersect, join, ...)."""

    code = "Unsupported"


class DisconnectedClass(CyltreeError):
    code = "DisconnectedClass"


class IllegalMove(CyltreeError):
    code = "IllegalMove"


class SmallFlagUnknown(CyltreeError):
    code = "SmallFlagUnknown"


class PreconditionNotDeclared(CyltreeError):
    code = "PreconditionNotDeclared"


class NotEquivariant(CyltreeError):
    code = "NotEquivariant"


class ImageNotCylinderOrPoint(CyltreeError):
    code = "ImageNotCylinderOrPoint"


class SandwichClosureUnverified(CyltreeError):
    code = "SandwichClosureUnverified"


class HypothesisNotDeclared(CyltreeError):
    code = "HypothesisNotDeclared"


class UnresolvedStabilizer(CyltreeError):
    code = "UnresolvedStabilizer"


class MissingVertexStabs(CyltreeError):
    code = "MissingVertexStabs"


class NotADomination(CyltreeError):
    code = "NotADomination"


class ImageOverlap(CyltreeError):
    code = "ImageOverlap"


# Errors that map to CLI exit code 2 (capability or precondition missing).
CAPABILITY_ERRORS = (
    ParseError,
    Unsupported,
    SmallFlagUnknown,
    PreconditionNotDeclared,
    SandwichClosureUnverified,
    HypothesisNotDeclared,
    UnresolvedStabilizer,
    MissingVertexStabs,
    UnsupportedConjugator,
    UnknownGenerator,
)
