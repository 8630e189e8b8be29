"""Exception types shared across the library.

The split matters for scripting: spec-file problems, structural violations
and failed compactness hypotheses map to distinct CLI exit codes.
"""


class ModelError(ValueError):
    """A structural contract was violated (grid mismatch, bad exponent, misaligned shift)."""


class SpecFileError(ValueError):
    """A family/space spec document failed to parse."""


class HypothesisError(RuntimeError):
    """A compactness hypothesis could not be certified at the working resolution.

    ``criterion`` names the failing modulus: ``"vanishing-at-infinity"`` when no
    truncation box keeps the tail below budget, ``"equicontinuity"`` when no
    admissible mesh keeps the translation modulus below budget.
    """

    def __init__(self, criterion: str, message: str):
        super().__init__(message)
        self.criterion = criterion
