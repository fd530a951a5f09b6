"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: usage/parse problems exit 2,
mathematical negatives exit 1, and TheoryError exits 3 (an internal
invariant that should be impossible to violate was violated).
"""


class ChainWeightError(Exception):
    pass


class DimensionError(ChainWeightError):
    """Shapes of the operands do not line up (a usage error)."""


class RingMismatchError(ChainWeightError):
    """Operands live over different base rings."""


class PreconditionError(ChainWeightError):
    """A documented precondition of an operation does not hold."""


class DocumentError(ChainWeightError):
    """A serialized document is malformed or inconsistent."""


class TheoryError(ChainWeightError):
    """A certified fact failed to verify.

    Raising this means either the implementation or the mathematics it
    encodes is wrong; it must never be caught and ignored.
    """
