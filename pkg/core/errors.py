"""
errors.py
---------
Exception hierarchy shared by the preserver modules. Verdicts such as a
failed verification or an empty decomposable search are returned as values;
the classes below are reserved for inputs that cannot be processed and for
structural failures the caller has to react to.

The CLI maps these classes onto its exit codes (see `core.cli`).

Author: infoyouth
Date: 2026-10-18
"""


class PreserverError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(PreserverError, ValueError):
    """Shapes or lengths do not match what the operation needs."""


class InvalidPermutationError(PreserverError, ValueError):
    """A permutation is not a bijection on its positions."""


class InvalidIndexSetError(PreserverError, ValueError):
    """An index set refers to factors outside {0, ..., k-1}."""


class InvalidPartitionError(PreserverError, ValueError):
    """Partition blocks overlap or do not cover every factor."""


class NonexistentFactorsError(PreserverError):
    """No factor matrix can satisfy the kernel condition ("nonexistent")."""


class NonexistentFormError(NonexistentFactorsError):
    """The bipartite vec-form was requested with 2 in {n1, n2}."""


class SynthesisFailedError(PreserverError):
    """Random synthesis exhausted its retry budget ("synthesis-failed")."""


class InvalidFactorsError(PreserverError):
    """Factors fail the kernel condition in strict mode ("invalid-factors")."""


class AmbiguousStructureError(PreserverError):
    """Subsystem votes disagree across base points ("ambiguous-structure")."""


class NotKroneckerError(PreserverError):
    """The regrouped map is not a Kronecker product ("not-kronecker")."""


class AssemblyError(PreserverError):
    """An assembled map disagrees with its structured origin."""


class BundleFormatError(PreserverError, ValueError):
    """A MatrixFile or MapBundle document is malformed."""
