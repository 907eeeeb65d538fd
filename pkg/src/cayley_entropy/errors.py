"""Exception hierarchy shared by every module of the package."""


class CayleyEntropyError(Exception):
    """Base class for all package errors."""


class ParseError(CayleyEntropyError, ValueError):
    """An input document is malformed."""


class ResourceLimitError(CayleyEntropyError):
    """A configured enumeration cap or digit budget would be exceeded."""


class NumericalFailure(CayleyEntropyError, ArithmeticError):
    """An iterative numerical routine did not converge."""


class BoundaryParameter(CayleyEntropyError, ValueError):
    """A template sits on a partition line where a defining inequality is tight."""


class InternalInconsistency(CayleyEntropyError, AssertionError):
    """Two independent routes to the same quantity disagree."""
