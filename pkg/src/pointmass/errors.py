"""Exception types raised across the package."""


class PointMassError(Exception):
    """Base class for all errors raised by pointmass."""


class DuplicatePoint(PointMassError, ValueError):
    def __init__(self, point, first, second):
        super().__init__(f"point {point!r} repeated at positions {first} and {second}")
        self.point = point
        self.positions = (first, second)


class NotIncreasing(PointMassError, ValueError):
    def __init__(self, position):
        super().__init__(f"points not strictly increasing at position {position}")
        self.position = position


class DomainViolation(PointMassError, ValueError):
    pass


class NotPositiveDefinite(PointMassError, ArithmeticError):
    """A factorization pivot fell at or below ``eps_pd * maxdiag``.

    ``index`` is 1-based, counting pivots in filtration order.
    """

    def __init__(self, index, pivot=None):
        msg = f"non-positive pivot at index {index}"
        if pivot is not None:
            msg += f" (pivot={float(pivot):.3e})"
        super().__init__(msg)
        self.index = index
        self.pivot = pivot


class IntegerOverflow(PointMassError, OverflowError):
    pass


class SubsetMembershipUnverified(PointMassError):
    def __init__(self, indices):
        super().__init__(f"point-masses not certified finite-norm at indices {sorted(indices)}")
        self.indices = tuple(sorted(indices))


class NormDivergent(PointMassError, ArithmeticError):
    pass


class Disconnected(PointMassError, ValueError):
    pass


class NonpositiveConductance(PointMassError, ValueError):
    pass


class SelfLoop(PointMassError, ValueError):
    pass
