"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A distribution or functional parameter is outside its domain."""


class DataError(ValueError):
    """Input data is empty, malformed, or outside the model support."""


class DegenerateSampleError(DataError):
    """A sample is too degenerate for the requested statistic (e.g. tied quantiles)."""


class NumericError(RuntimeError):
    """A numerical routine failed to converge or to normalize."""


class BreakdownSignal(Exception):
    """The dispersion-to-median quotient left its solvable range.

    ``direction`` is "explosion" when the quotient hit its upper limit
    (shape estimate escapes to +inf) and "implosion" when it fell to or
    below its lower limit (shape estimate collapses toward the boundary).
    """

    def __init__(self, direction, quotient=None, bounds=None):
        self.direction = direction
        self.quotient = quotient
        self.bounds = bounds
        msg = f"quotient breakdown ({direction})"
        if quotient is not None and bounds is not None:
            msg += f": q={quotient:.6g} outside ({bounds[0]:.6g}, {bounds[1]:.6g})"
        super().__init__(msg)
