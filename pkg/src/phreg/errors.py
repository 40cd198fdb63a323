"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Malformed input: bad shapes, non-finite coordinates, out-of-range sizes."""


class DegenerateInputError(ValueError):
    """Input is structurally valid but the requested quantity is undefined on it
    (zero-variance abscissa, zero total edge length, coincident points)."""


class DegenerateTargetError(DegenerateInputError):
    """Target-space term of a loss is too close to a pole to divide by."""

    def __init__(self, subset_size: int, log_e_value: float):
        self.subset_size = subset_size
        self.log_e_value = log_e_value
        super().__init__(
            f"|log E(Y)| = {abs(log_e_value):.3e} at subset size {subset_size} "
            f"is inside the guard band; the ratio e_i is numerically unstable"
        )


class IngestionError(ValueError):
    """External point-cloud file is unreadable or too small."""
