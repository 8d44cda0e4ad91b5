"""Exception types shared across the package."""


class SafeblendError(Exception):
    """Base class for all package errors."""


class ModelError(SafeblendError):
    """A mechanical model violated one of its structural guarantees
    (e.g. numerically singular inertia matrix)."""


class ConstraintError(SafeblendError, ValueError):
    """Constraint geometry or calibration failure (e.g. an indefinite
    shape matrix, or a sampler that found no configuration inside the
    position constraint set).  Also a ValueError: bad geometry is a bad
    argument."""


class ScenarioError(SafeblendError):
    """Invalid scenario configuration or scenario file."""


class TrajectoryError(SafeblendError):
    """Malformed or unreadable trajectory file."""


class SimulationDiverged(SafeblendError):
    """A trajectory left the sane state range (|entry| > bound); this is
    treated as a configuration error, not a numerical event to recover from."""

    def __init__(self, step: int, t: float, bound: float):
        self.step = step
        self.t = t
        self.bound = bound
        super().__init__(
            f"state exceeded |entry| > {bound:g} at step {step} (t = {t:.6f} s)"
        )
