"""Exception hierarchy shared by all modules."""


class NumericError(RuntimeError):
    """Base class for numerical failures (harness exit code 3)."""


class NonConvergenceError(NumericError):
    pass


class DivergenceError(NumericError):
    pass


class PivotCollapseError(NumericError):
    def __init__(self, n, ratio):
        super().__init__(f"pivot collapse at n={n} (relative size {ratio})")
        self.n = n
        self.ratio = ratio


class BranchCutError(NumericError):
    pass


class BranchAmbiguityError(NumericError):
    pass


class WeightDecayError(NumericError):
    pass


class StepUnderflowError(NumericError):
    pass


class PoleFitError(NumericError):
    pass


class SeedAccuracyError(NumericError):
    pass


class ExtrapolationError(NumericError):
    pass


class RadiusError(ValueError):
    pass


class ConfigError(ValueError):
    pass
