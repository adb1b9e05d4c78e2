class TeleportError(Exception):
    pass


class TeleportValueError(TeleportError, ValueError):
    pass


class TeleportLayoutError(TeleportValueError):
    pass


class UnphysicalInputError(TeleportValueError):
    pass


class StateSupportError(TeleportError):
    pass


class SingularityError(TeleportError):
    pass


class TeleportConfigurationError(TeleportError):
    pass


class StepBudgetError(TeleportError):
    pass


class IntegrationQualityError(TeleportError):
    pass


class FitError(TeleportError):
    def __init__(self, message: str, rms_residual: float | None = None):
        super().__init__(message)
        self.rms_residual = rms_residual


class ScenarioConfigError(TeleportError):
    pass


class TrialError(TeleportError):
    def __init__(
        self, trial: int, cause: Exception, sweep_index: int | None = None
    ):
        where = (
            f"trial {trial}"
            if sweep_index is None
            else f"sweep point {sweep_index}, trial {trial}"
        )
        super().__init__(f"{where}: {cause}")
        self.trial = trial
        self.sweep_index = sweep_index
        self.cause = cause


class ResultWriteError(TeleportError):
    pass
