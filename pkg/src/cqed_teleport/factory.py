import importlib
import pkgutil
from types import ModuleType

import cqed_teleport.experiments
from cqed_teleport.exceptions import TeleportValueError
from cqed_teleport.handlers import ExperimentHandler
from cqed_teleport.scenario import ScenarioConfig

EXPERIMENTS_DIR = cqed_teleport.experiments

EXPERIMENTS: dict[str, ModuleType] = {
    name.replace("_", "-"): importlib.import_module(
        f"{EXPERIMENTS_DIR.__name__}.{name}.handler"
    )
    for _, name, is_package in pkgutil.iter_modules(EXPERIMENTS_DIR.__path__)
    if is_package
}


class ExperimentFactory:
    @staticmethod
    def create_client(
        experiment: str, cfg: ScenarioConfig, sweep_index: int | None = None
    ) -> ExperimentHandler:
        try:
            return ExperimentHandler._registry[experiment](cfg, sweep_index)
        except KeyError:
            raise TeleportValueError(
                f"Invalid experiment '{experiment}', "
                f"must be one of {sorted(EXPERIMENTS)}"
            ) from None
