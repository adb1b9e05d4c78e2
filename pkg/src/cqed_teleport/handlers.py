from collections.abc import Callable
from typing import ClassVar

import numpy as np

from cqed_teleport import core
from cqed_teleport._types import ResultSet, Row, Rows
from cqed_teleport.config import DeviceParams
from cqed_teleport.exceptions import TeleportError, TrialError
from cqed_teleport.scenario import ScenarioConfig

TrialFunction = Callable[[int, int, np.random.Generator], Row]


class ExperimentHandler:
    """
    Base class for the experiments the CLI can run.

    Subclasses live in ``cqed_teleport.experiments.<name>.handler`` and are
    registered under the package name with underscores turned into dashes.
    """

    experiment = "experiment"
    columns: ClassVar[tuple[str, ...]] = ()
    series_columns: ClassVar[tuple[str, ...]] = ()
    _registry: ClassVar[dict[str, type["ExperimentHandler"]]] = {}

    @classmethod
    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        _experiment = cls.__module__.split(".")[-2].replace("_", "-")
        if _experiment in cls._registry:
            raise ValueError(f"Experiment handler '{_experiment}' already exists")
        cls.experiment = _experiment
        cls._registry[_experiment] = cls

    def __repr__(self) -> str:
        return f"{type(self).__name__} handler for the {self.experiment} experiment"

    def __init__(self, cfg: ScenarioConfig, sweep_index: int | None = None) -> None:
        self.cfg = cfg
        self.sweep_index = sweep_index

        self._params: DeviceParams | None = None

    @property
    def params(self) -> DeviceParams:
        """Device parameters with derived rates resolved."""
        if self._params is None:
            self._params = self.cfg.device.to_params()
        return self._params

    def _result(self, rows: Rows, **summary) -> ResultSet:
        return ResultSet(
            columns=list(self.columns),
            rows=rows,
            summary=summary,
            series_columns=list(self.series_columns),
        )

    def _run_trials(self, trial: TrialFunction) -> Rows:
        """
        Run ``protocol.trials`` trials, trial i seeded with ``seed + i``.

        Raises:
            TrialError: Wrapping the first trial that fails.
        """
        rows: Rows = []
        for index in range(self.cfg.protocol.trials):
            seed = self.cfg.protocol.base_seed + index
            try:
                rows.append(trial(index, seed, core.make_rng(seed)))
            except TrialError:
                raise
            except TeleportError as e:
                raise TrialError(index, e, self.sweep_index) from e
        return rows

    def run(self) -> ResultSet:
        """Run the experiment for this handler's scenario."""
        raise NotImplementedError
