from datetime import datetime

from cqed_teleport._enums import ExperimentType
from cqed_teleport._logger import logger
from cqed_teleport._types import ResultSet
from cqed_teleport.exceptions import ScenarioConfigError
from cqed_teleport.factory import ExperimentFactory
from cqed_teleport.scenario import ScenarioConfig


def run_point(
    cfg: ScenarioConfig, experiment: str, sweep_index: int | None = None
) -> ResultSet:
    """Run one experiment at one configuration."""
    handler = ExperimentFactory.create_client(experiment, cfg, sweep_index)
    logger.debug(repr(handler))
    return handler.run()


def run_sweep(cfg: ScenarioConfig, experiment: str) -> ResultSet:
    """
    Run the experiment once per sweep value.

    Every row gains ``sweep_index`` and a column named after the swept
    parameter; rows stay ordered by sweep index, then trial.

    Raises:
        ScenarioConfigError: If the scenario has no sweep section or a swept
            value does not validate.
    """
    if cfg.sweep is None:
        raise ScenarioConfigError(f"Scenario '{cfg.name}' has no sweep section")
    parameter = cfg.sweep.parameter
    combined: ResultSet | None = None
    for index, value in enumerate(cfg.sweep.values):
        try:
            point_cfg = cfg.with_value(parameter, value)
        except ValueError as e:
            raise ScenarioConfigError(
                f"sweep value {parameter} = {value} is invalid: {e}"
            ) from e
        logger.info(f"Sweep point {index}: {parameter} = {value:g}")
        result = run_point(point_cfg, experiment, index)
        for row in result.rows:
            row["sweep_index"] = index
            row[parameter] = value
        if combined is None:
            combined = result
            combined.columns.extend(["sweep_index", parameter])
            combined.summary = {"sweep_points": len(cfg.sweep.values)}
        else:
            combined.rows.extend(result.rows)
            combined.series.extend(result.series)
    return combined


def run_scenario(
    cfg: ScenarioConfig, experiment: str | None = None
) -> ResultSet:
    """Run a scenario, sweeping when it has a sweep section."""
    script_start = datetime.now()
    experiment = ExperimentType(experiment or cfg.experiment)

    if cfg.sweep is None:
        results = run_point(cfg, experiment)
    else:
        results = run_sweep(cfg, experiment)

    finish_message = (
        f"Finished {experiment} scenario '{cfg.name}' "
        f"({len(results.rows)} rows) in {datetime.now() - script_start}"
    )
    logger.info(finish_message)
    return results
