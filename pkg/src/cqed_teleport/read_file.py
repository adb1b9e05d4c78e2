import json
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from cqed_teleport.exceptions import ResultWriteError, ScenarioConfigError
from cqed_teleport.scenario import ScenarioConfig


def read_json_file(file_name: Path) -> Any:
    """
    Reads and returns data from a JSON file.

    Raises:
        ScenarioConfigError: If the file cannot be read or parsed; parse
            errors carry ``path:line:column``.
    """
    try:
        with file_name.open("r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise ScenarioConfigError(f"Cannot read {file_name}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ScenarioConfigError(
            f"{file_name}:{e.lineno}:{e.colno}: {e.msg}"
        ) from e


def _describe(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in detail['loc']) or '<root>'}: {detail['msg']}"
        for detail in error.errors()
    )


def load_config(file_name: Path) -> ScenarioConfig:
    """
    Load a scenario file.

    Raises:
        ScenarioConfigError: Naming the file and every invalid field.
    """
    data = read_json_file(file_name)
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ScenarioConfigError(f"{file_name}: {_describe(e)}") from e


def dump_config(cfg: ScenarioConfig, file_name: Path) -> None:
    """Write a scenario so that ``load_config`` reproduces it."""
    try:
        with file_name.open("w", encoding="utf-8") as f:
            json.dump(cfg.model_dump(mode="json"), f, indent=2)
            f.write("\n")
    except OSError as e:
        raise ResultWriteError(f"Cannot write {file_name}: {e.strerror}") from e
