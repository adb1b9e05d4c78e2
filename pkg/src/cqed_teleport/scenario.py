from pathlib import Path
from typing import Annotated, Any, Literal, get_args

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)

from cqed_teleport import core, hamiltonians
from cqed_teleport._enums import (
    ChannelMode,
    ExperimentType,
    MeasurementMode,
    OutputFormat,
)
from cqed_teleport.config import DeviceParams, Frequency, IntegratorConfig, Rate

ComplexInput = float | tuple[float, float]
Seed = Annotated[int, Field(ge=0, lt=2**64)]

NORMALIZATION_ATOL = 1e-9


class DeviceConfig(BaseModel):
    """
    Device section of a scenario.

    Holds the ``DeviceParams`` fields plus the measured figures they can be
    derived from. ``kappa`` comes from ``quality_factor``, ``gamma1`` and
    ``gamma_phi`` from ``t1``/``t2`` and ``epsilon`` from the Rabi frequency
    wanted on qubit 1, unless set explicitly. The defaults describe a 5 GHz
    resonator with Q = 10⁶, qubits at 6 and 7 GHz coupled with g = 17 MHz,
    T1 = 7.3 µs, T2 = 500 ns and a 50 MHz Rabi drive.
    """

    model_config = ConfigDict(extra="forbid")

    omega_r: Frequency = 5000.0
    omega_a: tuple[Frequency, Frequency] = (6000.0, 7000.0)
    g: Rate = 17.0
    kappa: Rate | None = None
    gamma1: Rate | None = None
    gamma_phi: Rate | None = None
    epsilon: Rate | None = None
    omega_d: Frequency | None = None
    n_max: int = Field(default=2, ge=1)
    coupled: tuple[bool, bool] = (True, True)
    bias_shift: Frequency = 25.0

    quality_factor: float | None = Field(default=1e6, gt=0)
    t1: float | None = Field(default=7.3, gt=0)
    t2: float | None = Field(default=0.5, gt=0)
    rabi_frequency: float | None = Field(default=50.0, ge=0)

    @field_validator("omega_a", "coupled", mode="before")
    @classmethod
    def broadcast_per_qubit(cls, value):
        if isinstance(value, (int, float, bool)):
            return (value, value)
        return value

    @model_validator(mode="after")
    def check_coherence_times(self) -> "DeviceConfig":
        if (self.t1 is None) != (self.t2 is None):
            raise ValueError("t1 and t2 must be given together")
        if self.t1 is not None:
            hamiltonians.rates_from_coherence_times(self.t1, self.t2)
        return self

    def to_params(self) -> DeviceParams:
        """Resolve derived rates into a frozen ``DeviceParams``."""
        kappa = self.kappa
        if kappa is None:
            kappa = (
                0.0
                if self.quality_factor is None
                else hamiltonians.kappa_from_quality(
                    self.omega_r, self.quality_factor
                ).kappa
            )
        gamma1, gamma_phi = self.gamma1, self.gamma_phi
        if self.t1 is not None:
            rates = hamiltonians.rates_from_coherence_times(self.t1, self.t2)
            gamma1 = rates.gamma1 if gamma1 is None else gamma1
            gamma_phi = rates.gamma_phi if gamma_phi is None else gamma_phi

        params = DeviceParams(
            omega_r=self.omega_r,
            omega_a=self.omega_a,
            g=self.g,
            kappa=kappa,
            gamma1=gamma1 or 0.0,
            gamma_phi=gamma_phi or 0.0,
            epsilon=self.epsilon or 0.0,
            omega_d=self.omega_d,
            n_max=self.n_max,
            coupled=self.coupled,
            bias_shift=self.bias_shift,
        )
        if self.epsilon is not None or not self.rabi_frequency:
            return params
        g = hamiltonians.coupling(params, 0)
        if g == 0.0:
            return params
        delta_r = params.omega_r - hamiltonians.drive_frequency(params)
        return params.model_copy(
            update={"epsilon": self.rabi_frequency * abs(delta_r) / (2.0 * g)}
        )


class ProtocolConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: MeasurementMode = MeasurementMode.IDEAL
    noise: bool = False
    c0: ComplexInput | Literal["random"] = 1.0
    c1: ComplexInput = 0.0
    trials: int = Field(default=1, ge=1)
    seed: Seed | None = None
    all_branches: bool = False
    feed_forward: bool = True

    @model_validator(mode="after")
    def check_inputs(self) -> "ProtocolConfig":
        random_input = self.c0 == "random"
        if self.seed is None and (self.trials > 1 or random_input):
            raise ValueError("seed is required when trials > 1 or c0 is 'random'")
        if not random_input:
            norm = abs(_as_complex(self.c0)) ** 2 + abs(_as_complex(self.c1)) ** 2
            if abs(norm - 1.0) > NORMALIZATION_ATOL:
                raise ValueError(
                    f"|c0|² + |c1|² = {norm:.12f}, input coefficients must be normalized"
                )
        return self

    @property
    def base_seed(self) -> int:
        return self.seed or 0

    def coefficients(self, rng: np.random.Generator) -> tuple[complex, complex]:
        """Input amplitudes; a random input is drawn from ``rng``."""
        if self.c0 == "random":
            return core.random_qubit_state(rng)
        return _as_complex(self.c0), _as_complex(self.c1)


def _as_complex(value: ComplexInput) -> complex:
    if isinstance(value, tuple):
        return complex(*value)
    return complex(value)


class RabiConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    qubit: Literal[0, 1] = 0
    duration: float = Field(default=0.1, gt=0)
    samples: int = Field(default=201, ge=10)


class DispersiveCheckConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ratios: list[Annotated[float, Field(gt=0, lt=0.5)]] = Field(
        default_factory=lambda: [0.02, 0.05, 0.1], min_length=1
    )


class TomographyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    channel: ChannelMode = ChannelMode.JC_PULSE
    shots: int | None = Field(default=10_000, ge=1)


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    parameter: str = Field(pattern=r"^[A-Za-z_][\w.]*$")
    values: list[float] = Field(min_length=1)


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format: OutputFormat = OutputFormat.CSV
    path: Path | None = None
    snapshot_series: bool = False


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    experiment: ExperimentType = ExperimentType.TELEPORT
    device: DeviceConfig = Field(default_factory=DeviceConfig)
    protocol: ProtocolConfig = Field(default_factory=ProtocolConfig)
    rabi: RabiConfig = Field(default_factory=RabiConfig)
    dispersive: DispersiveCheckConfig = Field(default_factory=DispersiveCheckConfig)
    tomography: TomographyConfig = Field(default_factory=TomographyConfig)
    integrator: IntegratorConfig = Field(default_factory=IntegratorConfig)
    sweep: SweepConfig | None = None
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def check_sweep_parameter(self) -> "ScenarioConfig":
        if self.sweep is not None:
            check_numeric_path(self, self.sweep.parameter)
        return self

    def with_value(self, path: str, value: float) -> "ScenarioConfig":
        """
        A copy with the field at dotted ``path`` set and no sweep. A path to a
        per-qubit pair without an index sets both qubits.
        """
        data = self.model_dump(mode="json")
        data["sweep"] = None
        *parents, leaf = path.split(".")
        target = data
        for part in parents:
            target = target[int(part)] if isinstance(target, list) else target[part]
        if isinstance(target, list):
            target[int(leaf)] = value
        else:
            target[leaf] = value
        return ScenarioConfig.model_validate(data)

    def with_overrides(self, **updates: Any) -> "ScenarioConfig":
        """
        Apply ``section__field`` overrides such as ``protocol__seed``; None
        values are skipped.
        """
        data = self.model_dump(mode="json")
        for key, value in updates.items():
            if value is None:
                continue
            section, field = key.split("__")
            data[section][field] = value
        return ScenarioConfig.model_validate(data)


def _is_numeric(annotation: Any) -> bool:
    if annotation in (int, float):
        return True
    return any(
        _is_numeric(arg) for arg in get_args(annotation) if arg is not type(None)
    )


def check_numeric_path(cfg: BaseModel, path: str) -> None:
    """Raise ValueError unless ``path`` names a numeric field of ``cfg``."""
    node: Any = cfg
    annotation: Any = None
    for part in path.split("."):
        if isinstance(node, BaseModel):
            fields = type(node).model_fields
            if part not in fields:
                raise ValueError(f"sweep parameter '{path}': no field '{part}'")
            annotation = fields[part].annotation
            node = getattr(node, part)
        elif isinstance(node, tuple) and part.isdigit() and int(part) < len(node):
            annotation = get_args(annotation)[int(part)] if annotation else None
            node = node[int(part)]
        else:
            raise ValueError(f"sweep parameter '{path}': cannot resolve '{part}'")
    if isinstance(node, bool) or not (
        isinstance(node, (int, float)) or _is_numeric(annotation)
    ):
        raise ValueError(f"sweep parameter '{path}' is not a numeric field")
