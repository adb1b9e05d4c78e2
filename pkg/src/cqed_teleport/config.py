from typing import Annotated

from pydantic import BaseModel, ConfigDict, Field, field_validator

from cqed_teleport._enums import QubitIndex

Frequency = Annotated[float, Field(gt=0)]
Rate = Annotated[float, Field(ge=0)]


class DeviceParams(BaseModel):
    """
    Physical parameters of the two-qubit + resonator device.

    Every frequency and rate is a linear frequency in MHz (the value quoted
    as X/2π); constructors convert to angular frequency once. Times are in
    microseconds. The coupling ``g``, relaxation rate ``gamma1`` and pure
    dephasing rate ``gamma_phi`` are shared by both qubits.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    omega_r: Frequency = 5000.0
    omega_a: tuple[Frequency, Frequency] = (6000.0, 7000.0)
    g: Rate = 17.0
    kappa: Rate = 0.0
    gamma1: Rate = 0.0
    gamma_phi: Rate = 0.0
    epsilon: Rate = 0.0
    omega_d: Frequency | None = None
    n_max: int = Field(default=2, ge=1)
    coupled: tuple[bool, bool] = (True, True)
    bias_shift: Frequency = 25.0

    @field_validator("omega_a", "coupled", mode="before")
    @classmethod
    def broadcast_per_qubit(cls, value):
        """Allow a single value to stand for both qubits."""
        if isinstance(value, (int, float, bool)):
            return (value, value)
        return value

    def qubit_frequency(self, qubit: int) -> float:
        return self.omega_a[QubitIndex(qubit)]

    def is_coupled(self, qubit: int) -> bool:
        return self.coupled[QubitIndex(qubit)]

    def closed(self) -> "DeviceParams":
        """The same device with every decoherence channel switched off."""
        return self.model_copy(
            update={"kappa": 0.0, "gamma1": 0.0, "gamma_phi": 0.0}
        )


class IntegratorConfig(BaseModel):
    """Fixed-step RK4 settings; ``dt`` of None picks 1/(steps_per_period·f_max)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dt: float | None = Field(default=None, gt=0)
    steps_per_period: int = Field(default=400, ge=4)
    max_steps: int = Field(default=2_000_000, ge=1)
    max_snapshots: int = Field(default=2000, ge=2)
