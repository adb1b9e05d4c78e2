"""
Single-qubit rotations as rectangular control pulses.

xy rotations are microwave drives through the resonator at the qubit's
χ-shifted frequency, with the drive phase selecting the axis; z rotations
are bias pulses that shift the qubit frequency by ``bias_shift``. Integrated
pulses run in the frame rotating at the carrier for the qubit and for the
resonator, keeping the photon-number dependent shift χ a†a σ_z.
"""

import math
from dataclasses import dataclass

import numpy as np

from cqed_teleport import core, hamiltonians
from cqed_teleport._enums import Axis, BellLabel, PulseKind, PulseMode
from cqed_teleport._types import AxisSpec
from cqed_teleport.config import DeviceParams, IntegratorConfig
from cqed_teleport.core import (
    DensityMatrix,
    HilbertLayout,
    OperatorMatrix,
    QuantumState,
)
from cqed_teleport.dynamics import evolve_lindblad, evolve_unitary
from cqed_teleport.exceptions import TeleportConfigurationError, TeleportValueError
from cqed_teleport.hamiltonians import TWO_PI, CollapseSet

AREA_ATOL = 1e-9

AXIS_PHASES: dict[Axis, float] = {Axis.X: 0.0, Axis.Y: 0.5 * math.pi}

# Pulses realising each feed-forward unitary on qubit 2, in application order.
CORRECTION_AXES: dict[BellLabel, tuple[Axis, ...]] = {
    BellLabel.PSI_PLUS: (),
    BellLabel.PSI_MINUS: (Axis.Z,),
    BellLabel.PHI_PLUS: (Axis.X, Axis.Z),
    BellLabel.PHI_MINUS: (Axis.X,),
}


@dataclass(frozen=True, slots=True)
class PulseSpec:
    """
    A rectangular control pulse.

    ``amplitude`` is |Ω_R| for xy pulses and the bias shift δω for z pulses,
    both in linear MHz; the rotation angle is 2π·amplitude·duration.
    """

    kind: PulseKind
    angle: float
    duration: float
    amplitude: float
    axis_phase: float = 0.0
    carrier: float | None = None

    def __post_init__(self) -> None:
        kind = PulseKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.duration <= 0.0:
            raise TeleportValueError(
                f"Pulse duration must be positive, got {self.duration}"
            )
        _check_angle(self.angle)
        if self.amplitude <= 0.0:
            raise TeleportValueError(
                f"Pulse amplitude must be positive, got {self.amplitude}"
            )
        area = TWO_PI * self.amplitude * self.duration
        if abs(area - self.angle) > AREA_ATOL * max(1.0, self.angle):
            raise TeleportValueError(
                f"Pulse area 2π·{self.amplitude:.6g}·{self.duration:.6g} = "
                f"{area:.12g} does not match angle {self.angle:.12g}"
            )
        if kind == PulseKind.XY and self.carrier is None:
            raise TeleportValueError("An xy pulse needs a carrier frequency")

    @property
    def axis(self) -> AxisSpec:
        return Axis.Z if self.kind == PulseKind.Z else self.axis_phase

    def rescaled(self, factor: float) -> "PulseSpec":
        """Same rotation with ``factor`` times the amplitude."""
        if factor <= 0.0:
            raise TeleportValueError(f"Scale factor must be positive, got {factor}")
        return PulseSpec(
            kind=self.kind,
            angle=self.angle,
            duration=self.duration / factor,
            amplitude=self.amplitude * factor,
            axis_phase=self.axis_phase,
            carrier=self.carrier,
        )


def _check_angle(angle: float) -> None:
    if not 0.0 < angle <= TWO_PI + 1e-12:
        raise TeleportValueError(f"Rotation angle must lie in (0, 2π], got {angle}")


def _axis_matrix(axis: AxisSpec) -> np.ndarray:
    if axis == Axis.Z:
        return core.SIGMA_Z
    phase = AXIS_PHASES[Axis(axis)] if isinstance(axis, str) else float(axis)
    return math.cos(phase) * core.SIGMA_X + math.sin(phase) * core.SIGMA_Y


def ideal_rotation(axis: AxisSpec, angle: float) -> OperatorMatrix:
    """exp(-i·angle·(n̂·σ)/2) for x, y, z or an xy-plane axis at phase ``axis``."""
    generator = _axis_matrix(axis)
    return OperatorMatrix(
        core.qubit_layout(),
        math.cos(0.5 * angle) * core.IDENTITY_2
        - 1j * math.sin(0.5 * angle) * generator,
    )


def compile_rotation(
    axis: AxisSpec, angle: float, params: DeviceParams, qubit: int = 0
) -> PulseSpec:
    """
    Pulse realising a rotation on one qubit.

    xy pulses drive at ω̃_a with amplitude |Ω_R| = |2εg/Δ_r|; the sign of
    Ω_R is absorbed into the drive phase. z pulses shift the qubit by
    ``params.bias_shift``.

    Raises:
        TeleportValueError: If the angle lies outside (0, 2π].
        SingularityError: If the carrier is resonant with the resonator.
        TeleportConfigurationError: If the Rabi frequency or bias shift is zero.
    """
    _check_angle(angle)
    if axis == Axis.Z:
        if params.bias_shift <= 0.0:
            raise TeleportConfigurationError("z pulses need a non-zero bias shift")
        return PulseSpec(
            kind=PulseKind.Z,
            angle=angle,
            duration=angle / (TWO_PI * params.bias_shift),
            amplitude=params.bias_shift,
        )

    phase = AXIS_PHASES[Axis(axis)] if isinstance(axis, str) else float(axis)
    carrier = hamiltonians.dressed_qubit_frequency(params, qubit)
    rabi = abs(hamiltonians.rabi_frequency(params, qubit, omega_d=carrier))
    if rabi == 0.0:
        raise TeleportConfigurationError(
            f"Rabi frequency of {hamiltonians.qubit_label(qubit)} is zero; "
            "set a drive amplitude epsilon and couple the qubit"
        )
    return PulseSpec(
        kind=PulseKind.XY,
        angle=angle,
        duration=angle / (TWO_PI * rabi),
        amplitude=rabi,
        axis_phase=phase % TWO_PI,
        carrier=carrier,
    )


def control_hamiltonian(
    pulse: PulseSpec, qubit: int, params: DeviceParams, layout: HilbertLayout
) -> OperatorMatrix:
    """
    Dispersive Hamiltonian while ``pulse`` is on, in the frame rotating at
    ω̃_a for the qubit and for the resonator.

    Raises:
        TeleportConfigurationError: If the qubit is uncoupled.
    """
    hamiltonians.require_coupled(params, qubit)
    carrier = (
        pulse.carrier
        if pulse.kind == PulseKind.XY
        else hamiltonians.dressed_qubit_frequency(params, qubit)
    )
    rabi = pulse.amplitude if pulse.kind == PulseKind.XY else 0.0
    driven = params.model_copy(update={"omega_d": carrier})
    dispersive = hamiltonians.dispersive_hamiltonian(
        driven,
        qubit,
        layout,
        rabi=rabi,
        phase=pulse.axis_phase,
        photon_shift=True,
    ).hamiltonian
    hamiltonian = dispersive - hamiltonians.angular(
        params.omega_r - carrier
    ) * hamiltonians.number_operator(layout)
    if pulse.kind == PulseKind.Z:
        hamiltonian = hamiltonian + (0.5 * TWO_PI * pulse.amplitude) * (
            hamiltonians.qubit_operator(core.SIGMA_Z, layout, qubit)
        )
    return hamiltonian


def apply_pulse(
    state: QuantumState | DensityMatrix,
    qubit: int,
    pulse: PulseSpec,
    mode: PulseMode,
    params: DeviceParams,
    cfg: IntegratorConfig | None = None,
) -> QuantumState | DensityMatrix:
    """
    Apply a pulse to one qubit of a composite state.

    Ideal mode applies the rotation the pulse encodes; integrated mode
    propagates ``control_hamiltonian`` for the pulse duration.
    """
    match PulseMode(mode):
        case PulseMode.IDEAL:
            rotation = ideal_rotation(pulse.axis, pulse.angle)
            return core.apply_operator(
                core.embed(
                    rotation.elements,
                    state.layout,
                    hamiltonians.qubit_label(qubit),
                ),
                state,
            )
        case PulseMode.INTEGRATED:
            hamiltonian = control_hamiltonian(pulse, qubit, params, state.layout)
            span = (0.0, pulse.duration)
            if isinstance(state, QuantumState):
                return evolve_unitary(state, hamiltonian, span, cfg).final
            return evolve_lindblad(
                state, hamiltonian, CollapseSet(), span, cfg
            ).final


def correction_pulses(
    label: BellLabel, params: DeviceParams, qubit: int = 1
) -> tuple[PulseSpec, ...]:
    """π pulses realising the feed-forward unitary for one Bell outcome."""
    return tuple(
        compile_rotation(axis, math.pi, params, qubit)
        for axis in CORRECTION_AXES[BellLabel(label)]
    )
