"""
Teleportation of a charge-qubit state to a second qubit through a shared
resonator.

Qubit 2 and the resonator are entangled by a resonant π/2 exchange pulse,
qubit 1 and the resonator are measured jointly in a Bell basis, and a Pauli
correction on qubit 2 completes the transfer. Protocol states use the
(qubit1, resonator, qubit2) layout. Writing the joint state in the Bell
basis of qubit 1 and the resonator gives

    ½[Ψ+ (C0|↓⟩ + C1|↑⟩) + Ψ- (C0|↓⟩ - C1|↑⟩)
      + Φ+ (C0|↑⟩ - C1|↓⟩) + Φ- (C0|↑⟩ + C1|↓⟩)]

on qubit 2, hence the corrections I, σ_z, σ_z·σ_x and σ_x.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from cqed_teleport import core, hamiltonians, pulses
from cqed_teleport._enums import (
    BellLabel,
    ChannelMode,
    MeasurementMode,
    Pauli,
    PulseMode,
    Subsystem,
)
from cqed_teleport._logger import logger
from cqed_teleport._types import PauliPair, ShotCount
from cqed_teleport.config import DeviceParams, IntegratorConfig
from cqed_teleport.core import (
    DensityMatrix,
    HilbertLayout,
    OperatorMatrix,
    QuantumState,
)
from cqed_teleport.dynamics import (
    evolve_lindblad,
    jc_pulse,
    jc_pulse_duration,
    jc_unitary,
)
from cqed_teleport.exceptions import (
    StateSupportError,
    TeleportLayoutError,
    TeleportValueError,
)
from cqed_teleport.hamiltonians import CollapseSet

NORMALIZATION_ATOL = 1e-9
IDEAL_LEAKAGE_TOLERANCE = 1e-8
NOISY_LEAKAGE_TOLERANCE = 1e-3
CHANNEL_ANGLE = 0.5 * math.pi
BELL_ROTATION_ANGLE = 0.5 * math.pi

BELL_ORDER: tuple[BellLabel, ...] = (
    BellLabel.PSI_PLUS,
    BellLabel.PSI_MINUS,
    BellLabel.PHI_PLUS,
    BellLabel.PHI_MINUS,
)

PAULI_PAIRS: tuple[PauliPair, ...] = tuple(itertools.product(Pauli, repeat=2))

_FEED_FORWARD: dict[BellLabel, np.ndarray] = {
    BellLabel.PSI_PLUS: core.IDENTITY_2,
    BellLabel.PSI_MINUS: core.SIGMA_Z,
    BellLabel.PHI_PLUS: core.SIGMA_Z @ core.SIGMA_X,
    BellLabel.PHI_MINUS: core.SIGMA_X,
}


@dataclass(frozen=True, slots=True)
class BellOutcome:
    label: BellLabel
    probability: float
    collapsed_state: QuantumState | DensityMatrix

    def __post_init__(self) -> None:
        if not -1e-12 <= self.probability <= 1.0 + 1e-12:
            raise TeleportValueError(
                f"Outcome probability {self.probability} lies outside [0, 1]"
            )


@dataclass(frozen=True, slots=True)
class TeleportResult:
    """
    Outcome of one protocol run.

    ``outcome_probabilities`` follow ``BELL_ORDER``. ``branch_fidelities``
    and ``expected_fidelity`` (Σ p_i F_i) are only filled when every branch
    was evaluated.
    """

    outcome: BellLabel
    fidelity: float
    outcome_probabilities: tuple[float, float, float, float]
    protocol_duration: float
    noise_enabled: bool
    branch_fidelities: dict[BellLabel, float] | None = None
    expected_fidelity: float | None = None

    def __post_init__(self) -> None:
        total = math.fsum(self.outcome_probabilities)
        if abs(total - 1.0) > 1e-9:
            raise TeleportValueError(
                f"Outcome probabilities sum to {total:.12f}, not 1"
            )


class BellBranch(NamedTuple):
    label: BellLabel
    state: QuantumState
    weight: float


@dataclass(frozen=True, slots=True)
class TomographyRecord:
    """
    Pauli-pair data of a two-subsystem state.

    Exact expectations go in ``expectations``; sampled settings go in
    ``counts`` as (outcomes with eigenvalue +1, shots) and take precedence.
    """

    layout: HilbertLayout
    expectations: dict[PauliPair, float] = field(default_factory=dict)
    counts: dict[PauliPair, ShotCount] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(set(self.expectations) | set(self.counts))

    def expectation(self, pair: PauliPair) -> float:
        if pair in self.counts:
            n_plus, shots = self.counts[pair]
            return (2.0 * n_plus - shots) / shots
        return self.expectations[pair]


def prepare_input(C0: complex, C1: complex) -> QuantumState:
    """C0|↓⟩ + C1|↑⟩ on qubit 1; coefficients are never renormalized."""
    norm = abs(C0) ** 2 + abs(C1) ** 2
    if abs(norm - 1.0) > NORMALIZATION_ATOL:
        raise TeleportValueError(
            f"|C0|² + |C1|² = {norm:.12f}, input coefficients must be normalized"
        )
    return QuantumState(core.qubit_layout(Subsystem.QUBIT1), [C0, C1])


def channel_layout(n_max: int) -> HilbertLayout:
    return core.protocol_layout(n_max).subset([1, 2])


def prepare_channel(
    mode: ChannelMode,
    params: DeviceParams,
    pulse_mode: PulseMode = PulseMode.INTEGRATED,
    cfg: IntegratorConfig | None = None,
) -> QuantumState:
    """
    The resonator-qubit 2 channel (|0⟩|↑⟩ - i|1⟩|↓⟩)/√2.

    ``jc_pulse`` mode starts from |0⟩|↑⟩ and applies a π/2 exchange pulse
    on qubit 2, in ``pulse_mode``.
    """
    layout = channel_layout(params.n_max)
    match ChannelMode(mode):
        case ChannelMode.IDEAL:
            amplitudes = np.zeros(layout.dimension, dtype=complex)
            amplitudes[np.ravel_multi_index((0, core.UP), layout.dims)] = 1.0
            amplitudes[np.ravel_multi_index((1, core.DOWN), layout.dims)] = -1j
            return QuantumState(layout, amplitudes / math.sqrt(2.0))
        case ChannelMode.JC_PULSE:
            start = core.basis_state(layout, (0, core.UP))
            return jc_pulse(start, 1, CHANNEL_ANGLE, params, pulse_mode, cfg)


def _require_bell_layout(layout: HilbertLayout) -> None:
    if layout.labels is None or layout.labels[:2] != (
        Subsystem.QUBIT1,
        Subsystem.RESONATOR,
    ):
        raise TeleportLayoutError(
            f"Bell measurements need a layout starting with (qubit1, resonator), "
            f"got {layout.labels}"
        )


def bell_states(levels: int) -> dict[BellLabel, np.ndarray]:
    """Bell vectors of qubit 1 and a resonator with ``levels`` Fock states."""
    pair = (2, levels)

    def ket(qubit: int, photons: int) -> np.ndarray:
        vector = np.zeros(2 * levels, dtype=complex)
        vector[np.ravel_multi_index((qubit, photons), pair)] = 1.0
        return vector

    down_one, up_zero = ket(core.DOWN, 1), ket(core.UP, 0)
    down_zero, up_one = ket(core.DOWN, 0), ket(core.UP, 1)
    root = math.sqrt(2.0)
    return {
        BellLabel.PSI_PLUS: (-1j * down_one + up_zero) / root,
        BellLabel.PSI_MINUS: (-1j * down_one - up_zero) / root,
        BellLabel.PHI_PLUS: (down_zero + 1j * up_one) / root,
        BellLabel.PHI_MINUS: (down_zero - 1j * up_one) / root,
    }


def _pair_projector(vector: np.ndarray, layout: HilbertLayout) -> OperatorMatrix:
    rest = layout.dimension // vector.size
    return OperatorMatrix(
        layout,
        np.kron(np.outer(vector, vector.conj()), np.eye(rest)),
        hermitian_flag=True,
    )


def bell_projectors(layout: HilbertLayout) -> list[OperatorMatrix]:
    """|B⟩⟨B| ⊗ I for every Bell state, in ``BELL_ORDER``."""
    _require_bell_layout(layout)
    vectors = bell_states(layout.dims[1])
    return [_pair_projector(vectors[label], layout) for label in BELL_ORDER]


def rotated_bell_projectors(layout: HilbertLayout) -> list[OperatorMatrix]:
    """
    Bell projectors after a π/2 exchange pulse on qubit 1.

    The pulse maps Ψ+ to -i|↓,1⟩ and Ψ- to -|↑,0⟩, which are read out in the
    computational basis; the Φ sector is completed projectively as U P U†.
    """
    _require_bell_layout(layout)
    unitary = jc_unitary(layout, 0, BELL_ROTATION_ANGLE).elements
    projectors = [
        OperatorMatrix(
            layout,
            unitary @ projector.elements @ unitary.conj().T,
            hermitian_flag=True,
        )
        for projector in bell_projectors(layout)
    ]
    levels = layout.dims[1]
    computational = {
        BellLabel.PSI_PLUS: (core.DOWN, 1),
        BellLabel.PSI_MINUS: (core.UP, 0),
    }
    for label, indices in computational.items():
        vector = np.zeros(2 * levels, dtype=complex)
        vector[np.ravel_multi_index(indices, (2, levels))] = 1.0
        projectors[BELL_ORDER.index(label)] = _pair_projector(vector, layout)
    return projectors


def resonator_support(layout: HilbertLayout) -> OperatorMatrix:
    """Projector onto resonator states |0⟩ and |1⟩."""
    levels = layout.dims[layout.index(Subsystem.RESONATOR)]
    local = np.diag([1.0 if n <= 1 else 0.0 for n in range(levels)])
    return core.embed(local, layout, Subsystem.RESONATOR)


def _restrict(
    state: QuantumState | DensityMatrix,
    support: OperatorMatrix,
    tolerance: float,
) -> QuantumState | DensityMatrix:
    """Project onto ``support`` and renormalize if the lost weight is tolerable."""
    kept = core.expectation(state, support).real
    leakage = 1.0 - kept
    if leakage > tolerance:
        raise StateSupportError(
            f"Population {leakage:.3e} lies outside the resonator's "
            f"{{|0⟩, |1⟩}} subspace, above the tolerance {tolerance:.0e}"
        )
    if leakage <= 0.0:
        return state
    projected = core.apply_operator(support, state)
    if isinstance(projected, QuantumState):
        return projected.normalize()
    return projected.normalized()


def _collapse(
    state: QuantumState | DensityMatrix, projector: OperatorMatrix, probability: float
) -> QuantumState | DensityMatrix:
    if isinstance(state, QuantumState):
        return QuantumState(
            state.layout,
            projector.elements @ state.amplitudes / math.sqrt(probability),
        )
    return DensityMatrix(
        state.layout,
        projector.elements @ state.elements @ projector.elements / probability,
    )


def bell_measurement(
    state: QuantumState | DensityMatrix,
    rng: np.random.Generator,
    mode: MeasurementMode = MeasurementMode.IDEAL,
    params: DeviceParams | None = None,
    cfg: IntegratorConfig | None = None,
) -> BellOutcome:
    """
    Joint Bell measurement of qubit 1 and the resonator.

    Ideal mode projects onto the Bell basis directly. Physical mode applies
    an integrated π/2 exchange pulse to qubit 1 and measures in the rotated
    basis; ``collapsed_state`` is then in the rotated frame, with the same
    qubit 2 state.

    Raises:
        StateSupportError: If the resonator population above |1⟩ exceeds
            1e-8 (ideal) or 1e-3 (physical).
    """
    _require_bell_layout(state.layout)
    mode = MeasurementMode(mode)
    physical = mode == MeasurementMode.PHYSICAL
    tolerance = NOISY_LEAKAGE_TOLERANCE if physical else IDEAL_LEAKAGE_TOLERANCE
    state = _restrict(state, resonator_support(state.layout), tolerance)

    if physical:
        state = jc_pulse(
            state, 0, BELL_ROTATION_ANGLE, params or DeviceParams(),
            PulseMode.INTEGRATED, cfg,
        )
        projectors = rotated_bell_projectors(state.layout)
    else:
        projectors = bell_projectors(state.layout)
    outcome = core.measure_projective(state, projectors, rng)
    return BellOutcome(
        BELL_ORDER[outcome.index], outcome.probability, outcome.state
    )


def feed_forward(label: BellLabel) -> OperatorMatrix:
    """Correction applied to qubit 2 after outcome ``label``."""
    return OperatorMatrix(
        core.qubit_layout(Subsystem.QUBIT2), _FEED_FORWARD[BellLabel(label)]
    )


def _require_protocol_layout(layout: HilbertLayout) -> None:
    _require_bell_layout(layout)
    if len(layout) != 3 or layout.labels[2] != Subsystem.QUBIT2:
        raise TeleportLayoutError(
            f"Expected the (qubit1, resonator, qubit2) layout, got {layout.labels}"
        )


def decompose_bell(state: QuantumState) -> list[BellBranch]:
    """
    Split a protocol state into Bell components of qubit 1 and the resonator.

    Each branch carries the normalized conditional state of qubit 2 and its
    weight; Σ √w |B⟩ ⊗ |cond⟩ rebuilds the input. A zero-weight branch has a
    zero conditional vector.
    """
    _require_protocol_layout(state.layout)
    state = _restrict(
        state, resonator_support(state.layout), IDEAL_LEAKAGE_TOLERANCE
    )
    qubit2 = core.qubit_layout(Subsystem.QUBIT2)
    matrix = state.amplitudes.reshape(-1, 2)
    branches = []
    for label, vector in bell_states(state.layout.dims[1]).items():
        conditional = vector.conj() @ matrix
        weight = float(np.vdot(conditional, conditional).real)
        if weight > 0.0:
            conditional = conditional / math.sqrt(weight)
        branches.append(BellBranch(label, QuantumState(qubit2, conditional), weight))
    return sorted(branches, key=lambda branch: BELL_ORDER.index(branch.label))


def _qubit2_state(state: QuantumState | DensityMatrix) -> DensityMatrix:
    rho = state.to_density() if isinstance(state, QuantumState) else state
    return core.partial_trace(rho, [Subsystem.QUBIT2])


class _Branch(NamedTuple):
    fidelity: float
    duration: float


def _corrected_fidelity(
    collapsed: QuantumState | DensityMatrix,
    label: BellLabel,
    target: QuantumState,
    params: DeviceParams,
    collapse: CollapseSet | None,
    cfg: IntegratorConfig | None,
    corrections: dict[BellLabel, tuple[pulses.PulseSpec, ...]] | None,
) -> _Branch:
    if corrections is None:
        return _Branch(core.fidelity(target, _qubit2_state(collapsed)), 0.0)
    if collapse is None:
        corrected = core.apply_operator(feed_forward(label), _qubit2_state(collapsed))
        return _Branch(core.fidelity(target, corrected), 0.0)

    rho = collapsed
    duration = 0.0
    for pulse in corrections[label]:
        hamiltonian = pulses.control_hamiltonian(pulse, 1, params, rho.layout)
        rho = evolve_lindblad(
            rho, hamiltonian, collapse, (0.0, pulse.duration), cfg
        ).final
        duration += pulse.duration
    return _Branch(core.fidelity(target, _qubit2_state(rho)), duration)


def _noisy_exchange(
    rho: DensityMatrix,
    qubit: int,
    angle: float,
    params: DeviceParams,
    collapse: CollapseSet,
    cfg: IntegratorConfig | None,
) -> tuple[DensityMatrix, float]:
    duration = jc_pulse_duration(angle, params, qubit)
    hamiltonian = hamiltonians.resonant_jaynes_cummings(params, qubit, rho.layout)
    final = evolve_lindblad(rho, hamiltonian, collapse, (0.0, duration), cfg).final
    return final, duration


def run_teleportation(
    C0: complex,
    C1: complex,
    rng: np.random.Generator,
    *,
    mode: MeasurementMode = MeasurementMode.IDEAL,
    noise: bool = False,
    params: DeviceParams | None = None,
    cfg: IntegratorConfig | None = None,
    apply_feed_forward: bool = True,
    all_branches: bool = False,
) -> TeleportResult:
    """
    Teleport C0|↓⟩ + C1|↑⟩ from qubit 1 to qubit 2.

    Ideal mode without noise uses the exact channel, an abstract Bell
    measurement and exact corrections. Physical mode builds the channel and
    the Bell-basis rotation from integrated exchange pulses. With noise the
    whole system is a density matrix under the Lindblad equation with the
    device's collapse channels: the channel pulse, the Bell rotation in
    physical mode and the correction pulses are integrated, the
    measurement itself is instantaneous.

    Args:
        C0: Amplitude of |↓⟩.
        C1: Amplitude of |↑⟩.
        rng: Stream the Bell outcome is drawn from.
        mode: Bell measurement realisation.
        noise: Evolve under the device's decoherence rates.
        params: Device; defaults to ``DeviceParams()``.
        cfg: Integrator settings.
        apply_feed_forward: Skip the correction when False (diagnostic).
        all_branches: Evaluate every outcome to fill ``branch_fidelities``
            and ``expected_fidelity``.

    Returns:
        TeleportResult: Sampled outcome, fidelity of qubit 2 to the input and
            the duration of the simulated pulses in µs.

    Raises:
        TeleportConfigurationError: If noise and feed-forward are on and
            qubit 2 cannot be driven (zero Rabi frequency or bias shift),
            whatever the outcome would have been.
    """
    params = params or DeviceParams()
    mode = MeasurementMode(mode)
    physical = mode == MeasurementMode.PHYSICAL
    input_state = prepare_input(C0, C1)
    target = QuantumState(core.qubit_layout(Subsystem.QUBIT2), input_state.amplitudes)
    tolerance = (
        NOISY_LEAKAGE_TOLERANCE if physical or noise else IDEAL_LEAKAGE_TOLERANCE
    )
    collapse = None
    duration = 0.0

    # Every outcome's pulses are compiled before the outcome is drawn.
    corrections: dict[BellLabel, tuple[pulses.PulseSpec, ...]] | None = None
    if apply_feed_forward:
        corrections = (
            {label: pulses.correction_pulses(label, params) for label in BELL_ORDER}
            if noise
            else {}
        )

    if noise:
        start = core.basis_state(channel_layout(params.n_max), (0, core.UP))
        state = core.tensor(input_state, start).to_density()
        collapse = hamiltonians.collapse_operators(params, state.layout)
        state, elapsed = _noisy_exchange(
            state, 1, CHANNEL_ANGLE, params, collapse, cfg
        )
        duration += elapsed
    else:
        channel_mode = ChannelMode.JC_PULSE if physical else ChannelMode.IDEAL
        state = core.tensor(input_state, prepare_channel(channel_mode, params, cfg=cfg))
        if physical:
            duration += jc_pulse_duration(CHANNEL_ANGLE, params, 1)

    layout = state.layout
    state = _restrict(state, resonator_support(layout), tolerance)
    if physical:
        if noise:
            state, elapsed = _noisy_exchange(
                state, 0, BELL_ROTATION_ANGLE, params, collapse, cfg
            )
        else:
            state = jc_pulse(
                state, 0, BELL_ROTATION_ANGLE, params, PulseMode.INTEGRATED, cfg
            )
            elapsed = jc_pulse_duration(BELL_ROTATION_ANGLE, params, 0)
        duration += elapsed
        projectors = rotated_bell_projectors(layout)
        support = sum(projectors[1:], projectors[0])
        discarded = 1.0 - core.expectation(state, support).real
        if discarded > 0.0:
            logger.debug(f"Discarding weight {discarded:.3e} outside the Bell readout")
            state = core.apply_operator(support, state)
            state = (
                state.normalize()
                if isinstance(state, QuantumState)
                else state.normalized()
            )
    else:
        projectors = bell_projectors(layout)

    probabilities = core.outcome_probabilities(state, projectors)
    probabilities = probabilities / probabilities.sum()
    outcome = core.measure_projective(state, projectors, rng)
    label = BELL_ORDER[outcome.index]
    sampled = _corrected_fidelity(
        outcome.state, label, target, params, collapse, cfg, corrections
    )
    duration += sampled.duration

    branch_fidelities = None
    expected_fidelity = None
    if all_branches:
        branch_fidelities = {}
        for index, (branch_label, projector) in enumerate(
            zip(BELL_ORDER, projectors)
        ):
            if branch_label == label:
                branch_fidelities[branch_label] = sampled.fidelity
                continue
            if probabilities[index] < 1e-12:
                branch_fidelities[branch_label] = 0.0
                continue
            raw = core.outcome_probabilities(state, [projector])[0]
            branch_fidelities[branch_label] = _corrected_fidelity(
                _collapse(state, projector, raw),
                branch_label,
                target,
                params,
                collapse,
                cfg,
                corrections,
            ).fidelity
        expected_fidelity = float(
            sum(
                p * branch_fidelities[branch_label]
                for p, branch_label in zip(probabilities, BELL_ORDER)
            )
        )

    logger.debug(
        f"Outcome {label} (p = {outcome.probability:.4f}), "
        f"fidelity {sampled.fidelity:.9f}, duration {duration:.6g} µs"
    )
    return TeleportResult(
        outcome=label,
        fidelity=sampled.fidelity,
        outcome_probabilities=tuple(float(p) for p in probabilities),
        protocol_duration=duration,
        noise_enabled=noise,
        branch_fidelities=branch_fidelities,
        expected_fidelity=expected_fidelity,
    )


def truncate_resonator(
    state: QuantumState | DensityMatrix,
    tolerance: float = IDEAL_LEAKAGE_TOLERANCE,
) -> DensityMatrix:
    """
    Restrict the resonator to span{|0⟩, |1⟩}, turning it into a qubit for
    Pauli tomography. The result is renormalized.

    Raises:
        StateSupportError: If more than ``tolerance`` lies above |1⟩.
    """
    layout = state.layout
    state = _restrict(state, resonator_support(layout), tolerance)
    rho = state.to_density() if isinstance(state, QuantumState) else state
    position = layout.index(Subsystem.RESONATOR)
    kept = [
        np.ravel_multi_index(indices, layout.dims)
        for indices in np.ndindex(*layout.dims)
        if indices[position] <= 1
    ]
    dims = tuple(2 if i == position else dim for i, dim in enumerate(layout.dims))
    truncated = DensityMatrix(
        HilbertLayout(dims, layout.labels), rho.elements[np.ix_(kept, kept)]
    )
    return truncated.normalized()


def _require_pair(rho: DensityMatrix) -> None:
    if rho.layout.dims != (2, 2):
        raise TeleportValueError(
            f"Pauli tomography needs a (2, 2) layout, got {rho.layout.dims}"
        )


def _pauli_pair(pair: PauliPair) -> np.ndarray:
    first, second = pair
    return np.kron(core.PAULI_MATRICES[first], core.PAULI_MATRICES[second])


def tomography_record(rho: DensityMatrix) -> TomographyRecord:
    """Exact ⟨P_i ⊗ P_j⟩ for all 16 Pauli pairs."""
    _require_pair(rho)
    expectations = {
        pair: float(np.trace(rho.elements @ _pauli_pair(pair)).real)
        for pair in PAULI_PAIRS
    }
    return TomographyRecord(rho.layout, expectations)


def sample_tomography_record(
    rho: DensityMatrix, shots: int, rng: np.random.Generator
) -> TomographyRecord:
    """
    Finite-shot record: each non-identity setting is measured ``shots``
    times, counting the +1 outcomes. The identity pair stays exact.
    """
    if shots < 1:
        raise TeleportValueError(f"Need at least one shot per setting, got {shots}")
    exact = tomography_record(rho)
    identity = (Pauli.I, Pauli.I)
    counts = {}
    for pair in PAULI_PAIRS:
        if pair == identity:
            continue
        p_plus = min(1.0, max(0.0, 0.5 * (1.0 + exact.expectations[pair])))
        counts[pair] = (int(rng.binomial(shots, p_plus)), shots)
    return TomographyRecord(
        rho.layout, {identity: exact.expectations[identity]}, counts
    )


def tomography_reconstruct(records: TomographyRecord) -> DensityMatrix:
    """
    Linear inversion ρ = ¼ Σ ⟨P_i ⊗ P_j⟩ P_i ⊗ P_j, symmetrized and
    scaled to unit trace. Small negative eigenvalues are left in place.

    Raises:
        TeleportValueError: If any of the 16 settings is missing.
    """
    missing = [
        "".join(pair)
        for pair in PAULI_PAIRS
        if pair not in records.expectations and pair not in records.counts
    ]
    if missing:
        raise TeleportValueError(
            f"Tomography record is missing settings {', '.join(missing)}"
        )
    elements = 0.25 * sum(
        records.expectation(pair) * _pauli_pair(pair) for pair in PAULI_PAIRS
    )
    return DensityMatrix(records.layout, elements).symmetrized().normalized()


def channel_tomography(
    state: QuantumState | DensityMatrix,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[TomographyRecord, DensityMatrix]:
    """Record and reconstruct a resonator-qubit state truncated to two levels."""
    rho = truncate_resonator(state, NOISY_LEAKAGE_TOLERANCE)
    if shots is None:
        record = tomography_record(rho)
    else:
        record = sample_tomography_record(rho, shots, rng or core.make_rng(0))
    return record, tomography_reconstruct(record)
