import itertools
import math
import statistics
from collections import Counter

import numpy as np
import pytest

from cqed_teleport import core, protocol
from cqed_teleport._enums import (
    BellLabel,
    ChannelMode,
    MeasurementMode,
    Pauli,
    PulseMode,
    Subsystem,
)
from cqed_teleport.config import DeviceParams
from cqed_teleport.core import QuantumState
from cqed_teleport.dynamics import jc_pulse_duration
from cqed_teleport.exceptions import (
    StateSupportError,
    TeleportConfigurationError,
    TeleportValueError,
)

INPUTS = [
    (1.0, 0.0),
    (0.0, 1.0),
    (1 / math.sqrt(2), 1 / math.sqrt(2)),
    (0.6, 0.8j),
    (complex(0.3, 0.4), complex(0.5, math.sqrt(0.5))),
]

# Six cardinal Bloch states; averaging over them gives the average fidelity.
CARDINAL_INPUTS = [
    (1.0, 0.0),
    (0.0, 1.0),
    (1 / math.sqrt(2), 1 / math.sqrt(2)),
    (1 / math.sqrt(2), -1 / math.sqrt(2)),
    (1 / math.sqrt(2), 1j / math.sqrt(2)),
    (1 / math.sqrt(2), -1j / math.sqrt(2)),
]

# Bell vectors over (qubit 1, photons) written out by hand, index 2·q1 + n.
HAND_BELL = {
    BellLabel.PSI_PLUS: np.array([0, -1j, 1, 0]) / math.sqrt(2),
    BellLabel.PSI_MINUS: np.array([0, -1j, -1, 0]) / math.sqrt(2),
    BellLabel.PHI_PLUS: np.array([1, 0, 0, 1j]) / math.sqrt(2),
    BellLabel.PHI_MINUS: np.array([1, 0, 0, -1j]) / math.sqrt(2),
}


def _bell_input(label: BellLabel, levels: int = 3) -> QuantumState:
    vector = protocol.bell_states(levels)[label]
    pair = QuantumState(core.protocol_layout(levels - 1).subset([0, 1]), vector)
    qubit2 = core.basis_state(core.qubit_layout(Subsystem.QUBIT2), (core.DOWN,))
    return core.tensor(pair, qubit2)


def _ket(q1: int, n: int, q2: int) -> np.ndarray:
    # n_max = 1: basis (qubit1, photons, qubit2) in 8 dimensions
    vector = np.zeros(8, dtype=complex)
    vector[4 * q1 + 2 * n + q2] = 1.0
    return vector


def _bookkept_state(C0: complex, C1: complex) -> np.ndarray:
    return (
        C0 * _ket(0, 0, 1) - 1j * C0 * _ket(0, 1, 0) + C1 * _ket(1, 0, 1) - 1j * C1 * _ket(1, 1, 0)
    ) / math.sqrt(2)


def _bookkept_branches(
    C0: complex, C1: complex
) -> dict[BellLabel, tuple[float, np.ndarray]]:
    """Weight and normalized qubit 2 state of every Bell outcome."""
    full = _bookkept_state(C0, C1).reshape(4, 2)
    branches = {}
    for label, bell in HAND_BELL.items():
        conditional = bell.conj() @ full
        weight = float(np.vdot(conditional, conditional).real)
        branches[label] = (weight, conditional / math.sqrt(weight))
    return branches


def _random_inputs(seed: int, count: int) -> list[tuple[complex, complex]]:
    rng = core.make_rng(seed)
    return [core.random_qubit_state(rng) for _ in range(count)]


def test_prepare_input_rejects_unnormalized_coefficients():
    with pytest.raises(TeleportValueError):
        protocol.prepare_input(1.0, 1.0)


def test_pulsed_channel_matches_ideal_channel():
    params = DeviceParams()
    ideal = protocol.prepare_channel(ChannelMode.IDEAL, params)
    exact = protocol.prepare_channel(ChannelMode.JC_PULSE, params, PulseMode.IDEAL)
    integrated = protocol.prepare_channel(ChannelMode.JC_PULSE, params)
    assert core.fidelity(ideal, exact) == pytest.approx(1.0)
    assert core.fidelity(ideal, integrated) == pytest.approx(1.0, abs=1e-9)


def test_bell_states_are_orthonormal():
    vectors = np.array(list(protocol.bell_states(3).values()))
    assert np.allclose(vectors.conj() @ vectors.T, np.eye(4))


@pytest.mark.parametrize("C0, C1", INPUTS)
def test_bell_decomposition_matches_independent_bookkeeping(C0, C1):
    state = QuantumState(core.protocol_layout(1), _bookkept_state(C0, C1))
    expected = {
        BellLabel.PSI_PLUS: np.array([C0, C1]),
        BellLabel.PSI_MINUS: np.array([C0, -C1]),
        BellLabel.PHI_PLUS: np.array([-C1, C0]),
        BellLabel.PHI_MINUS: np.array([C1, C0]),
    }

    branches = protocol.decompose_bell(state)

    assert [branch.label for branch in branches] == list(protocol.BELL_ORDER)
    for branch in branches:
        assert branch.weight == pytest.approx(0.25)
        reference = QuantumState(core.qubit_layout(Subsystem.QUBIT2), expected[branch.label])
        assert core.fidelity(reference, branch.state) == pytest.approx(1.0)


@pytest.mark.parametrize("C0, C1", INPUTS)
def test_feed_forward_restores_input_on_every_branch(C0, C1):
    state = core.tensor(
        protocol.prepare_input(C0, C1),
        protocol.prepare_channel(ChannelMode.IDEAL, DeviceParams()),
    )
    target = QuantumState(core.qubit_layout(Subsystem.QUBIT2), [C0, C1])
    for branch in protocol.decompose_bell(state):
        corrected = protocol.feed_forward(branch.label).apply(branch.state)
        assert core.fidelity(target, corrected) == pytest.approx(1.0)


@pytest.mark.parametrize("C0, C1", INPUTS)
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_ideal_teleportation_is_exact(C0, C1, seed):
    result = protocol.run_teleportation(C0, C1, core.make_rng(seed))
    assert result.fidelity == pytest.approx(1.0, abs=1e-10)
    assert result.outcome_probabilities == pytest.approx((0.25,) * 4)
    assert result.protocol_duration == 0.0
    assert not result.noise_enabled


def test_ideal_teleportation_of_random_inputs():
    trials_per_input = 50
    counts: Counter[BellLabel] = Counter()
    for index, (C0, C1) in enumerate(_random_inputs(1000, 20)):
        for trial in range(trials_per_input):
            seed = index * trials_per_input + trial
            result = protocol.run_teleportation(C0, C1, core.make_rng(seed))
            assert result.fidelity == pytest.approx(1.0, abs=1e-9)
            counts[result.outcome] += 1

    total = sum(counts.values())
    bound = 3 * math.sqrt(0.25 * 0.75 / total)
    for label in BellLabel:
        assert abs(counts[label] / total - 0.25) <= bound


@pytest.mark.parametrize("index", range(50))
def test_teleportation_matches_amplitude_bookkeeping(index):
    C0, C1 = _random_inputs(2000 + index, 1)[0]
    branches = _bookkept_branches(C0, C1)
    params = DeviceParams(n_max=1)

    result = protocol.run_teleportation(
        C0,
        C1,
        core.make_rng(index),
        params=params,
        apply_feed_forward=False,
        all_branches=True,
    )

    assert result.outcome_probabilities == pytest.approx(
        tuple(branches[label][0] for label in protocol.BELL_ORDER), abs=1e-10
    )
    for label, (_, conditional) in branches.items():
        overlap = abs(np.vdot([C0, C1], conditional)) ** 2
        assert result.branch_fidelities[label] == pytest.approx(overlap, abs=1e-10)

    state = core.tensor(
        protocol.prepare_input(C0, C1),
        protocol.prepare_channel(ChannelMode.IDEAL, params),
    )
    outcome = protocol.bell_measurement(state, core.make_rng(index))
    weight, conditional = branches[outcome.label]
    assert outcome.probability == pytest.approx(weight, abs=1e-10)
    reduced = core.partial_trace(outcome.collapsed_state.to_density(), [Subsystem.QUBIT2])
    reference = QuantumState(core.qubit_layout(Subsystem.QUBIT2), conditional)
    assert core.fidelity(reference, reduced) == pytest.approx(1.0, abs=1e-10)


def test_bell_outcome_frequencies(rng):
    state = core.tensor(
        protocol.prepare_input(0.6, 0.8j),
        protocol.prepare_channel(ChannelMode.IDEAL, DeviceParams()),
    )
    projectors = protocol.bell_projectors(state.layout)
    trials = 10_000

    counts = Counter(
        core.measure_projective(state, projectors, rng).index for _ in range(trials)
    )

    bound = 3 * math.sqrt(0.25 * 0.75 / trials)
    for index in range(4):
        assert abs(counts[index] / trials - 0.25) <= bound


def test_channel_leaves_qubit2_maximally_mixed():
    state = protocol.prepare_channel(ChannelMode.IDEAL, DeviceParams())
    reduced = core.partial_trace(state.to_density(), [Subsystem.QUBIT2])
    assert np.allclose(reduced.elements, np.eye(2) / 2, atol=1e-12)


def test_uncorrected_teleportation_averages_one_half():
    expected = [
        protocol.run_teleportation(
            C0, C1, core.make_rng(seed), apply_feed_forward=False, all_branches=True
        ).expected_fidelity
        for seed, (C0, C1) in enumerate(_random_inputs(3000, 100))
    ]
    assert statistics.fmean(expected) == pytest.approx(0.5, abs=1e-9)


def test_outcomes_are_reproducible_and_cover_all_labels():
    outcomes = [
        protocol.run_teleportation(0.6, 0.8, core.make_rng(seed)).outcome
        for seed in range(40)
    ]
    again = [
        protocol.run_teleportation(0.6, 0.8, core.make_rng(seed)).outcome
        for seed in range(40)
    ]
    assert outcomes == again
    assert set(outcomes) == set(BellLabel)


def test_without_feed_forward_only_matching_branches_survive(rng):
    result = protocol.run_teleportation(
        1.0, 0.0, rng, apply_feed_forward=False, all_branches=True
    )
    assert result.branch_fidelities == pytest.approx(
        {
            BellLabel.PSI_PLUS: 1.0,
            BellLabel.PSI_MINUS: 1.0,
            BellLabel.PHI_PLUS: 0.0,
            BellLabel.PHI_MINUS: 0.0,
        },
        abs=1e-10,
    )
    assert result.expected_fidelity == pytest.approx(0.5)


@pytest.mark.parametrize("C0, C1", INPUTS[2:])
def test_physical_teleportation_without_noise(C0, C1, closed_device, rng):
    result = protocol.run_teleportation(
        C0, C1, rng, mode=MeasurementMode.PHYSICAL, params=closed_device,
        all_branches=True,
    )
    assert result.fidelity == pytest.approx(1.0, abs=1e-6)
    assert result.expected_fidelity == pytest.approx(1.0, abs=1e-6)
    assert result.protocol_duration == pytest.approx(
        2 * jc_pulse_duration(math.pi / 2, closed_device)
    )


@pytest.mark.parametrize("label", list(BellLabel))
@pytest.mark.parametrize("mode", list(MeasurementMode))
def test_bell_measurement_identifies_bell_states(label, mode, closed_device, rng):
    outcome = protocol.bell_measurement(
        _bell_input(label), rng, mode, params=closed_device
    )
    assert outcome.label == label
    assert outcome.probability == pytest.approx(1.0, abs=1e-8)


def test_bell_measurement_rejects_resonator_leakage(rng):
    layout = core.protocol_layout(2)
    leaky = QuantumState(
        layout,
        (
            core.basis_state(layout, (0, 0, 0)).amplitudes
            + core.basis_state(layout, (0, 2, 0)).amplitudes
        )
        / math.sqrt(2),
    )
    for mode in MeasurementMode:
        with pytest.raises(StateSupportError):
            protocol.bell_measurement(leaky, rng, mode)


def test_decoherence_lowers_expected_fidelity(device):
    C0 = C1 = 1 / math.sqrt(2)

    def expected(params: DeviceParams) -> float:
        return protocol.run_teleportation(
            C0, C1, core.make_rng(5), noise=True, params=params, all_branches=True
        ).expected_fidelity

    stronger = device.model_copy(
        update={"gamma1": 10 * device.gamma1, "gamma_phi": 10 * device.gamma_phi}
    )
    closed, noisy, noisier = (
        expected(device.closed()),
        expected(device),
        expected(stronger),
    )

    assert closed > 0.99
    assert noisy < closed - 1e-3
    assert noisier < noisy


def test_fidelity_never_improves_when_a_rate_doubles(device):
    base = device.model_copy(update={"n_max": 1})
    rates = ("kappa", "gamma1", "gamma_phi")

    def average(factors: tuple[int, ...]) -> float:
        params = base.model_copy(
            update={
                name: factor * getattr(base, name)
                for name, factor in zip(rates, factors)
            }
        )
        return statistics.fmean(
            protocol.run_teleportation(
                C0, C1, core.make_rng(5), noise=True, params=params, all_branches=True
            ).expected_fidelity
            for C0, C1 in CARDINAL_INPUTS
        )

    grid = {factors: average(factors) for factors in itertools.product((1, 2), repeat=3)}

    for factors, value in grid.items():
        assert value < 1.0
        for position, factor in enumerate(factors):
            if factor == 1:
                doubled = factors[:position] + (2,) + factors[position + 1 :]
                assert grid[doubled] <= value + 1e-12


def test_noisy_mean_fidelity_is_below_one(device):
    params = device.model_copy(update={"n_max": 1})
    fidelities = [
        protocol.run_teleportation(
            C0, C1, core.make_rng(seed), noise=True, params=params
        ).fidelity
        for seed, (C0, C1) in enumerate(_random_inputs(4000, 200))
    ]
    assert statistics.fmean(fidelities) < 1.0


@pytest.mark.parametrize("seed", range(12))
def test_noisy_feed_forward_without_drive_fails_for_every_outcome(seed):
    params = DeviceParams(kappa=0.005, gamma1=0.02, gamma_phi=0.31)
    with pytest.raises(TeleportConfigurationError):
        protocol.run_teleportation(
            0.6, 0.8, core.make_rng(seed), noise=True, params=params
        )


def test_noisy_run_without_feed_forward_needs_no_drive():
    params = DeviceParams(kappa=0.005, gamma1=0.02, gamma_phi=0.31, n_max=1)
    result = protocol.run_teleportation(
        0.6, 0.8, core.make_rng(2), noise=True, params=params, apply_feed_forward=False
    )
    assert 0.0 <= result.fidelity <= 1.0


def test_noisy_run_reports_pulse_durations(device):
    result = protocol.run_teleportation(
        1.0, 0.0, core.make_rng(3), noise=True, params=device
    )
    assert result.noise_enabled
    assert result.protocol_duration >= jc_pulse_duration(math.pi / 2, device, 1)


def test_teleport_result_checks_probabilities():
    with pytest.raises(TeleportValueError):
        protocol.TeleportResult(
            outcome=BellLabel.PSI_PLUS,
            fidelity=1.0,
            outcome_probabilities=(0.5, 0.5, 0.5, 0.0),
            protocol_duration=0.0,
            noise_enabled=False,
        )


def test_exact_channel_tomography():
    state = protocol.prepare_channel(ChannelMode.IDEAL, DeviceParams())
    record, rho = protocol.channel_tomography(state)
    assert len(record) == 16
    assert core.concurrence(rho) == pytest.approx(1.0)
    assert rho.min_eigenvalue == pytest.approx(0.0, abs=1e-9)


def test_sampled_channel_tomography(rng):
    params = DeviceParams()
    state = protocol.prepare_channel(ChannelMode.JC_PULSE, params)
    target = protocol.prepare_channel(
        ChannelMode.IDEAL, params.model_copy(update={"n_max": 1})
    )
    record, rho = protocol.channel_tomography(state, shots=10_000, rng=rng)
    assert record.counts[(Pauli.Z, Pauli.Z)][1] == 10_000
    assert core.fidelity(target, rho) >= 0.98


def test_reconstruction_needs_every_setting():
    rho = protocol.truncate_resonator(
        protocol.prepare_channel(ChannelMode.IDEAL, DeviceParams())
    )
    record = protocol.tomography_record(rho)
    del record.expectations[(Pauli.X, Pauli.Y)]
    with pytest.raises(TeleportValueError):
        protocol.tomography_reconstruct(record)


def test_truncation_rejects_populated_upper_levels():
    layout = protocol.channel_layout(2)
    state = core.basis_state(layout, (2, core.DOWN))
    with pytest.raises(StateSupportError):
        protocol.truncate_resonator(state)
