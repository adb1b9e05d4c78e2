import math

import numpy as np
import pytest

from cqed_teleport import core, dynamics, hamiltonians
from cqed_teleport._enums import Frame, PulseMode, Subsystem
from cqed_teleport.config import DeviceParams, IntegratorConfig
from cqed_teleport.core import DensityMatrix, HilbertLayout, OperatorMatrix
from cqed_teleport.exceptions import (
    FitError,
    StepBudgetError,
    TeleportConfigurationError,
    TeleportValueError,
)
from cqed_teleport.hamiltonians import TWO_PI, CollapseChannel, CollapseSet

PAIR = HilbertLayout((2, 3), (Subsystem.QUBIT1, Subsystem.RESONATOR))


def test_trajectory_needs_increasing_times():
    state = core.basis_state(core.qubit_layout(), (0,))
    with pytest.raises(TeleportValueError):
        dynamics.Trajectory(np.array([0.0, 0.0]), (state, state))


def test_free_precession_matches_closed_form():
    layout = core.qubit_layout()
    frequency = 3.0
    hamiltonian = OperatorMatrix(
        layout, 0.5 * TWO_PI * frequency * core.SIGMA_Z, hermitian_flag=True
    )
    start = core.QuantumState(layout, np.array([1, 1]) / math.sqrt(2))
    sigma_x = OperatorMatrix(layout, core.SIGMA_X, hermitian_flag=True)

    trajectory = dynamics.evolve_unitary(
        start, hamiltonian, (0.0, 1.0), e_ops={"x": sigma_x}
    )

    expected = np.cos(TWO_PI * frequency * trajectory.times)
    assert np.allclose(trajectory.observables["x"], expected, atol=1e-6)
    assert trajectory.final.norm == pytest.approx(1.0)
    assert len(trajectory) == len(trajectory.times)


def test_step_budget_is_enforced():
    layout = core.qubit_layout()
    hamiltonian = OperatorMatrix(layout, TWO_PI * core.SIGMA_X, hermitian_flag=True)
    start = core.basis_state(layout, (0,))
    with pytest.raises(StepBudgetError):
        dynamics.evolve_unitary(
            start, hamiltonian, (0.0, 10.0), IntegratorConfig(max_steps=100)
        )


def test_non_hermitian_hamiltonian_is_rejected():
    layout = core.qubit_layout()
    start = core.basis_state(layout, (0,))
    with pytest.raises(TeleportValueError):
        dynamics.evolve_unitary(
            start, OperatorMatrix(layout, core.SIGMA_PLUS), (0.0, 1.0)
        )


def test_amplitude_damping():
    layout = core.qubit_layout()
    rate = 0.1
    collapse = CollapseSet(
        (CollapseChannel("decay", rate, OperatorMatrix(layout, core.SIGMA_MINUS)),)
    )
    excited = core.basis_state(layout, (core.UP,)).to_density()

    trajectory = dynamics.evolve_lindblad(
        excited, core.zero_operator(layout), collapse, (0.0, 1.0)
    )

    final = trajectory.final
    assert final.elements[1, 1].real == pytest.approx(math.exp(-TWO_PI * rate), rel=1e-6)
    assert final.trace.real == pytest.approx(1.0, abs=1e-9)


def test_pure_dephasing_decays_coherence():
    layout = core.qubit_layout()
    gamma_phi = 0.2
    collapse = CollapseSet(
        (
            CollapseChannel(
                "dephasing",
                0.5 * gamma_phi,
                OperatorMatrix(layout, core.SIGMA_Z, hermitian_flag=True),
            ),
        )
    )
    plus = core.QuantumState(layout, np.array([1, 1]) / math.sqrt(2)).to_density()

    final = dynamics.evolve_lindblad(
        plus, core.zero_operator(layout), collapse, (0.0, 2.0)
    ).final

    assert abs(final.elements[0, 1]) == pytest.approx(
        0.5 * math.exp(-TWO_PI * gamma_phi * 2.0), rel=1e-6
    )
    assert final.elements[0, 0].real == pytest.approx(0.5)


def test_photon_loss_follows_resonator_lifetime():
    params = DeviceParams(kappa=0.005)
    collapse = hamiltonians.collapse_operators(params, PAIR)
    assert [channel.name for channel in collapse] == ["kappa"]
    lifetime = 1.0 / (TWO_PI * params.kappa)
    one_photon = core.basis_state(PAIR, (core.DOWN, 1)).to_density()

    trajectory = dynamics.evolve_lindblad(
        one_photon,
        core.zero_operator(PAIR),
        collapse,
        (0.0, 3 * lifetime),
        e_ops={"photons": hamiltonians.number_operator(PAIR)},
    )

    expected = np.exp(-TWO_PI * params.kappa * trajectory.times)
    assert np.allclose(trajectory.observables["photons"], expected, rtol=0, atol=1e-6)


def test_coherence_decays_at_rate_from_coherence_times():
    rates = hamiltonians.rates_from_coherence_times(7.3, 0.5)
    params = DeviceParams(gamma1=rates.gamma1, gamma_phi=rates.gamma_phi)
    layout = core.qubit_layout()
    plus = core.QuantumState(layout, np.array([1, 1]) / math.sqrt(2)).to_density()

    final = dynamics.evolve_lindblad(
        plus,
        core.zero_operator(layout),
        hamiltonians.collapse_operators(params, layout),
        (0.0, 2 * 0.5),
    ).final

    assert abs(final.elements[0, 1]) == pytest.approx(0.5 * math.exp(-2.0), rel=1e-2)


def test_halving_the_step_leaves_the_result_unchanged():
    params = DeviceParams()
    start = core.basis_state(PAIR, (core.UP, 1))

    coarse = dynamics.jc_pulse(
        start, 0, math.pi / 3, params, PulseMode.INTEGRATED,
        IntegratorConfig(steps_per_period=400),
    )
    fine = dynamics.jc_pulse(
        start, 0, math.pi / 3, params, PulseMode.INTEGRATED,
        IntegratorConfig(steps_per_period=800),
    )

    assert core.fidelity(coarse, fine) == pytest.approx(1.0, abs=1e-9)


def test_lindblad_without_channels_matches_unitary_evolution():
    hamiltonian = hamiltonians.jaynes_cummings(
        DeviceParams(), 0, PAIR, frame=Frame.ROTATING
    )
    start = core.QuantumState(PAIR, np.array([0, 0.6, 0, 0.8j, 0, 0]))

    pure = dynamics.evolve_unitary(start, hamiltonian, (0.0, 0.01)).final
    mixed = dynamics.evolve_lindblad(
        start.to_density(), hamiltonian, CollapseSet(), (0.0, 0.01)
    ).final

    assert core.fidelity(pure, mixed) >= 1 - 1e-8


def test_lindblad_rejects_invalid_initial_state():
    layout = core.qubit_layout()
    with pytest.raises(TeleportValueError):
        dynamics.evolve_lindblad(
            DensityMatrix(layout, np.eye(2)),
            core.zero_operator(layout),
            CollapseSet(),
            (0.0, 1.0),
        )


def test_jc_unitary_is_unitary():
    unitary = dynamics.jc_unitary(core.protocol_layout(3), 1, 1.234).elements
    assert np.allclose(unitary @ unitary.conj().T, np.eye(unitary.shape[0]))


def test_jc_pulse_duration():
    params = DeviceParams(g=17.0)
    assert dynamics.jc_pulse_duration(math.pi / 2, params) == pytest.approx(1 / (8 * 17.0))
    with pytest.raises(TeleportValueError):
        dynamics.jc_pulse_duration(-1.0, params)
    with pytest.raises(TeleportConfigurationError):
        dynamics.jc_pulse_duration(1.0, DeviceParams(g=0.0))
    with pytest.raises(TeleportConfigurationError):
        dynamics.jc_pulse_duration(1.0, DeviceParams(coupled=False))


@pytest.mark.parametrize("angle", [math.pi / 4, math.pi / 2, math.pi, 2 * math.pi])
@pytest.mark.parametrize(
    "indices", [(core.UP, 1), (core.UP, 0), (core.DOWN, 1)], ids=["up1", "up0", "down1"]
)
def test_integrated_exchange_matches_exact_propagator(angle, indices):
    params = DeviceParams()
    start = core.basis_state(PAIR, indices)

    ideal = dynamics.jc_pulse(start, 0, angle, params, PulseMode.IDEAL)
    integrated = dynamics.jc_pulse(start, 0, angle, params, PulseMode.INTEGRATED)

    assert core.fidelity(ideal, integrated) == pytest.approx(1.0, abs=1e-9)


def test_half_exchange_pulse_splits_excitation():
    params = DeviceParams()
    start = core.basis_state(PAIR, (core.UP, 0))
    final = dynamics.jc_pulse(start, 0, math.pi / 2, params, PulseMode.INTEGRATED)
    amplitudes = final.tensor_view()
    assert amplitudes[core.UP, 0] == pytest.approx(1 / math.sqrt(2), abs=1e-8)
    assert amplitudes[core.DOWN, 1] == pytest.approx(-1j / math.sqrt(2), abs=1e-8)


def test_zero_angle_pulse_is_identity():
    start = core.basis_state(PAIR, (core.UP, 0))
    assert dynamics.jc_pulse(start, 0, 0.0, DeviceParams()) is start


def test_fit_recovers_sinusoid():
    times = np.linspace(0.0, 1.0, 201)
    values = 0.3 * np.sin(TWO_PI * 5.0 * times + 0.4) + 0.1

    fit = dynamics.fit_oscillation(times, values)

    assert fit.frequency == pytest.approx(5.0, rel=1e-6)
    assert fit.amplitude == pytest.approx(0.3, rel=1e-6)
    assert fit.offset == pytest.approx(0.1, abs=1e-6)
    assert fit.rms_residual < 1e-8


@pytest.mark.parametrize(
    "times, values",
    [
        (np.linspace(0, 1, 5), np.sin(np.linspace(0, 10, 5))),
        (np.linspace(0, 1, 50), np.full(50, 0.3)),
        (np.linspace(0, 1, 50), np.sin(TWO_PI * 1.0 * np.linspace(0, 1, 50))),
    ],
    ids=["too-few-samples", "constant", "one-period"],
)
def test_fit_failures(times, values):
    with pytest.raises(FitError):
        dynamics.fit_oscillation(times, values)
