"""
Time evolution by fixed-step fourth-order Runge-Kutta.

Pure states follow dψ/dt = -iH(t)ψ, density matrices the Lindblad master
equation. The step is ``cfg.dt`` when set, otherwise
1/(steps_per_period · f_max) with f_max the largest linear frequency of
H(t0) plus the total collapse rate. At most ``cfg.max_snapshots`` evenly
spaced states are kept per trajectory.
"""

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import NamedTuple, TypeAlias

import numpy as np
from scipy.optimize import curve_fit

from cqed_teleport import core, hamiltonians
from cqed_teleport._enums import PulseMode, Subsystem
from cqed_teleport._logger import logger
from cqed_teleport._types import ComplexArray, OscillationFit, RealArray
from cqed_teleport.config import DeviceParams, IntegratorConfig
from cqed_teleport.core import (
    DensityMatrix,
    HilbertLayout,
    OperatorMatrix,
    QuantumState,
)
from cqed_teleport.exceptions import (
    FitError,
    IntegrationQualityError,
    StepBudgetError,
    TeleportConfigurationError,
    TeleportValueError,
)
from cqed_teleport.hamiltonians import TWO_PI, CollapseSet

Hamiltonian: TypeAlias = OperatorMatrix | Callable[[float], OperatorMatrix]

NORM_DRIFT_PER_US = 1e-9
TRACE_DRIFT = 1e-7
NEGATIVE_EIGENVALUE_LIMIT = -1e-6
MIN_FIT_SAMPLES = 10
MIN_FIT_PERIODS = 2.0
FIT_MAX_ITERATIONS = 10_000


@dataclass(frozen=True, slots=True)
class Trajectory:
    """Snapshots of an evolution with optional named expectation series."""

    times: RealArray
    states: tuple[QuantumState | DensityMatrix, ...]
    observables: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float)
        states = tuple(self.states)
        if times.ndim != 1 or times.size != len(states) or not states:
            raise TeleportValueError(
                f"A trajectory needs one time per state, got {times.size} "
                f"times and {len(states)} states"
            )
        if np.any(np.diff(times) <= 0.0):
            raise TeleportValueError("Trajectory times must be strictly increasing")
        for name, series in self.observables.items():
            if len(series) != len(states):
                raise TeleportValueError(
                    f"Observable '{name}' has {len(series)} values for "
                    f"{len(states)} snapshots"
                )
        times.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def final(self) -> QuantumState | DensityMatrix:
        return self.states[-1]


class _StepPlan(NamedTuple):
    dt: float
    n_steps: int
    stride: int

    def snapshot_times(self, t0: float) -> RealArray:
        return t0 + self.dt * np.arange(0, self.n_steps + 1, self.stride)


def _plan_steps(
    t0: float, t1: float, f_max: float, cfg: IntegratorConfig
) -> _StepPlan:
    duration = t1 - t0
    if duration < 0.0:
        raise TeleportValueError(f"Time span ({t0}, {t1}) runs backwards")
    if duration == 0.0:
        return _StepPlan(0.0, 0, 1)

    if cfg.dt is not None:
        target = cfg.dt
    elif f_max > 0.0:
        target = 1.0 / (cfg.steps_per_period * f_max)
    else:
        target = duration
    n_steps = max(1, math.ceil(duration / target - 1e-9))
    stride = math.ceil(n_steps / (cfg.max_snapshots - 1))
    n_steps = stride * math.ceil(n_steps / stride)
    if n_steps > cfg.max_steps:
        raise StepBudgetError(
            f"Integrating {duration:.6g} µs needs {n_steps} steps, "
            f"more than the budget of {cfg.max_steps}"
        )
    dt = duration / n_steps
    logger.debug(
        f"RK4 over {duration:.6g} µs: {n_steps} steps of {dt:.3e} µs, "
        f"snapshot every {stride}"
    )
    return _StepPlan(dt, n_steps, stride)


def _check_hamiltonian(H: OperatorMatrix, layout: HilbertLayout) -> None:
    if H.layout.dims != layout.dims:
        raise TeleportValueError(
            f"Hamiltonian layout {H.layout.dims} does not match state {layout.dims}"
        )
    if not H.is_hermitian():
        raise TeleportValueError("Hamiltonian is not Hermitian")


def _as_function(
    H: Hamiltonian, layout: HilbertLayout, t0: float
) -> Callable[[float], ComplexArray]:
    if isinstance(H, OperatorMatrix):
        _check_hamiltonian(H, layout)
        elements = np.array(H.elements)
        return lambda t: elements
    _check_hamiltonian(H(t0), layout)
    return lambda t: H(t).elements


def _max_frequency(elements: ComplexArray, collapse_rate: float = 0.0) -> float:
    return float(np.linalg.norm(elements, 2)) / TWO_PI + collapse_rate


def _rk4_step(
    rhs: Callable[[float, ComplexArray], ComplexArray],
    t: float,
    y: ComplexArray,
    dt: float,
) -> ComplexArray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _observables(
    states: list[QuantumState | DensityMatrix],
    e_ops: Mapping[str, OperatorMatrix] | None,
) -> dict[str, np.ndarray]:
    series = {}
    for name, op in (e_ops or {}).items():
        values = np.array([core.expectation(state, op) for state in states])
        series[name] = values.real if op.is_hermitian() else values
    return series


def evolve_unitary(
    state: QuantumState,
    H: Hamiltonian,
    t_span: tuple[float, float],
    cfg: IntegratorConfig | None = None,
    *,
    e_ops: Mapping[str, OperatorMatrix] | None = None,
) -> Trajectory:
    """
    Propagate a pure state under a Hermitian, possibly time-dependent,
    Hamiltonian.

    Args:
        state: Initial state.
        H: Constant operator or a function of time (µs) returning one, in
            angular units as built by ``hamiltonians``.
        t_span: Start and end time in µs.
        cfg: Step and snapshot settings, defaults to ``IntegratorConfig()``.
        e_ops: Named operators whose expectations are recorded at every
            snapshot.

    Returns:
        Trajectory: Snapshots renormalized to the initial norm.

    Raises:
        TeleportValueError: If H(t0) is not Hermitian or does not fit the state.
        StepBudgetError: If the step count exceeds ``cfg.max_steps``.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    hamiltonian = _as_function(H, state.layout, t0)
    plan = _plan_steps(t0, t1, _max_frequency(hamiltonian(t0)), cfg)

    def rhs(t: float, psi: ComplexArray) -> ComplexArray:
        return -1j * (hamiltonian(t) @ psi)

    psi = np.array(state.amplitudes)
    snapshots = [psi]
    for step in range(plan.n_steps):
        psi = _rk4_step(rhs, t0 + step * plan.dt, psi, plan.dt)
        if (step + 1) % plan.stride == 0:
            snapshots.append(psi)

    initial_norm = state.norm
    drift = abs(float(np.linalg.norm(psi)) - initial_norm)
    if drift > NORM_DRIFT_PER_US * (1.0 + t1 - t0):
        logger.warning(
            f"Norm drifted by {drift:.3e} over {t1 - t0:.6g} µs; "
            "consider a smaller dt"
        )
    states = [
        QuantumState(
            state.layout, amplitudes * initial_norm / np.linalg.norm(amplitudes)
        )
        for amplitudes in snapshots
    ]
    return Trajectory(
        plan.snapshot_times(t0), tuple(states), _observables(states, e_ops)
    )


def evolve_lindblad(
    rho: DensityMatrix,
    H: Hamiltonian,
    collapse: CollapseSet,
    t_span: tuple[float, float],
    cfg: IntegratorConfig | None = None,
    *,
    e_ops: Mapping[str, OperatorMatrix] | None = None,
) -> Trajectory:
    """
    Integrate dρ/dt = -i[H,ρ] + Σ_k (L_k ρ L_k† - ½{L_k†L_k, ρ}).

    ρ is symmetrized after every step. Snapshots are checked for
    positivity; eigenvalues are never clipped.

    Raises:
        TeleportValueError: If ``rho`` is not a valid density matrix, or H
            or a collapse operator does not fit its layout.
        StepBudgetError: If the step count exceeds ``cfg.max_steps``.
        IntegrationQualityError: If a snapshot has an eigenvalue below -1e-6.
    """
    cfg = cfg or IntegratorConfig()
    try:
        rho.validate()
    except TeleportValueError as e:
        raise TeleportValueError(f"Initial state is not a density matrix: {e}") from e

    t0, t1 = float(t_span[0]), float(t_span[1])
    hamiltonian = _as_function(H, rho.layout, t0)
    jumps = []
    for channel in collapse:
        if channel.operator.layout.dims != rho.layout.dims:
            raise TeleportValueError(
                f"Collapse channel '{channel.name}' does not fit layout {rho.layout.dims}"
            )
        jumps.append(channel.scaled)
    damping = 0.5 * sum(
        (jump.conj().T @ jump for jump in jumps),
        np.zeros_like(rho.elements),
    )
    plan = _plan_steps(
        t0, t1, _max_frequency(hamiltonian(t0), collapse.total_rate), cfg
    )

    def rhs(t: float, r: ComplexArray) -> ComplexArray:
        effective = hamiltonian(t) - 1j * damping
        drho = -1j * (effective @ r - r @ effective.conj().T)
        for jump in jumps:
            drho = drho + jump @ r @ jump.conj().T
        return drho

    r = np.array(rho.elements)
    snapshots = [r]
    for step in range(plan.n_steps):
        r = _rk4_step(rhs, t0 + step * plan.dt, r, plan.dt)
        r = 0.5 * (r + r.conj().T)
        if (step + 1) % plan.stride == 0:
            lowest = float(np.linalg.eigvalsh(r)[0])
            if lowest < NEGATIVE_EIGENVALUE_LIMIT:
                raise IntegrationQualityError(
                    f"Density matrix eigenvalue {lowest:.3e} at "
                    f"t = {t0 + (step + 1) * plan.dt:.6g} µs; reduce dt"
                )
            snapshots.append(r)

    drift = abs(np.trace(r) - np.trace(rho.elements))
    if drift > TRACE_DRIFT:
        logger.warning(f"Trace drifted by {drift:.3e} over {t1 - t0:.6g} µs")
    states = [DensityMatrix(rho.layout, elements) for elements in snapshots]
    return Trajectory(
        plan.snapshot_times(t0), tuple(states), _observables(states, e_ops)
    )


def jc_unitary(layout: HilbertLayout, qubit: int, angle: float) -> OperatorMatrix:
    """
    Exact resonant Jaynes-Cummings propagator for a pulse of area ``angle``.

    On each block {|↑,n⟩, |↓,n+1⟩} the state rotates by θ_n = (angle/2)√(n+1):
    |↑,n⟩ → cos θ_n|↑,n⟩ - i sin θ_n|↓,n+1⟩. |↓,0⟩ and |↑,n_max⟩ are fixed.
    """
    qubit_position = layout.index(hamiltonians.qubit_label(qubit))
    resonator_position = layout.index(Subsystem.RESONATOR)
    n_max = layout.dims[resonator_position] - 1

    unitary = np.eye(layout.dimension, dtype=complex)
    for indices in np.ndindex(*layout.dims):
        photons = indices[resonator_position]
        if indices[qubit_position] != core.UP or photons == n_max:
            continue
        partner = list(indices)
        partner[qubit_position] = core.DOWN
        partner[resonator_position] = photons + 1
        upper = np.ravel_multi_index(indices, layout.dims)
        lower = np.ravel_multi_index(tuple(partner), layout.dims)

        theta = 0.5 * angle * math.sqrt(photons + 1)
        unitary[upper, upper] = unitary[lower, lower] = math.cos(theta)
        unitary[upper, lower] = unitary[lower, upper] = -1j * math.sin(theta)
    return OperatorMatrix(layout, unitary)


def jc_pulse_duration(
    angle: float, params: DeviceParams, qubit: int = 0
) -> float:
    """Resonant interaction time angle/(2·2πg) in µs."""
    hamiltonians.require_coupled(params, qubit)
    if params.g <= 0.0:
        raise TeleportConfigurationError(
            "A Jaynes-Cummings pulse needs a non-zero coupling g"
        )
    if angle < 0.0:
        raise TeleportValueError(f"Pulse angle must be non-negative, got {angle}")
    return angle / (2.0 * TWO_PI * params.g)


def jc_pulse(
    state: QuantumState | DensityMatrix,
    qubit: int,
    angle: float,
    params: DeviceParams,
    mode: PulseMode = PulseMode.IDEAL,
    cfg: IntegratorConfig | None = None,
) -> QuantumState | DensityMatrix:
    """
    Resonant qubit-resonator exchange for a pulse of area ``angle``.

    The qubit is taken as tuned into resonance with the resonator for the
    pulse; ideal mode applies ``jc_unitary``, integrated mode propagates the
    rotating-frame Jaynes-Cummings Hamiltonian for ``jc_pulse_duration``.

    Raises:
        TeleportConfigurationError: If the qubit is uncoupled.
    """
    duration = jc_pulse_duration(angle, params, qubit)
    if angle == 0.0:
        return state

    match PulseMode(mode):
        case PulseMode.IDEAL:
            return core.apply_operator(
                jc_unitary(state.layout, qubit, angle), state
            )
        case PulseMode.INTEGRATED:
            hamiltonian = hamiltonians.resonant_jaynes_cummings(
                params, qubit, state.layout
            )
            if isinstance(state, QuantumState):
                trajectory = evolve_unitary(
                    state, hamiltonian, (0.0, duration), cfg
                )
            else:
                trajectory = evolve_lindblad(
                    state, hamiltonian, CollapseSet(), (0.0, duration), cfg
                )
            return trajectory.final


def _sinusoid(
    t: RealArray, amplitude: float, frequency: float, phase: float, offset: float
) -> RealArray:
    return amplitude * np.sin(TWO_PI * frequency * t + phase) + offset


def _initial_guess(times: RealArray, values: RealArray) -> list[float]:
    offset = float(values.mean())
    spacing = float(np.mean(np.diff(times)))
    spectrum = np.fft.rfft(values - offset)
    frequencies = np.fft.rfftfreq(values.size, d=spacing)
    peak = int(np.argmax(np.abs(spectrum[1:]))) + 1
    frequency = float(frequencies[peak])
    amplitude = 2.0 * float(np.abs(spectrum[peak])) / values.size
    phase = float(np.angle(spectrum[peak])) + 0.5 * math.pi
    phase -= TWO_PI * frequency * float(times[0])
    return [amplitude, frequency, phase, offset]


def fit_oscillation(
    times: RealArray, values: RealArray, max_iterations: int = FIT_MAX_ITERATIONS
) -> OscillationFit:
    """
    Least-squares fit of A sin(2πft + φ) + c to a sampled signal.

    Args:
        times: Sample times in µs, increasing.
        values: Real samples.
        max_iterations: Function-evaluation bound for the optimizer.

    Returns:
        OscillationFit: Frequency in linear MHz and amplitude both positive,
            phase in [0, 2π), offset and RMS residual.

    Raises:
        FitError: With fewer than 10 samples, a constant signal, fewer than
            two periods in the window, or when the optimizer does not converge.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise TeleportValueError("Times and values must be equal-length 1-D series")
    if times.size < MIN_FIT_SAMPLES:
        raise FitError(
            f"Need at least {MIN_FIT_SAMPLES} samples to fit, got {times.size}"
        )
    if np.ptp(values) < 1e-12:
        raise FitError("Signal is constant, there is no oscillation to fit", 0.0)

    guess = _initial_guess(times, values)
    try:
        (amplitude, frequency, phase, offset), _ = curve_fit(
            _sinusoid, times, values, p0=guess, maxfev=max_iterations
        )
    except RuntimeError as e:
        residual = values - _sinusoid(times, *guess)
        raise FitError(
            f"Oscillation fit did not converge: {e}",
            float(np.sqrt(np.mean(residual**2))),
        ) from e

    if frequency < 0.0:
        frequency, phase = -frequency, math.pi - phase
    if amplitude < 0.0:
        amplitude, phase = -amplitude, phase + math.pi
    residual = values - _sinusoid(times, amplitude, frequency, phase, offset)
    rms = float(np.sqrt(np.mean(residual**2)))

    span = float(times[-1] - times[0])
    if frequency * span < MIN_FIT_PERIODS - 1e-6:
        raise FitError(
            f"Window of {span:.6g} µs holds {frequency * span:.2f} periods, "
            f"at least {MIN_FIT_PERIODS:g} are needed",
            rms,
        )

    fit = OscillationFit(
        frequency=float(frequency),
        amplitude=float(amplitude),
        phase=float(phase % TWO_PI),
        offset=float(offset),
        rms_residual=rms,
    )
    logger.info(
        f"Fitted oscillation at {fit.frequency:.6g} MHz, amplitude "
        f"{fit.amplitude:.4g}, rms residual {fit.rms_residual:.3e}"
    )
    return fit
