import math

import numpy as np

from cqed_teleport import core, hamiltonians, pulses
from cqed_teleport._enums import Axis, Subsystem
from cqed_teleport._logger import logger
from cqed_teleport._types import ResultSet
from cqed_teleport.config import IntegratorConfig
from cqed_teleport.core import HilbertLayout
from cqed_teleport.dynamics import evolve_unitary, fit_oscillation
from cqed_teleport.handlers import ExperimentHandler
from cqed_teleport.hamiltonians import TWO_PI


class RabiHandler(ExperimentHandler):
    """
    Drive one qubit through the resonator at its dressed frequency and fit
    the excited-state population to recover the Rabi frequency.
    """

    columns = (
        "scenario",
        "qubit",
        "target_mhz",
        "fitted_mhz",
        "relative_error",
        "rms_residual",
    )
    series_columns = ("time_us", "p_up", "fit")

    def _layout(self) -> HilbertLayout:
        label = hamiltonians.qubit_label(self.cfg.rabi.qubit)
        return HilbertLayout((2, self.params.n_max + 1), (label, Subsystem.RESONATOR))

    def run(self) -> ResultSet:
        qubit = self.cfg.rabi.qubit
        hamiltonians.require_coupled(self.params, qubit)
        # A full-turn x pulse carries the drive; it stays on for the whole window.
        drive = pulses.compile_rotation(Axis.X, TWO_PI, self.params, qubit)
        target = drive.amplitude

        layout = self._layout()
        p_up = core.embed(
            np.diag([0.0, 1.0]), layout, hamiltonians.qubit_label(qubit)
        )
        integrator = IntegratorConfig.model_validate(
            {**self.cfg.integrator.model_dump(), "max_snapshots": self.cfg.rabi.samples}
        )
        trajectory = evolve_unitary(
            core.basis_state(layout, (core.DOWN, 0)),
            pulses.control_hamiltonian(drive, qubit, self.params, layout),
            (0.0, self.cfg.rabi.duration),
            integrator,
            e_ops={"p_up": p_up},
        )
        population = trajectory.observables["p_up"]
        fit = fit_oscillation(trajectory.times, population)
        relative_error = abs(fit.frequency - target) / target
        logger.info(
            f"Rabi frequency of {hamiltonians.qubit_label(qubit)}: fitted "
            f"{fit.frequency:.6g} MHz, expected {target:.6g} MHz "
            f"(relative error {relative_error:.2e})"
        )

        result = self._result(
            [
                {
                    "scenario": self.cfg.name,
                    "qubit": qubit + 1,
                    "target_mhz": target,
                    "fitted_mhz": fit.frequency,
                    "relative_error": relative_error,
                    "rms_residual": fit.rms_residual,
                }
            ],
            relative_error=relative_error,
        )
        result.series = [
            {
                "time_us": float(t),
                "p_up": float(p),
                "fit": fit.amplitude * math.sin(TWO_PI * fit.frequency * t + fit.phase)
                + fit.offset,
            }
            for t, p in zip(trajectory.times, population)
        ]
        return result
