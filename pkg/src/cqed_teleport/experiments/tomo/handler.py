import numpy as np

from cqed_teleport import core
from cqed_teleport._enums import ChannelMode
from cqed_teleport._logger import logger
from cqed_teleport._types import ResultSet, Row
from cqed_teleport.handlers import ExperimentHandler
from cqed_teleport.protocol import channel_tomography, prepare_channel


class TomoHandler(ExperimentHandler):
    """Pauli tomography of the resonator-qubit 2 channel state."""

    columns = (
        "scenario",
        "trial",
        "seed",
        "shots",
        "fidelity",
        "concurrence",
        "min_eigenvalue",
    )

    def _trial(self, trial: int, seed: int, rng: np.random.Generator) -> Row:
        settings = self.cfg.tomography
        state = prepare_channel(
            settings.channel, self.params, cfg=self.cfg.integrator
        )
        target = prepare_channel(
            ChannelMode.IDEAL, self.params.model_copy(update={"n_max": 1})
        )
        _, rho = channel_tomography(state, settings.shots, rng)
        return {
            "scenario": self.cfg.name,
            "trial": trial,
            "seed": seed,
            "shots": settings.shots or 0,
            "fidelity": core.fidelity(target, rho),
            "concurrence": core.concurrence(rho),
            "min_eigenvalue": rho.min_eigenvalue,
        }

    def run(self) -> ResultSet:
        rows = self._run_trials(self._trial)
        best = max(row["fidelity"] for row in rows)
        logger.info(f"{self.cfg.name}: channel tomography fidelity up to {best:.6f}")
        return self._result(rows, trials=len(rows), best_fidelity=best)
