import statistics
from collections import Counter

import numpy as np

from cqed_teleport._logger import logger
from cqed_teleport._types import ResultSet, Row
from cqed_teleport.handlers import ExperimentHandler
from cqed_teleport.protocol import BELL_ORDER, run_teleportation


class TeleportHandler(ExperimentHandler):
    columns = ("scenario", "trial", "seed", "outcome", "fidelity", "duration_us")

    def _trial(self, trial: int, seed: int, rng: np.random.Generator) -> Row:
        protocol = self.cfg.protocol
        c0, c1 = protocol.coefficients(rng)
        result = run_teleportation(
            c0,
            c1,
            rng,
            mode=protocol.mode,
            noise=protocol.noise,
            params=self.params,
            cfg=self.cfg.integrator,
            apply_feed_forward=protocol.feed_forward,
            all_branches=protocol.all_branches,
        )
        row: Row = {
            "scenario": self.cfg.name,
            "trial": trial,
            "seed": seed,
            "outcome": str(result.outcome),
            "fidelity": result.fidelity,
            "duration_us": result.protocol_duration,
        }
        if result.expected_fidelity is not None:
            row["expected_fidelity"] = result.expected_fidelity
        return row

    def run(self) -> ResultSet:
        rows = self._run_trials(self._trial)
        counts = Counter(row["outcome"] for row in rows)
        summary = {
            "trials": len(rows),
            "mean_fidelity": statistics.fmean(row["fidelity"] for row in rows),
            **{f"count_{label}": counts.get(str(label), 0) for label in BELL_ORDER},
        }
        expected = [
            row["expected_fidelity"] for row in rows if "expected_fidelity" in row
        ]
        if expected:
            summary["mean_expected_fidelity"] = statistics.fmean(expected)
        logger.info(
            f"{self.cfg.name}: {len(rows)} trial(s), "
            f"mean fidelity {summary['mean_fidelity']:.6f}"
        )
        result = self._result(rows, **summary)
        if expected:
            result.columns.append("expected_fidelity")
        return result
