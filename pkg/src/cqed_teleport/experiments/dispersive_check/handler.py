from cqed_teleport import hamiltonians
from cqed_teleport._logger import logger
from cqed_teleport._types import ResultSet, Rows
from cqed_teleport.handlers import ExperimentHandler


class DispersiveCheckHandler(ExperimentHandler):
    """
    Compare χ = g²/Δ against the exact Jaynes-Cummings level shift of qubit
    1 at several g/Δ ratios. The relative deviation grows like (g/Δ)², and
    ``bound`` is twice that.
    """

    columns = (
        "scenario",
        "g_over_delta",
        "g_mhz",
        "delta_mhz",
        "chi_mhz",
        "exact_shift_mhz",
        "relative_error",
        "bound",
    )

    def run(self) -> ResultSet:
        g = hamiltonians.coupling(self.params, 0)
        rows: Rows = []
        for ratio in self.cfg.dispersive.ratios:
            delta = g / ratio
            detuned = self.params.model_copy(
                update={
                    "omega_a": (self.params.omega_r + delta, self.params.omega_a[1])
                }
            )
            chi = hamiltonians.dispersive_shift(g, delta)
            exact = hamiltonians.exact_dressed_shift(detuned, 0)
            relative_error = abs(exact - chi) / abs(chi)
            rows.append(
                {
                    "scenario": self.cfg.name,
                    "g_over_delta": ratio,
                    "g_mhz": g,
                    "delta_mhz": delta,
                    "chi_mhz": chi,
                    "exact_shift_mhz": exact,
                    "relative_error": relative_error,
                    "bound": 2.0 * ratio**2,
                }
            )
            logger.debug(
                f"g/Δ = {ratio:g}: χ = {chi:.6g} MHz, exact {exact:.6g} MHz"
            )

        within = all(row["relative_error"] <= row["bound"] for row in rows)
        if not within:
            logger.warning("χ deviates from the exact shift by more than 2(g/Δ)²")
        return self._result(rows, within_bound=int(within))
