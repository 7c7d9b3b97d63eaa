"""
Pilote du simplexe (Nelder-Mead) dans l'espace libre

Critère d'arrêt : variation relative de la log-vraisemblance < rel_tol, ou
max_iter itérations. Quand le simplexe s'arrête sans converger, tenacity
relance depuis le meilleur point perturbé.
"""
from typing import Callable, Optional, Tuple

import numpy as np
from loguru import logger
from scipy import optimize
from tenacity import Retrying, retry_if_result, stop_after_attempt

from core.config import settings
from core.exceptions import DomainError, MatrixError, ParamError
from core.models import OptimReport

PERTURBATION_SCALE = 0.1


def safe_objective(fun: Callable[[np.ndarray], float]) -> Callable[[np.ndarray], float]:
    """Objectif à minimiser, +inf remplacé par une grande valeur finie"""
    def wrapped(z: np.ndarray) -> float:
        try:
            val = float(fun(z))
        except (ArithmeticError, ValueError, np.linalg.LinAlgError, ParamError, MatrixError, DomainError):
            return 1e300
        return val if np.isfinite(val) else 1e300
    return wrapped


class SimplexDriver:
    """Minimisation Nelder-Mead avec relances"""

    def __init__(
        self,
        fun: Callable[[np.ndarray], float],
        label: str = "simplexe",
        max_iter: Optional[int] = None,
        rel_tol: Optional[float] = None,
        restarts: Optional[int] = None,
        seed: int = 0
    ):
        self.fun = safe_objective(fun)
        self.label = label
        self.max_iter = max_iter or settings.simplex_max_iter
        self.rel_tol = rel_tol or settings.simplex_rel_tol
        self.restarts = settings.simplex_restarts if restarts is None else restarts
        self.rng = np.random.default_rng(seed)
        self._best: Optional[optimize.OptimizeResult] = None
        self._start: Optional[np.ndarray] = None
        self._attempts = 0
        self._iterations = 0
        self._evaluations = 0
        self._converged = False

    def _attempt(self) -> optimize.OptimizeResult:
        start = self._start
        if self._best is not None:
            start = self._best.x + self.rng.normal(scale=PERTURBATION_SCALE, size=self._best.x.size)
            logger.debug(f"⚠️ {self.label} : relance {self._attempts} depuis un point perturbé")
        self._attempts += 1
        f0 = self.fun(start)
        fatol = self.rel_tol * max(1.0, abs(f0)) if f0 < 1e300 else self.rel_tol
        res = optimize.minimize(
            self.fun, start, method="Nelder-Mead",
            options={"maxiter": self.max_iter, "maxfev": 4 * self.max_iter, "xatol": 1e-10, "fatol": fatol}
        )
        self._iterations += int(res.nit)
        self._evaluations += int(res.nfev)
        self._converged = self._converged or bool(res.success)
        if self._best is None or res.fun <= self._best.fun:
            self._best = res
        return res

    def run(self, x0: np.ndarray) -> Tuple[np.ndarray, OptimReport]:
        """
        Minimiser à partir de x0

        Returns:
            (meilleur point, rapport)
        """
        self._start = np.asarray(x0, dtype=float)
        self._best = None
        self._attempts = self._iterations = self._evaluations = 0
        self._converged = False
        retrying = Retrying(
            stop=stop_after_attempt(self.restarts + 1),
            retry=retry_if_result(lambda r: not r.success),
            retry_error_callback=lambda state: state.outcome.result(),
        )
        retrying(self._attempt)
        best = self._best
        report = OptimReport(
            converged=self._converged and best.fun < 1e300,
            iterations=self._iterations,
            evaluations=self._evaluations,
            loglik=-float(best.fun),
            restarts=self._attempts - 1,
            message=str(best.message),
        )
        logger.debug(
            f"{self.label} : ll={report.loglik:.6f}, iter={report.iterations}, "
            f"relances={report.restarts}, convergé={report.converged}"
        )
        return np.asarray(best.x, dtype=float), report


def logistic(z: float) -> float:
    return float(1.0 / (1.0 + np.exp(-z))) if z >= 0 else float(np.exp(z) / (1.0 + np.exp(z)))


def logit(p: float) -> float:
    p = min(max(p, 1e-12), 1.0 - 1e-12)
    return float(np.log(p / (1.0 - p)))


def persistence_from_free(z1: float, z2: float, cap: float) -> Tuple[float, float]:
    """(z1, z2) -> (x, y) avec x, y >= 0 et x + y <= cap"""
    s = cap * logistic(z1)
    x = s * logistic(z2)
    return x, s - x


def persistence_to_free(x: float, y: float, cap: float) -> Tuple[float, float]:
    """Inverse de persistence_from_free"""
    s = x + y
    z1 = logit(s / cap)
    z2 = logit(x / s) if s > 0 else 0.0
    return z1, z2
