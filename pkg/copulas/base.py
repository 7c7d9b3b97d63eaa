"""
Classe de base des copules bivariées

Chaque famille implémente ses primitives non tournées (_cdf0, _logpdf0, _h0)
sur l'intérieur du carré unité. La base applique les rotations :

    C_90(u, v)  = u - C(1 - v, u)          c_90(u, v)  = c(1 - v, u)
    C_180(u, v) = u + v - 1 + C(1-u, 1-v)  c_180(u, v) = c(1 - u, 1 - v)
    C_270(u, v) = v - C(v, 1 - u)          c_270(u, v) = c(v, 1 - u)

h(u, v) = dC(u, v)/dv (loi de U sachant V = v). Les familles de base sont
échangeables, donc dC(u, v)/du s'obtient par la famille transposée
(90 <-> 270).
"""
import copy
from abc import ABC, abstractmethod
from enum import Enum
from typing import Dict, List

import numpy as np

from core.exceptions import DomainError, ParamError

ROTATIONS = (0, 90, 180, 270)
_TRANSPOSE = {0: 0, 90: 270, 180: 180, 270: 90}


class CopulaTag(str, Enum):
    """Familles de copules"""
    INDEPENDENT = "Independent"
    GAUSSIAN = "Gaussian"
    STUDENT_T = "StudentT"
    CLAYTON = "Clayton"
    FRANK = "Frank"
    GUMBEL = "Gumbel"
    PLACKETT = "Plackett"


def check_open_unit(*arrays: np.ndarray) -> None:
    """DomainError si une coordonnée est hors de (0, 1)"""
    for a in arrays:
        if np.any(~np.isfinite(a)) or np.any(a <= 0.0) or np.any(a >= 1.0):
            raise DomainError("évaluation hors de l'intérieur du cube unité")


class BaseCopula(ABC):
    """Copule bivariée paramétrique avec rotation"""

    tag: CopulaTag
    short: str
    n_params: int = 0
    rotatable: bool = False

    def __init__(self, rotation: int = 0):
        if rotation not in ROTATIONS:
            raise ParamError("rotation invalide", {"rotation": rotation})
        if rotation and not self.rotatable:
            raise ParamError(f"{self.tag.value} ne se tourne pas", {"rotation": rotation})
        self.rotation = rotation

    def __repr__(self) -> str:
        pars = ", ".join(f"{k}={v:.6g}" for k, v in self.param_dict().items())
        rot = f", rotation={self.rotation}" if self.rotation else ""
        return f"{self.__class__.__name__}({pars}{rot})"

    # ------------------------------------------------------------------
    # Paramètres
    # ------------------------------------------------------------------

    @property
    def code(self) -> str:
        """Code court (ex. cl90)"""
        return f"{self.short}{self.rotation}" if self.rotation else self.short

    @abstractmethod
    def param_dict(self) -> Dict[str, float]:
        pass

    @abstractmethod
    def to_free(self) -> np.ndarray:
        """Paramètres -> espace non contraint"""
        pass

    @classmethod
    @abstractmethod
    def from_free(cls, z: np.ndarray, rotation: int = 0) -> "BaseCopula":
        """Espace non contraint -> famille"""
        pass

    @classmethod
    @abstractmethod
    def default(cls, rotation: int = 0) -> "BaseCopula":
        """Point de départ des estimations"""
        pass

    def transposed(self) -> "BaseCopula":
        """Famille de (V, U)"""
        twin = copy.copy(self)
        twin.rotation = _TRANSPOSE[self.rotation]
        return twin

    # ------------------------------------------------------------------
    # Primitives non tournées (intérieur du carré)
    # ------------------------------------------------------------------

    @abstractmethod
    def _cdf0(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def _logpdf0(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def _h0(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """dC0(u, v)/dv"""
        pass

    # ------------------------------------------------------------------
    # Interface publique (rotations appliquées)
    # ------------------------------------------------------------------

    def cdf(self, u, v) -> np.ndarray:
        """Fonction de répartition sur le carré fermé [0, 1]^2"""
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        if np.any(u < 0) or np.any(u > 1) or np.any(v < 0) or np.any(v > 1):
            raise DomainError("cdf hors du carré unité")
        out = np.empty(u.shape, dtype=float)
        # Bords : C(0, v) = C(u, 0) = 0, C(u, 1) = u, C(1, v) = v
        zero = (u == 0) | (v == 0)
        v_one = (v == 1) & ~zero
        u_one = (u == 1) & ~zero & ~v_one
        inner = ~(zero | v_one | u_one)
        out[zero] = 0.0
        out[v_one] = u[v_one]
        out[u_one] = v[u_one]
        if np.any(inner):
            out[inner] = self._rotated_cdf(u[inner], v[inner])
        return np.clip(out, 0.0, 1.0)

    def _rotated_cdf(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        r = self.rotation
        if r == 0:
            return self._cdf0(u, v)
        if r == 90:
            return u - self._cdf0(1.0 - v, u)
        if r == 180:
            return u + v - 1.0 + self._cdf0(1.0 - u, 1.0 - v)
        return v - self._cdf0(v, 1.0 - u)

    def logpdf(self, u, v) -> np.ndarray:
        """Log-densité (DomainError au bord du carré)"""
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        check_open_unit(u, v)
        r = self.rotation
        if r == 0:
            return self._logpdf0(u, v)
        if r == 90:
            return self._logpdf0(1.0 - v, u)
        if r == 180:
            return self._logpdf0(1.0 - u, 1.0 - v)
        return self._logpdf0(v, 1.0 - u)

    def pdf(self, u, v) -> np.ndarray:
        return np.exp(self.logpdf(u, v))

    def h(self, u, v) -> np.ndarray:
        """h(u, v) = dC(u, v)/dv"""
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        check_open_unit(u, v)
        r = self.rotation
        if r == 0:
            out = self._h0(u, v)
        elif r == 90:
            out = self._h0(u, 1.0 - v)
        elif r == 180:
            out = 1.0 - self._h0(1.0 - u, 1.0 - v)
        else:
            out = 1.0 - self._h0(1.0 - u, v)
        return np.clip(out, 0.0, 1.0)

    def h_first(self, u, v) -> np.ndarray:
        """dC(u, v)/du (loi de V sachant U = u)"""
        return self.transposed().h(v, u)


def free_params_count(families: List[BaseCopula]) -> int:
    return int(sum(f.n_params for f in families))


def split_free(z: np.ndarray, counts: List[int]) -> List[np.ndarray]:
    """Découper un vecteur libre selon le nombre de paramètres de chaque bloc"""
    out, pos = [], 0
    for c in counts:
        out.append(np.asarray(z[pos:pos + c], dtype=float))
        pos += c
    return out


def tanh_bounded(z: float, cap: float = 1.0 - 1e-9) -> float:
    return float(np.clip(np.tanh(z), -cap, cap))


def arctanh_bounded(r: float, cap: float = 1.0 - 1e-9) -> float:
    return float(np.arctanh(np.clip(r, -cap, cap)))
