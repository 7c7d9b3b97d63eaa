"""
Registre des familles de copules et interface publique

Codes courts : in, ga, t, cl, fr, gu, pl, suivis d'un suffixe de rotation
éventuel (cl90, gu180, ...).
"""
import re
from typing import Dict, Optional, Tuple, Type, Union

import numpy as np

from copulas.base import BaseCopula
from copulas.clayton import ClaytonCopula
from copulas.elliptical_nd import EllipticalCopulaNd
from copulas.frank import FrankCopula
from copulas.gaussian import GaussianCopula
from copulas.gumbel import GumbelCopula
from copulas.independent import IndependentCopula
from copulas.plackett import PlackettCopula
from copulas.student_t import StudentTCopula
from core.exceptions import DomainError, ParamError

FAMILY_CLASSES: Dict[str, Type[BaseCopula]] = {
    "in": IndependentCopula,
    "ga": GaussianCopula,
    "t": StudentTCopula,
    "cl": ClaytonCopula,
    "fr": FrankCopula,
    "gu": GumbelCopula,
    "pl": PlackettCopula,
}

# Menu des 12 familles bivariées, dans l'ordre d'énumération
MENU_12: Tuple[str, ...] = (
    "ga", "fr", "pl",
    "cl", "cl90", "cl180", "cl270",
    "gu", "gu90", "gu180", "gu270",
    "t",
)

_CODE_RE = re.compile(r"^(in|ga|t|cl|fr|gu|pl)(90|180|270)?$")

AnyCopula = Union[BaseCopula, EllipticalCopulaNd]


def parse_family_code(code: str) -> Tuple[Type[BaseCopula], int]:
    """'cl90' -> (ClaytonCopula, 90)"""
    m = _CODE_RE.match(code.strip().lower())
    if not m:
        raise ParamError(f"Code de famille inconnu : {code}")
    cls = FAMILY_CLASSES[m.group(1)]
    rotation = int(m.group(2) or 0)
    if rotation and not cls.rotatable:
        raise ParamError(f"La famille {cls.tag.value} ne se tourne pas", {"code": code})
    return cls, rotation


def make_family(code: str, free: Optional[np.ndarray] = None) -> BaseCopula:
    """Instancier une famille au point de départ ou depuis l'espace libre"""
    cls, rotation = parse_family_code(code)
    if free is None:
        return cls.default(rotation=rotation)
    return cls.from_free(np.asarray(free, dtype=float), rotation=rotation)


# ====================================================================
# INTERFACE PUBLIQUE
# ====================================================================

def copula_cdf(fam: AnyCopula, u: np.ndarray) -> np.ndarray:
    """C(u) pour une famille bivariée (u[..., 0], u[..., 1]) ou de dimension N"""
    u = np.asarray(u, dtype=float)
    if isinstance(fam, EllipticalCopulaNd):
        return fam.cdf(u)
    if u.shape[-1] != 2:
        raise DomainError("les familles bivariées exigent N = 2", {"N": u.shape[-1]})
    return fam.cdf(u[..., 0], u[..., 1])


def copula_logdensity(fam: AnyCopula, u: np.ndarray) -> np.ndarray:
    """log c(u)"""
    u = np.asarray(u, dtype=float)
    if isinstance(fam, EllipticalCopulaNd):
        return fam.logpdf(u)
    if u.shape[-1] != 2:
        raise DomainError("les familles bivariées exigent N = 2", {"N": u.shape[-1]})
    return fam.logpdf(u[..., 0], u[..., 1])


def h_function(fam: BaseCopula, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """h(u, v) = dC(u, v)/dv"""
    if not isinstance(fam, BaseCopula):
        raise ParamError("h n'est défini que pour les familles bivariées")
    return fam.h(u, v)


def copula_h_first(fam: BaseCopula, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """dC(u, v)/du (famille transposée)"""
    if not isinstance(fam, BaseCopula):
        raise ParamError("h n'est défini que pour les familles bivariées")
    return fam.h_first(u, v)
