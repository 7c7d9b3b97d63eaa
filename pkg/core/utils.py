"""
Utilitaires généraux
"""
import hashlib
import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
from loguru import logger

from core.config import settings
from core.exceptions import ParamError

PACKAGE_VERSION = "1.0.0"


def setup_logging(level: Optional[str] = None, log_dir: Optional[str] = None):
    """Configurer les logs (stderr + fichier journalier)"""
    level = (level or settings.log_level).upper()
    log_dir = log_dir or settings.log_dir

    logger.remove()
    logger.add(sys.stderr, level=level, format="{time:HH:mm:ss} | {level} | {message}")
    logger.add(
        f"{log_dir}/app_{{time:YYYY-MM-DD}}.log",
        rotation="1 day",
        retention="30 days",
        level=level,
        format="{time:YYYY-MM-DD HH:mm:ss} | {level} | {message}"
    )
    logger.info("Logging configuré")


def canonical_json(payload: Any) -> str:
    """JSON canonique (clés triées, sans espaces superflus)"""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_json_default)


def config_hash(payload: Dict[str, Any]) -> str:
    """Hash court d'une configuration"""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()[:12]


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "isoformat"):
        return obj.isoformat()
    raise TypeError(f"Type non sérialisable : {type(obj).__name__}")


def write_json(path: Path, payload: Dict[str, Any], provenance: Optional[Dict[str, Any]] = None) -> Path:
    """Écrire un artefact JSON déterministe (avec bloc de provenance)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = dict(payload)
    if provenance is not None:
        body["provenance"] = provenance
    path.write_text(json.dumps(body, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")
    logger.debug(f"Artefact écrit : {path}")
    return path


def read_json(path: Path) -> Dict[str, Any]:
    """Lire un artefact JSON"""
    return json.loads(Path(path).read_text(encoding="utf-8"))


def clamp_unit(u: np.ndarray, eps: Optional[float] = None) -> "tuple[np.ndarray, int]":
    """
    Ramener des probabilités dans [eps, 1 - eps]

    Returns:
        (valeurs bornées, nombre de valeurs modifiées)
    """
    eps = settings.clamp_eps if eps is None else eps
    u = np.asarray(u, dtype=float)
    clamped = np.clip(u, eps, 1.0 - eps)
    count = int(np.count_nonzero(clamped != u))
    return clamped, count


def information_criteria(ll: float, k: int, n: int) -> "tuple[float, float]":
    """AIC = -2L + 2k, BIC = -2L + k ln n"""
    if n < 1:
        raise ParamError("n doit être >= 1", {"n": n})
    return -2.0 * ll + 2.0 * k, -2.0 * ll + k * float(np.log(n))


def pair_labels(n: int) -> "list[tuple[int, int]]":
    """Paires (i, j), i < j, dans l'ordre lexicographique"""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]
