"""
Pipeline : Artefacts d'un run

Fichiers plats JSON / CSV sous <out>/<config_hash>/ :
    returns.csv, garch.json, dcc.json, residuals.csv, intervals.json,
    fits/<méthode>_<item>.json, evaluations.json, report.csv

Chaque JSON porte un bloc de provenance ; aucun horodatage n'est écrit.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from core.exceptions import ConfigError
from core.models import CorrInterval, DccFit, DecompTag, EvalReport, GarchFit, NODCC, PipelineConfig
from core.utils import PACKAGE_VERSION, config_hash, read_json, write_json

CSV_FLOAT_FORMAT = "%.10g"
FAILED_MARKER = ".failed"


def run_directory(config: PipelineConfig) -> Path:
    return Path(config.out_dir) / config_hash(config.hash_payload())


def provenance(config: PipelineConfig) -> Dict[str, Any]:
    """Bloc de provenance commun à tous les artefacts JSON"""
    payload = config.hash_payload()
    return {
        "config_hash": config_hash(payload),
        "config": payload,
        "decomp": [t.value for t in config.decomp],
        "tau": config.tau,
        "package_version": PACKAGE_VERSION,
    }


def write_csv(path: Path, frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path


def require(path: Path) -> Path:
    """Artefact attendu d'une étape précédente"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Artefact manquant : {path}", {"path": str(path)})
    return path


# ====================================================================
# PARAMÈTRES
# ====================================================================

def write_garch(run_dir: Path, fits: List[GarchFit], prov: Dict[str, Any]) -> Path:
    return write_json(run_dir / "garch.json", {"assets": [f.model_dump(mode="json") for f in fits]}, prov)


def read_garch(run_dir: Path) -> List[GarchFit]:
    return [GarchFit(**row) for row in read_json(require(run_dir / "garch.json"))["assets"]]


def write_dcc(run_dir: Path, fit: Optional[DccFit], prov: Dict[str, Any]) -> Path:
    payload = {"dcc": fit.model_dump(mode="json") if fit is not None else None}
    return write_json(run_dir / "dcc.json", payload, prov)


def read_dcc(run_dir: Path) -> Optional[DccFit]:
    row = read_json(require(run_dir / "dcc.json"))["dcc"]
    return DccFit(**row) if row is not None else None


# ====================================================================
# SÉRIES
# ====================================================================

def write_residuals(
    run_dir: Path,
    dates: List[Any],
    split_index: int,
    residuals: Dict[str, np.ndarray],
    asset_names: List[str]
) -> Path:
    """Colonnes <méthode>:<actif> ; nodcc contient xi, les autres epsilon"""
    frame = pd.DataFrame({"date": [d.isoformat() for d in dates]})
    frame["in_sample"] = (np.arange(len(dates)) < split_index).astype(int)
    for label, values in residuals.items():
        for k, name in enumerate(asset_names):
            frame[f"{label}:{name}"] = values[:, k]
    return write_csv(run_dir / "residuals.csv", frame)


def read_residuals(run_dir: Path, asset_names: List[str]) -> Tuple[Dict[str, np.ndarray], int]:
    """Résidus par méthode et indice de la première ligne hors échantillon"""
    frame = pd.read_csv(require(run_dir / "residuals.csv"))
    labels = []
    for col in frame.columns[2:]:
        label = col.split(":", 1)[0]
        if label not in labels:
            labels.append(label)
    out = {
        label: frame[[f"{label}:{name}" for name in asset_names]].to_numpy(dtype=float)
        for label in labels
    }
    return out, int(frame["in_sample"].sum())


def read_returns(run_dir: Path) -> Tuple[np.ndarray, List[str]]:
    frame = pd.read_csv(require(run_dir / "returns.csv"))
    names = [c for c in frame.columns if c != "date"]
    return frame[names].to_numpy(dtype=float), names


# ====================================================================
# INTERVALLES ET ÉVALUATIONS
# ====================================================================

def write_intervals(
    run_dir: Path,
    intervals: Dict[str, Dict[Tuple[int, int], CorrInterval]],
    prov: Dict[str, Any]
) -> Path:
    payload = {
        label: [{"i": i, "j": j, **ci.model_dump()} for (i, j), ci in per_label.items()]
        for label, per_label in intervals.items()
    }
    return write_json(run_dir / "intervals.json", {"intervals": payload}, prov)


def read_intervals(run_dir: Path) -> Dict[str, Dict[Tuple[int, int], CorrInterval]]:
    raw = read_json(require(run_dir / "intervals.json"))["intervals"]
    out: Dict[str, Dict[Tuple[int, int], CorrInterval]] = {}
    for label, rows in raw.items():
        out[label] = {
            (int(r.pop("i")), int(r.pop("j"))): CorrInterval(**r) for r in (dict(row) for row in rows)
        }
    return out


def write_evaluations(run_dir: Path, reports: List[EvalReport], prov: Dict[str, Any], name: str) -> Path:
    return write_json(run_dir / name, {"reports": [r.model_dump(mode="json") for r in reports]}, prov)


def read_evaluations(path: Path) -> List[EvalReport]:
    return [EvalReport(**r) for r in read_json(require(path))["reports"]]


def decomp_tag(label: str) -> Optional[DecompTag]:
    return None if label == NODCC else DecompTag(label)
