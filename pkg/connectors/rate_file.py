"""
Connecteur : fichiers de taux délimités

Format attendu (UTF-8) :
    date,<actif1>,<actif2>,...
    2004-01-02,1.2590,1.7880,...

Les actifs listés dans inverse_assets sont remplacés par 1 / niveau (taux
contre USD à partir des cotations usuelles).
"""
from datetime import date
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np
import pandas as pd
from dateutil import parser as date_parser
from loguru import logger

from core.exceptions import IngestError
from core.models import RatePanel
from pipelines.quality_logger import QualityLogger


def parse_iso_date(text: str) -> date:
    """Date ISO-8601 (AAAA-MM-JJ)"""
    return date_parser.isoparse(str(text).strip()).date()


def _fail(qlogger: QualityLogger, reason: str, message: str, **details) -> IngestError:
    qlogger.reject(reason)
    qlogger.set_error(message)
    qlogger.finish()
    return IngestError(message, details)


def ingest_rates(
    path: Path,
    inverse_assets: Iterable[str] = (),
    assets: Optional[List[str]] = None,
    delimiter: str = ",",
    run_dir: Optional[Path] = None
) -> RatePanel:
    """
    Lire un fichier de taux et construire un RatePanel

    Args:
        path: fichier délimité avec en-tête date + un actif par colonne
        inverse_assets: actifs à inverser (1 / niveau)
        assets: sous-ensemble et ordre des colonnes (défaut : toutes)
        delimiter: séparateur (défaut : virgule)
        run_dir: répertoire du run pour le bilan qualité

    Raises:
        IngestError: date manquante, invalide ou dupliquée, cellule vide, niveau non positif
    """
    path = Path(path)
    logger.info(f"🔄 Ingestion des taux : {path}")
    qlogger = QualityLogger("rates", "ingestion", run_dir)
    qlogger.start()

    if not path.exists():
        raise _fail(qlogger, "missing_file", f"Fichier introuvable : {path}", path=str(path))
    raw = pd.read_csv(path, sep=delimiter, dtype=str, encoding="utf-8", keep_default_na=False)
    if raw.shape[1] < 2:
        raise _fail(qlogger, "bad_header", "En-tête attendu : date + au moins un actif", columns=list(raw.columns))
    qlogger.add_total(len(raw))

    date_col = raw.columns[0]
    columns = [str(c).strip() for c in raw.columns[1:]]
    raw.columns = [date_col] + columns
    selected = assets or columns
    missing = [a for a in selected if a not in columns]
    if missing:
        raise _fail(qlogger, "unknown_asset", "Actifs absents du fichier", missing=missing)
    inverse = set(inverse_assets)
    unknown_inverse = sorted(inverse - set(columns))
    if unknown_inverse:
        raise _fail(qlogger, "unknown_asset", "Actifs à inverser absents du fichier", missing=unknown_inverse)

    dates = []
    for row, text in enumerate(raw[date_col]):
        if not str(text).strip():
            raise _fail(qlogger, "missing_date", "Date manquante", row=row)
        try:
            dates.append(parse_iso_date(text))
        except (ValueError, OverflowError):
            raise _fail(qlogger, "invalid_date", f"Date invalide : {text}", row=row)
    seen = {}
    for row, d in enumerate(dates):
        if d in seen:
            raise _fail(qlogger, "duplicate_date", f"Date dupliquée : {d}", row=row, first_row=seen[d])
        seen[d] = row

    levels = raw[selected].apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    values = levels.to_numpy(dtype=float)
    bad_cells = np.argwhere(~np.isfinite(values))
    if bad_cells.size:
        row, col = (int(v) for v in bad_cells[0])
        raise _fail(qlogger, "missing_value", "Cellule vide ou non numérique", row=row, asset=selected[col])
    bad_cells = np.argwhere(values <= 0)
    if bad_cells.size:
        row, col = (int(v) for v in bad_cells[0])
        raise _fail(
            qlogger, "non_positive_level", "Niveau non positif",
            row=row, asset=selected[col], value=float(values[row, col])
        )

    for k, name in enumerate(selected):
        if name in inverse:
            values[:, k] = 1.0 / values[:, k]

    order = np.argsort(np.array(dates, dtype="datetime64[D]"), kind="stable")
    qlogger.accept(len(dates))
    qlogger.finish()
    panel = RatePanel(
        dates=[dates[k] for k in order],
        rates=values[order],
        asset_names=list(selected),
    )
    logger.info(f"✅ {panel.n_rows} lignes, actifs : {', '.join(panel.asset_names)}")
    return panel
