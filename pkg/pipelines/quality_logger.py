"""
Pipeline : Logger de qualité des runs

Suivi centralisé de ce qui entre et sort de chaque étape :
- lignes de taux acceptées / rejetées à l'ingestion
- spécifications du balayage ajustées / en échec
- arguments de copule ramenés dans (0, 1)

Le bilan est écrit dans <run>/quality/<source>_<étape>.json (sans horodatage,
la durée n'apparaît que dans les logs).
"""
import time
from pathlib import Path
from typing import Any, Dict, Optional

from loguru import logger

from core.models import QualityLog
from core.utils import write_json


class QualityLogger:
    """
    Logger de qualité d'une étape

    Usage:
        qlogger = QualityLogger("rates", "ingestion", run_dir)
        qlogger.start()
        qlogger.add_total(len(rows))
        for row in rows:
            if is_valid(row):
                qlogger.accept()
            else:
                qlogger.reject("non_positive_level")
        qlogger.finish()
    """

    def __init__(self, source_type: str, pipeline_step: str, run_dir: Optional[Path] = None):
        self.source_type = source_type
        self.pipeline_step = pipeline_step
        self.run_dir = Path(run_dir) if run_dir is not None else None

        self._start: Optional[float] = None
        self._records_total = 0
        self._records_accepted = 0
        self._records_rejected = 0
        self._rejection_reasons: Dict[str, int] = {}
        self._clamped_arguments = 0
        self._status = "success"
        self._error_message: Optional[str] = None

    def start(self):
        """Démarrer le suivi"""
        self._start = time.perf_counter()
        logger.debug(f"QualityLogger démarré : {self.source_type}/{self.pipeline_step}")

    def add_total(self, count: int = 1):
        self._records_total += count

    def accept(self, count: int = 1):
        self._records_accepted += count

    def reject(self, reason: str, count: int = 1):
        """Enregistrer un rejet avec sa raison"""
        self._records_rejected += count
        self._rejection_reasons[reason] = self._rejection_reasons.get(reason, 0) + count

    def add_clamped(self, count: int):
        """Arguments de copule ramenés dans (0, 1) par un ajustement"""
        self._clamped_arguments += int(count)

    def set_error(self, message: str):
        """Marquer l'étape en erreur"""
        self._status = "error"
        self._error_message = message

    def finish(self, provenance: Optional[Dict[str, Any]] = None) -> QualityLog:
        """
        Terminer le suivi, écrire le bilan JSON si un répertoire de run est connu

        Returns:
            QualityLog
        """
        elapsed_ms = int((time.perf_counter() - self._start) * 1000) if self._start else 0

        # Plus de la moitié de rejets : avertissement
        if self._status == "success" and self._records_total > 0:
            if self._records_rejected / self._records_total > 0.5:
                self._status = "warning"

        quality_log = QualityLog(
            source_type=self.source_type,
            pipeline_step=self.pipeline_step,
            records_total=self._records_total,
            records_accepted=self._records_accepted,
            records_rejected=self._records_rejected,
            rejection_reasons=dict(sorted(self._rejection_reasons.items())),
            clamped_arguments=self._clamped_arguments,
            status=self._status,
            error_message=self._error_message,
        )

        if self.run_dir is not None:
            target = self.run_dir / "quality" / f"{self.source_type}_{self.pipeline_step}.json"
            write_json(target, quality_log.model_dump(mode="json"), provenance)

        logger.info(
            f"QualityLog [{self.source_type}/{self.pipeline_step}] : "
            f"{self._records_accepted}/{self._records_total} acceptés, "
            f"{self._records_rejected} rejetés, "
            f"{self._clamped_arguments} bornages ({elapsed_ms}ms)"
        )
        return quality_log
