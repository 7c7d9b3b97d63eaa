"""
Pipeline : Balayage des copules par paires

12 familles^3 x 3 pivots = 5 184 spécifications par (méthode, PC / CPC).
Une tâche par spécification, réparties sur un Pool ; les résultats sont
fusionnés dans l'ordre d'énumération, quel que soit l'ordre d'achèvement.
"""
from multiprocessing import Pool
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict

from copulas.pair import PairTemplate, enumerate_specs, parse_spec_string
from copulas.registry import MENU_12
from core.config import available_jobs
from core.exceptions import FitError, PipelineError
from core.models import CorrInterval, DccParams, DecompMethod, EvalReport, GarchParams, MenuItem, ResidualKind
from pipelines.evalkit import evaluate_model, pair_summary_rows
from pipelines.quality_logger import QualityLogger
from pipelines.residual_fit import fit_residual_model

SWEEP_COLUMNS = [
    "method", "type", "spec_string", "ll", "k", "aic", "bic", "llis", "lloos",
    "corr_test", "converged", "error",
]


class SweepContext(BaseModel):
    """Entrées communes (lecture seule) de toutes les tâches d'une méthode"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    method_label: str
    kind: ResidualKind
    residuals: np.ndarray
    garch: List[GarchParams]
    dcc: Optional[DccParams] = None
    method: Optional[DecompMethod] = None
    returns: np.ndarray
    split_index: int
    intervals: Optional[Dict[Tuple[int, int], CorrInterval]] = None
    reinit: bool = False
    group: str = "Group1"
    grid_points: Optional[int] = None
    seed: int = 0


class SweepOutcome(BaseModel):
    """Résultat d'une spécification (rapport ou message d'erreur)"""
    index: int
    menu_item: MenuItem
    spec_string: str
    ll: Optional[float] = None
    k: Optional[int] = None
    report: Optional[EvalReport] = None
    converged: bool = False
    clamp_count: int = 0
    error: Optional[str] = None


def task_seed(seed: int, index: int) -> int:
    """Graine d'une tâche dérivée de (seed, index)"""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def _run_spec(job: Tuple[SweepContext, int, str, MenuItem]) -> SweepOutcome:
    ctx, index, spec, item = job
    template = parse_spec_string(spec)
    try:
        fit = fit_residual_model(
            ctx.residuals, item, template=template, kind=ctx.kind, seed=task_seed(ctx.seed, index)
        )
        report = evaluate_model(
            ctx.method_label, fit, ctx.garch, ctx.dcc, ctx.method, ctx.returns, ctx.split_index,
            ctx.residuals, ctx.intervals, ctx.reinit, ctx.group, ctx.grid_points
        )
    except PipelineError as e:
        return SweepOutcome(index=index, menu_item=item, spec_string=spec, error=str(e))
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        # scipy / numpy / pydantic : l'échec reste local à la spécification
        err = FitError(f"{spec} : {type(e).__name__}: {e}")
        return SweepOutcome(index=index, menu_item=item, spec_string=spec, error=str(err))
    return SweepOutcome(
        index=index, menu_item=item, spec_string=spec, ll=fit.loglik, k=fit.k,
        report=report, converged=fit.converged, clamp_count=fit.clamp_count,
    )


def run_sweep(
    ctx: SweepContext,
    menu_item: MenuItem = MenuItem.PC,
    families: Sequence[str] = MENU_12,
    pivots: Sequence[int] = (1, 2, 3),
    jobs: int = 0,
    run_dir: Optional[Path] = None
) -> List[SweepOutcome]:
    """
    Ajuster et évaluer chaque spécification énumérée

    Les échecs individuels sont journalisés et ne stoppent pas le balayage.
    """
    menu_item = MenuItem(menu_item)
    templates: List[PairTemplate] = enumerate_specs(families, pivots)
    tasks = [(ctx, i, t.spec_string, menu_item) for i, t in enumerate(templates)]
    workers = min(available_jobs(jobs), len(tasks))
    logger.info(
        f"🔄 Balayage {ctx.method_label}/{menu_item.value} : {len(tasks)} spécifications ({workers} processus)"
    )
    qlogger = QualityLogger(f"sweep_{ctx.method_label}_{menu_item.value}", "fit", run_dir)
    qlogger.start()
    qlogger.add_total(len(tasks))

    if workers > 1:
        with Pool(workers) as pool:
            outcomes = list(pool.imap(_run_spec, tasks, chunksize=4))
    else:
        outcomes = [_run_spec(t) for t in tasks]

    for out in outcomes:
        if out.error is None:
            qlogger.accept()
            qlogger.add_clamped(out.clamp_count)
        else:
            logger.warning(f"⚠️ {out.spec_string} : {out.error}")
            qlogger.reject("fit_failed")
    qlogger.finish()
    logger.info(f"✅ Balayage terminé : {sum(o.error is None for o in outcomes)}/{len(outcomes)} ajustées")
    return outcomes


def sweep_frame(outcomes: Sequence[SweepOutcome], method_label: str) -> pd.DataFrame:
    """Une ligne par spécification, dans l'ordre d'énumération"""
    rows = []
    for out in sorted(outcomes, key=lambda o: o.index):
        rep = out.report
        rows.append({
            "method": method_label,
            "type": out.menu_item.value,
            "spec_string": out.spec_string,
            "ll": out.ll,
            "k": out.k,
            "aic": rep.aic if rep else None,
            "bic": rep.bic if rep else None,
            "llis": rep.llis if rep else None,
            "lloos": rep.lloos if rep else None,
            "corr_test": rep.corr_test if rep else None,
            "converged": out.converged,
            "error": out.error,
        })
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def sweep_summary(outcomes: Sequence[SweepOutcome]) -> pd.DataFrame:
    """Meilleures spécifications (AIC, BIC, LLIS) et nombre de tests de corrélation réussis"""
    reports = [o.report for o in sorted(outcomes, key=lambda o: o.index) if o.report is not None]
    return pd.DataFrame(pair_summary_rows(reports))
