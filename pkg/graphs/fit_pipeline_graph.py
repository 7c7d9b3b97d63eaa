"""
LangGraph - Estimation en trois étapes (commande fit)

ingest -> returns -> garch -> dcc -> residuals -> residual_models -> evaluate -> write_report

Chaque node capture les PipelineError et les ajoute à state["errors"] ; une
arête conditionnelle envoie alors vers mark_failed, qui dépose un marqueur
.failed à côté des artefacts partiels.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, TypedDict

import numpy as np
from langgraph.graph import END, StateGraph
from loguru import logger

from connectors.rate_file import ingest_rates
from copulas.pair import parse_spec_string
from core.exceptions import ConfigError, PipelineError
from core.models import (
    NODCC, CorrInterval, DccFit, DecompMethod, EvalReport, GarchFit, MenuItem, PipelineConfig,
    RatePanel, ResidualKind, ReturnPanel
)
from core.utils import write_json
from pipelines import artifacts
from pipelines.evalkit import evaluate_model, report_frame
from pipelines.market_data import bootstrap_corr_matrix, log_returns, returns_frame
from pipelines.quality_logger import QualityLogger
from pipelines.residual_fit import FitResult, fit_residual_model
from pipelines.sweep import task_seed
from volatility.dcc import dcc_fit_report, dcc_residuals, export_corr_path_csv, filter_dcc, fit_dcc
from volatility.garch import filter_variance, fit_garch_panel


class FitPipelineState(TypedDict):
    """État du pipeline d'estimation"""
    config: PipelineConfig
    run_dir: Path
    panel: Optional[RatePanel]
    returns: Optional[ReturnPanel]
    garch_fits: List[GarchFit]
    dcc_fit: Optional[DccFit]
    sigma: Optional[np.ndarray]
    xi: Optional[np.ndarray]
    residuals: Dict[str, np.ndarray]
    intervals: Dict[str, Dict[Any, CorrInterval]]
    fits: Dict[str, FitResult]
    reports: List[EvalReport]
    errors: list


def _fail(state: FitPipelineState, step: str, e: PipelineError) -> FitPipelineState:
    logger.error(f"❌ Erreur {step} : {e}")
    state["errors"].append(f"{step}: {e}")
    return state


def _reset_at(state: FitPipelineState) -> Optional[int]:
    return state["returns"].split_index if state["config"].reinit_out_of_sample else None


def node_ingest(state: FitPipelineState) -> FitPipelineState:
    """Node : Ingestion des taux"""
    logger.info("🔄 Node: Ingest")
    cfg = state["config"]
    try:
        state["panel"] = ingest_rates(
            Path(cfg.data_path), cfg.inverse_assets, cfg.assets, cfg.delimiter, state["run_dir"]
        )
    except PipelineError as e:
        return _fail(state, "ingest", e)
    return state


def node_returns(state: FitPipelineState) -> FitPipelineState:
    """Node : Rendements logarithmiques"""
    logger.info("🔄 Node: Returns")
    try:
        panel = log_returns(state["panel"], state["config"].split_date)
        state["returns"] = panel
        artifacts.write_csv(state["run_dir"] / "returns.csv", returns_frame(panel))
        if panel.split_index < 1:
            raise ConfigError("aucune ligne dans l'échantillon", {"split_index": panel.split_index})
    except PipelineError as e:
        return _fail(state, "returns", e)
    return state


def node_garch(state: FitPipelineState) -> FitPipelineState:
    """Node : Étape 1, GARCH(1,1) par actif"""
    logger.info("🔄 Node: GARCH")
    cfg = state["config"]
    panel = state["returns"]
    try:
        frame = returns_frame(panel).iloc[:panel.split_index].drop(columns="date")
        fits = fit_garch_panel(frame, cfg.jobs, seed=cfg.seed)
        state["garch_fits"] = fits
        artifacts.write_garch(state["run_dir"], fits, artifacts.provenance(cfg))
        vol = [filter_variance(f.params, panel.returns[:, k]) for k, f in enumerate(fits)]
        state["sigma"] = np.column_stack([v.sigma for v in vol])
        state["xi"] = np.column_stack([v.xi for v in vol])
    except PipelineError as e:
        return _fail(state, "garch", e)
    return state


def node_dcc(state: FitPipelineState) -> FitPipelineState:
    """Node : Étape 2, DCC sur les résidus GARCH de l'échantillon"""
    logger.info("🔄 Node: DCC")
    cfg = state["config"]
    panel = state["returns"]
    try:
        if state["xi"].shape[1] < 2:
            logger.info("Un seul actif : pas de DCC")
            state["dcc_fit"] = None
        else:
            params, report = fit_dcc(state["xi"][:panel.split_index], seed=cfg.seed)
            state["dcc_fit"] = dcc_fit_report(params, report)
            logger.info(f"✅ DCC : a={params.a:.4f}, b={params.b:.4f}")
            path = filter_dcc(params, state["xi"], reset_at=_reset_at(state))
            export_corr_path_csv(state["run_dir"] / "corr_path.csv", path, panel.dates, panel.asset_names)
        artifacts.write_dcc(state["run_dir"], state["dcc_fit"], artifacts.provenance(cfg))
    except PipelineError as e:
        return _fail(state, "dcc", e)
    return state


def node_residuals(state: FitPipelineState) -> FitPipelineState:
    """Node : Résidus xi (nodcc) et epsilon par décomposition, intervalles bootstrap"""
    logger.info("🔄 Node: Residuals")
    cfg = state["config"]
    panel = state["returns"]
    try:
        residuals = {NODCC: state["xi"]}
        if state["dcc_fit"] is not None:
            params = state["dcc_fit"].params
            path = filter_dcc(params, state["xi"], reset_at=_reset_at(state))
            for tag in cfg.decomp:
                method = DecompMethod(tag=tag, tau=cfg.tau)
                residuals[tag.value] = dcc_residuals(path, state["xi"], method, state["sigma"], _reset_at(state))
        state["residuals"] = residuals
        artifacts.write_residuals(state["run_dir"], panel.dates, panel.split_index, residuals, panel.asset_names)

        intervals = {}
        if panel.returns.shape[1] > 1:
            for label, values in residuals.items():
                logger.info(f"Bootstrap des corrélations : {label}")
                intervals[label] = bootstrap_corr_matrix(
                    values[:panel.split_index], cfg.bootstrap_resamples, cfg.bootstrap_level,
                    cfg.seed, panel.asset_names
                )
        state["intervals"] = intervals
        artifacts.write_intervals(state["run_dir"], intervals, artifacts.provenance(cfg))
    except PipelineError as e:
        return _fail(state, "residuals", e)
    return state


def _menu_for(cfg: PipelineConfig, n_assets: int) -> List[MenuItem]:
    items = []
    for item in cfg.menu:
        if item.is_pair and n_assets != 3:
            logger.warning(f"⚠️ {item.value} ignoré : les copules par paires exigent trois actifs")
            continue
        items.append(item)
    return items


def node_residual_models(state: FitPipelineState) -> FitPipelineState:
    """Node : Étape 3, menu des distributions pour chaque méthode"""
    logger.info("🔄 Node: Residual models")
    cfg = state["config"]
    panel = state["returns"]
    prov = artifacts.provenance(cfg)
    qlogger = QualityLogger("residual_models", "fit", state["run_dir"])
    qlogger.start()
    try:
        template = parse_spec_string(cfg.pair_spec)
        fits: Dict[str, FitResult] = {}
        index = 0
        for label, values in state["residuals"].items():
            kind = ResidualKind.GARCH if label == NODCC else ResidualKind.DCC
            for item in _menu_for(cfg, values.shape[1]):
                qlogger.add_total()
                fit = fit_residual_model(
                    values[:panel.split_index], item, template if item.is_pair else None,
                    kind=kind, seed=task_seed(cfg.seed, index)
                )
                index += 1
                qlogger.accept()
                qlogger.add_clamped(fit.clamp_count)
                key = f"{label}_{item.value}"
                fits[key] = fit
                write_json(state["run_dir"] / "fits" / f"{key}.json", fit.to_json(), prov)
                logger.info(f"✅ {key} : ll={fit.loglik:.4f}, aic={fit.aic:.4f}, bic={fit.bic:.4f}")
        state["fits"] = fits
    except PipelineError as e:
        qlogger.reject("fit_failed")
        qlogger.set_error(str(e))
        qlogger.finish(prov)
        return _fail(state, "residual_models", e)
    qlogger.finish(prov)
    return state


def node_evaluate(state: FitPipelineState) -> FitPipelineState:
    """Node : LLIS / LLOOS, test de corrélation, cokurtosis"""
    logger.info("🔄 Node: Evaluate")
    cfg = state["config"]
    panel = state["returns"]
    try:
        garch = [f.params for f in state["garch_fits"]]
        dcc = state["dcc_fit"].params if state["dcc_fit"] is not None else None
        reports = []
        for key, fit in state["fits"].items():
            label = key.rsplit("_", 1)[0]
            method = None if label == NODCC else DecompMethod(tag=label, tau=cfg.tau)
            reports.append(evaluate_model(
                label, fit, garch, dcc if method is not None else None, method,
                panel.returns, panel.split_index, state["residuals"][label][:panel.split_index],
                state["intervals"].get(label), cfg.reinit_out_of_sample, cfg.group, cfg.grid_points
            ))
        state["reports"] = reports
    except PipelineError as e:
        return _fail(state, "evaluate", e)
    return state


def node_write_report(state: FitPipelineState) -> FitPipelineState:
    """Node : report.csv et evaluations.json"""
    logger.info("🔄 Node: Write report")
    try:
        artifacts.write_csv(state["run_dir"] / "report.csv", report_frame(state["reports"]))
        artifacts.write_evaluations(
            state["run_dir"], state["reports"], artifacts.provenance(state["config"]), "evaluations.json"
        )
        (state["run_dir"] / artifacts.FAILED_MARKER).unlink(missing_ok=True)
        logger.info(f"✅ Rapport écrit : {state['run_dir'] / 'report.csv'}")
    except PipelineError as e:
        return _fail(state, "write_report", e)
    return state


def node_mark_failed(state: FitPipelineState) -> FitPipelineState:
    """Node : marqueur .failed à côté des artefacts partiels"""
    marker = state["run_dir"] / artifacts.FAILED_MARKER
    marker.parent.mkdir(parents=True, exist_ok=True)
    marker.write_text("\n".join(state["errors"]) + "\n", encoding="utf-8")
    logger.error(f"❌ Pipeline en échec, artefacts partiels conservés : {state['run_dir']}")
    return state


STEPS = ["ingest", "returns", "garch", "dcc", "residuals", "residual_models", "evaluate", "write_report"]
NODES = {
    "ingest": node_ingest,
    "returns": node_returns,
    "garch": node_garch,
    "dcc": node_dcc,
    "residuals": node_residuals,
    "residual_models": node_residual_models,
    "evaluate": node_evaluate,
    "write_report": node_write_report,
}


def _route_after(next_step: str):
    def route(state: FitPipelineState) -> str:
        return "mark_failed" if state["errors"] else next_step
    return route


def create_fit_pipeline_graph():
    """Créer le graphe LangGraph de la commande fit"""
    workflow = StateGraph(FitPipelineState)
    for name, node in NODES.items():
        workflow.add_node(name, node)
    workflow.add_node("mark_failed", node_mark_failed)

    workflow.set_entry_point(STEPS[0])
    for step, next_step in zip(STEPS, STEPS[1:] + [END]):
        targets = {"mark_failed": "mark_failed", next_step: next_step}
        workflow.add_conditional_edges(step, _route_after(next_step), targets)
    workflow.add_edge("mark_failed", END)
    return workflow.compile()


def run_fit_pipeline(config: PipelineConfig) -> FitPipelineState:
    """
    Exécuter l'estimation complète

    Returns:
        État final (errors vide si succès)
    """
    run_dir = artifacts.run_directory(config)
    run_dir.mkdir(parents=True, exist_ok=True)
    logger.info(f"🚀 Démarrage du pipeline fit : {run_dir}")

    initial_state = FitPipelineState(
        config=config,
        run_dir=run_dir,
        panel=None,
        returns=None,
        garch_fits=[],
        dcc_fit=None,
        sigma=None,
        xi=None,
        residuals={},
        intervals={},
        fits={},
        reports=[],
        errors=[],
    )
    final_state = create_fit_pipeline_graph().invoke(initial_state)

    if final_state["errors"]:
        logger.warning(f"⚠️  Erreurs : {len(final_state['errors'])}")
        for error in final_state["errors"]:
            logger.warning(f"  - {error}")
    else:
        logger.info(f"✅ Pipeline terminé sans erreur ({len(final_state['reports'])} lignes)")
    return final_state
