"""
Point d'entrée en ligne de commande

    python -m jobs.cli ingest --data rates.csv --assets EUR,GBP,JPY --inverse JPY --split 2008-01-01
    python -m jobs.cli fit    --config run.env --decomp sqrt,eigen --tau 50
    python -m jobs.cli sweep  --config run.env --families ga,fr --pivots 1 --jobs 8
    python -m jobs.cli report --config run.env

Priorité des valeurs : options > variables FXCOPULA_* > fichier --config > défauts.
Codes de sortie : 0 succès, 1 échec du pipeline, 2 erreur de configuration.
"""
import argparse
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from dateutil import parser as date_parser
from dotenv import dotenv_values
from loguru import logger
from pydantic import ValidationError

from connectors.rate_file import ingest_rates
from copulas.registry import MENU_12
from core.config import settings
from core.exceptions import ConfigError, PipelineError
from core.models import NODCC, DecompMethod, EvalReport, MenuItem, PipelineConfig, ResidualKind
from core.utils import setup_logging, write_json
from graphs.fit_pipeline_graph import run_fit_pipeline
from pipelines import artifacts
from pipelines.evalkit import report_frame
from pipelines.market_data import (
    correlation_table, correlations, intervals_frame, log_returns, panel_stats, returns_frame
)
from pipelines.sweep import SweepContext, run_sweep, sweep_frame, sweep_summary

SCHEMA_VERSION = "1"
ENV_PREFIX = "FXCOPULA_"
LIST_FIELDS = {"assets", "inverse_assets", "decomp", "menu", "sweep_families", "sweep_pivots"}
EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2

# option -> champ de PipelineConfig
FLAG_FIELDS = {
    "data": "data_path",
    "assets": "assets",
    "inverse": "inverse_assets",
    "split": "split_date",
    "decomp": "decomp",
    "tau": "tau",
    "menu": "menu",
    "seed": "seed",
    "jobs": "jobs",
    "out": "out_dir",
    "group": "group",
    "families": "sweep_families",
    "pivots": "sweep_pivots",
    "pair_spec": "pair_spec",
    "delimiter": "delimiter",
    "resamples": "bootstrap_resamples",
    "reinit": "reinit_out_of_sample",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fxcopula", description="Pipeline copule-DCC-GARCH")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("ingest", "lire les taux, écrire rendements, statistiques et corrélations"),
        ("fit", "estimation en trois étapes et rapport"),
        ("sweep", "balayage des copules par paires"),
        ("report", "tableaux et fichiers de données pour graphiques"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="fichier clé=valeur (schema_version=1)")
        p.add_argument("--data", help="fichier de taux délimité")
        p.add_argument("--assets", help="actifs, séparés par des virgules")
        p.add_argument("--inverse", help="actifs à inverser (1 / niveau)")
        p.add_argument("--split", help="première date hors échantillon (AAAA-MM-JJ)")
        p.add_argument("--decomp", help="sqrt,sqrt2,cholesky,eigen,eigen2")
        p.add_argument("--tau", type=int)
        p.add_argument("--menu", help="IC,CIC,GC,CGC,TC,CTC,PC,CPC")
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int)
        p.add_argument("--out", help="répertoire de sortie")
        p.add_argument("--group", help="libellé du groupe d'actifs (Group1)")
        p.add_argument("--families", help="familles du balayage (ga,fr,...)")
        p.add_argument("--pivots", help="pivots du balayage (1,2,3)")
        p.add_argument("--pair-spec", dest="pair_spec", help="copule par paires pour PC / CPC (P1:ga:ga:ga)")
        p.add_argument("--delimiter")
        p.add_argument("--resamples", type=int, help="tirages bootstrap")
        p.add_argument("--reinit", action="store_const", const="true", help="Q et le tri propre repartent au split")
        p.add_argument("--log-level", dest="log_level")
    return parser


# ====================================================================
# CONFIGURATION
# ====================================================================

def load_config_file(path: Path) -> Dict[str, str]:
    """Fichier clé=valeur versionné"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Fichier de configuration introuvable : {path}")
    values = {k.strip().lower(): v for k, v in dotenv_values(path).items() if v is not None}
    version = values.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version non supportée", {"found": version, "expected": SCHEMA_VERSION})
    return values


def env_overrides(environ: Optional[Dict[str, str]] = None) -> Dict[str, str]:
    """Variables FXCOPULA_<CHAMP> correspondant à un champ de PipelineConfig"""
    environ = os.environ if environ is None else environ
    fields = set(PipelineConfig.model_fields)
    out = {}
    for key, value in environ.items():
        if key.upper().startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX):].lower()
            if name in fields:
                out[name] = value
    return out


def _coerce(name: str, value: Any) -> Any:
    if name in LIST_FIELDS and isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    if name == "split_date" and isinstance(value, str):
        return date_parser.isoparse(value.strip()).date()
    return value


def resolve_config(
    args: argparse.Namespace,
    environ: Optional[Dict[str, str]] = None
) -> PipelineConfig:
    """
    Fusionner défauts, fichier, environnement et options

    Raises:
        ConfigError: fichier invalide ou configuration incomplète
    """
    merged: Dict[str, Any] = {
        "seed": settings.seed,
        "jobs": settings.jobs,
        "out_dir": settings.out_dir,
        "tau": settings.tau,
        "bootstrap_resamples": settings.bootstrap_resamples,
        "bootstrap_level": settings.bootstrap_level,
        "grid_points": settings.grid_points,
    }
    if getattr(args, "config", None):
        merged.update(load_config_file(Path(args.config)))
    merged.update(env_overrides(environ))
    for flag, field in FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            merged[field] = value
    try:
        merged = {k: _coerce(k, v) for k, v in merged.items()}
        return PipelineConfig(**merged)
    except (ValidationError, ValueError) as e:
        raise ConfigError(f"Configuration invalide : {e}")


# ====================================================================
# COMMANDES
# ====================================================================

def cmd_ingest(config: PipelineConfig) -> int:
    """Rendements, statistiques descriptives et corrélations"""
    run_dir = artifacts.run_directory(config)
    prov = artifacts.provenance(config)
    panel = ingest_rates(Path(config.data_path), config.inverse_assets, config.assets, config.delimiter, run_dir)
    returns = log_returns(panel, config.split_date)
    artifacts.write_csv(run_dir / "returns.csv", returns_frame(returns))

    stats = panel_stats(returns)
    artifacts.write_csv(run_dir / "stats.csv", stats)
    write_json(run_dir / "stats.json", {"stats": stats.to_dict(orient="records")}, prov)
    if returns.returns.shape[1] > 1:
        linear, rank = correlations(returns.returns)
        table = correlation_table(linear, rank, returns.asset_names)
        table.index.name = "asset"
        artifacts.write_csv(run_dir / "correlations.csv", table.reset_index())
    logger.info(f"✅ Ingestion terminée : {run_dir}")
    return EXIT_OK


def cmd_fit(config: PipelineConfig) -> int:
    final_state = run_fit_pipeline(config)
    return EXIT_FAILURE if final_state["errors"] else EXIT_OK


def _sweep_items(config: PipelineConfig) -> List[MenuItem]:
    items = [m for m in config.menu if m.is_pair]
    return items or [MenuItem.PC, MenuItem.CPC]


def cmd_sweep(config: PipelineConfig) -> int:
    """Balayage sur les résidus d'un fit existant"""
    run_dir = artifacts.run_directory(config)
    prov = artifacts.provenance(config)
    returns, names = artifacts.read_returns(run_dir)
    if len(names) != 3:
        raise ConfigError("le balayage des copules par paires exige trois actifs", {"assets": names})
    garch = [f.params for f in artifacts.read_garch(run_dir)]
    dcc_fit = artifacts.read_dcc(run_dir)
    residuals, split_index = artifacts.read_residuals(run_dir, names)
    intervals = artifacts.read_intervals(run_dir)
    families = config.sweep_families or list(MENU_12)

    frames, summaries, reports = [], [], []
    for label, values in residuals.items():
        tag = artifacts.decomp_tag(label)
        ctx = SweepContext(
            method_label=label,
            kind=ResidualKind.GARCH if label == NODCC else ResidualKind.DCC,
            residuals=values[:split_index],
            garch=garch,
            dcc=dcc_fit.params if (dcc_fit is not None and tag is not None) else None,
            method=DecompMethod(tag=tag, tau=config.tau) if tag is not None else None,
            returns=returns,
            split_index=split_index,
            intervals=intervals.get(label),
            reinit=config.reinit_out_of_sample,
            group=config.group,
            grid_points=config.grid_points,
            seed=config.seed,
        )
        for item in _sweep_items(config):
            outcomes = run_sweep(ctx, item, families, config.sweep_pivots, config.jobs, run_dir)
            frames.append(sweep_frame(outcomes, label))
            summaries.append(sweep_summary(outcomes))
            reports.extend(o.report for o in outcomes if o.report is not None)

    artifacts.write_csv(run_dir / "sweep_report.csv", pd.concat(frames, ignore_index=True))
    summary = pd.concat(summaries, ignore_index=True) if summaries else pd.DataFrame()
    artifacts.write_csv(run_dir / "sweep_summary.csv", summary)
    write_json(run_dir / "sweep_summary.json", {"best": summary.to_dict(orient="records")}, prov)
    artifacts.write_evaluations(run_dir, reports, prov, "sweep_evaluations.json")
    logger.info(f"✅ Balayage écrit : {run_dir / 'sweep_report.csv'}")
    return EXIT_OK


def scatter_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    """Points LLIS / LLOOS avec le verdict du test de corrélation"""
    return pd.DataFrame([
        {
            "spec": r.spec_string or r.menu_item, "method": r.method, "type": r.menu_item,
            "llis": r.llis, "lloos": r.lloos, "pass": r.corr_test == "T",
        }
        for r in reports
    ], columns=["spec", "method", "type", "llis", "lloos", "pass"])


def cokurtosis_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    """Lignes Group-xy, une colonne par méthode"""
    columns: Dict[str, Dict[str, float]] = {}
    for r in reports:
        if r.cokurtosis and r.method not in columns:
            columns[r.method] = r.cokurtosis
    frame = pd.DataFrame(columns)
    frame.index.name = "row"
    return frame.reset_index()


def cmd_report(config: PipelineConfig) -> int:
    """Tableaux et fichiers de données des graphiques"""
    run_dir = artifacts.run_directory(config)
    reports = artifacts.read_evaluations(run_dir / "evaluations.json")
    sweep_path = run_dir / "sweep_evaluations.json"
    sweep_reports = artifacts.read_evaluations(sweep_path) if sweep_path.exists() else []
    intervals = artifacts.read_intervals(run_dir)
    _, names = artifacts.read_returns(run_dir)

    artifacts.write_csv(run_dir / "report.csv", report_frame(reports, sweep_reports))
    artifacts.write_csv(run_dir / "llis_lloos_scatter.csv", scatter_frame(list(reports) + list(sweep_reports)))
    rows = []
    for label, per_label in intervals.items():
        frame = intervals_frame(per_label, names)
        frame.insert(1, "method", label)
        rows.append(frame[["pair", "method", "point", "lower", "upper"]])
    corr = pd.concat(rows, ignore_index=True) if rows else pd.DataFrame(
        columns=["pair", "method", "point", "lower", "upper"]
    )
    artifacts.write_csv(run_dir / "corr_intervals.csv", corr)
    artifacts.write_csv(run_dir / "cokurtosis.csv", cokurtosis_frame(reports))
    logger.info(f"✅ Rapport écrit : {run_dir}")
    return EXIT_OK


COMMANDS = {"ingest": cmd_ingest, "fit": cmd_fit, "sweep": cmd_sweep, "report": cmd_report}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Point d'entrée"""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        config = resolve_config(args)
    except ConfigError as e:
        logger.error(f"❌ {e}")
        return EXIT_CONFIG
    logger.info(f"🚀 Commande {args.command} : {artifacts.run_directory(config)}")
    try:
        return COMMANDS[args.command](config)
    except ConfigError as e:
        logger.error(f"❌ Configuration : {e}")
        return EXIT_CONFIG
    except PipelineError as e:
        logger.error(f"❌ Échec : {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
