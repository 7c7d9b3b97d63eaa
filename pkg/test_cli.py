"""
Tests pour la ligne de commande

Tests unitaires :
- Priorité options > environnement > fichier > défauts
- Fichier de configuration versionné (schema_version)
- Panel synthétique

Tests d'intégration :
- Commande ingest sur un panel synthétique
- Codes de sortie (0, 1, 2)
- Commande fit complète (FXCOPULA_SLOW_TESTS=1)
"""
import os
import tempfile
import unittest
from datetime import date
from pathlib import Path

import pandas as pd

from core.exceptions import ConfigError
from core.models import DecompTag, EvalReport, MenuItem
from jobs.cli import (
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_OK,
    build_parser,
    cokurtosis_frame,
    env_overrides,
    load_config_file,
    main,
    resolve_config,
    scatter_frame,
)
from pipelines import artifacts
from scripts.generate_synthetic_panel import generate_panel

SLOW = os.environ.get("FXCOPULA_SLOW_TESTS") == "1"

CONFIG_TEXT = """schema_version=1
data_path=rates.csv
assets=EUR,GBP,JPY
inverse_assets=JPY
split_date=2005-01-03
tau=10
decomp=sqrt,eigen
"""


class TestResolveConfig(unittest.TestCase):
    """Fusion des sources de configuration"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / "run.env"
        self.path.write_text(CONFIG_TEXT, encoding="utf-8")

    def tearDown(self):
        self.tmp.cleanup()

    def test_file_values(self):
        """Fichier seul -> valeurs du fichier, listes découpées"""
        args = build_parser().parse_args(["fit", "--config", str(self.path)])
        config = resolve_config(args, environ={})
        self.assertEqual(config.assets, ["EUR", "GBP", "JPY"])
        self.assertEqual(config.inverse_assets, ["JPY"])
        self.assertEqual(config.split_date, date(2005, 1, 3))
        self.assertEqual(config.decomp, [DecompTag.SQRT, DecompTag.EIGEN])
        self.assertEqual(config.tau, 10)

    def test_precedence(self):
        """Option > environnement > fichier"""
        args = build_parser().parse_args(["fit", "--config", str(self.path)])
        self.assertEqual(resolve_config(args, environ={"FXCOPULA_TAU": "20"}).tau, 20)
        args = build_parser().parse_args(["fit", "--config", str(self.path), "--tau", "30"])
        self.assertEqual(resolve_config(args, environ={"FXCOPULA_TAU": "20"}).tau, 30)

    def test_env_filter(self):
        """Seules les variables FXCOPULA_<champ> sont retenues"""
        out = env_overrides({"FXCOPULA_SEED": "3", "FXCOPULA_UNKNOWN": "x", "HOME": "/root"})
        self.assertEqual(out, {"seed": "3"})

    def test_menu_and_reinit(self):
        """--menu et --reinit"""
        args = build_parser().parse_args(
            ["fit", "--config", str(self.path), "--menu", "IC,CGC", "--reinit"]
        )
        config = resolve_config(args, environ={})
        self.assertEqual(config.menu, [MenuItem.IC, MenuItem.CGC])
        self.assertTrue(config.reinit_out_of_sample)

    def test_schema_version(self):
        """schema_version absente ou différente -> ConfigError"""
        bad = Path(self.tmp.name) / "bad.env"
        bad.write_text(CONFIG_TEXT.replace("schema_version=1", "schema_version=2"), encoding="utf-8")
        with self.assertRaises(ConfigError):
            load_config_file(bad)
        with self.assertRaises(ConfigError):
            load_config_file(Path(self.tmp.name) / "absent.env")

    def test_incomplete(self):
        """Sans actifs ni date de coupure -> ConfigError"""
        args = build_parser().parse_args(["fit", "--data", "rates.csv"])
        with self.assertRaises(ConfigError):
            resolve_config(args, environ={})


class TestSyntheticPanel(unittest.TestCase):
    """Panel synthétique"""

    def test_shape(self):
        """rows lignes, date + un niveau par actif"""
        frame = generate_panel(150, seed=2)
        self.assertEqual(len(frame), 150)
        self.assertEqual(list(frame.columns), ["date", "EUR", "GBP", "JPY"])
        self.assertAlmostEqual(frame["EUR"].iloc[0], 1.26)
        self.assertTrue((frame[["EUR", "GBP", "JPY"]] > 0).all().all())

    def test_quoted_inverse(self):
        """JPY coté en 1 / niveau"""
        frame = generate_panel(20, seed=2, quoted_inverse=["JPY"])
        self.assertAlmostEqual(frame["JPY"].iloc[0], 1.0 / 0.0094)

    def test_seed(self):
        """Même graine -> même panel"""
        pd.testing.assert_frame_equal(generate_panel(50, seed=4), generate_panel(50, seed=4))


class TestCommands(unittest.TestCase):
    """Commandes de bout en bout"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.data = self.root / "rates.csv"
        generate_panel(400, seed=3, quoted_inverse=["JPY"]).to_csv(self.data, index=False)
        self.split = generate_panel(400, seed=3)["date"].iloc[300]

    def tearDown(self):
        self.tmp.cleanup()

    def _args(self, command: str, *extra: str):
        return [
            command, "--data", str(self.data), "--assets", "EUR,GBP,JPY", "--inverse", "JPY",
            "--split", self.split, "--out", str(self.root / "runs"), *extra,
        ]

    def test_ingest(self):
        """ingest -> returns.csv, stats.csv, correlations.csv"""
        argv = self._args("ingest")
        self.assertEqual(main(argv), EXIT_OK)
        run_dir = artifacts.run_directory(resolve_config(build_parser().parse_args(argv)))
        returns = pd.read_csv(run_dir / "returns.csv")
        self.assertEqual(len(returns), 399)
        for name in ("stats.csv", "correlations.csv", "quality/rates_ingestion.json"):
            self.assertTrue((run_dir / name).exists(), name)

    def test_missing_data(self):
        """Fichier de taux introuvable -> code 1"""
        argv = self._args("ingest")
        argv[argv.index("--data") + 1] = str(self.root / "absent.csv")
        self.assertEqual(main(argv), EXIT_FAILURE)

    def test_bad_config(self):
        """Fichier de configuration invalide -> code 2"""
        bad = self.root / "bad.env"
        bad.write_text("tau=3\n", encoding="utf-8")
        self.assertEqual(main(["fit", "--config", str(bad)]), EXIT_CONFIG)

    def test_report_without_fit(self):
        """report sans artefacts de fit -> code 2"""
        self.assertEqual(main(self._args("report")), EXIT_CONFIG)

    @unittest.skipUnless(SLOW, "FXCOPULA_SLOW_TESTS=1 pour les estimations longues")
    def test_fit_and_report(self):
        """fit puis report sur 400 dates -> report.csv avec une ligne par (méthode, item)"""
        argv = self._args("fit", "--decomp", "sqrt,cholesky", "--menu", "IC,GC", "--resamples", "200")
        self.assertEqual(main(argv), EXIT_OK)
        run_dir = artifacts.run_directory(resolve_config(build_parser().parse_args(argv)))
        report = pd.read_csv(run_dir / "report.csv")
        self.assertEqual(len(report), 6)
        self.assertEqual(set(report["method"]), {"nodcc", "sqrt", "cholesky"})
        self.assertFalse((run_dir / artifacts.FAILED_MARKER).exists())
        report_argv = self._args("report", "--decomp", "sqrt,cholesky", "--menu", "IC,GC", "--resamples", "200")
        self.assertEqual(main(report_argv), EXIT_OK)
        self.assertTrue((run_dir / "quality" / "residual_models_fit.json").exists())
        for name in ("llis_lloos_scatter.csv", "corr_intervals.csv", "cokurtosis.csv"):
            self.assertTrue((run_dir / name).exists(), name)


class TestReportFrames(unittest.TestCase):
    """Fichiers de données des graphiques"""

    def setUp(self):
        self.reports = [
            EvalReport(method="sqrt", menu_item="GC", aic=1.0, bic=2.0, llis=-1.0, lloos=-1.1,
                       corr_test="T", cokurtosis={"Group1-12": 1.2}),
            EvalReport(method="sqrt", menu_item="IC", aic=1.5, bic=2.5, llis=-1.2, lloos=-1.3,
                       cokurtosis={"Group1-12": 1.2}),
            EvalReport(method="nodcc", menu_item="IC", aic=3.0, bic=4.0, llis=-1.4,
                       cokurtosis={"Group1-12": 1.6}),
        ]

    def test_scatter(self):
        """Un point par modèle, verdict booléen"""
        frame = scatter_frame(self.reports)
        self.assertEqual(list(frame["pass"]), [True, False, False])
        self.assertEqual(list(frame["spec"]), ["GC", "IC", "IC"])

    def test_cokurtosis(self):
        """Une colonne par méthode"""
        frame = cokurtosis_frame(self.reports)
        self.assertEqual(list(frame.columns), ["row", "sqrt", "nodcc"])
        self.assertEqual(frame["nodcc"].iloc[0], 1.6)


if __name__ == "__main__":
    unittest.main()
