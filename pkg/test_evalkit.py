"""
Tests pour l'évaluation des modèles

Tests unitaires :
- AIC / BIC
- Cokurtosis 2-2 (valeurs calculées à la main)
- Log-vraisemblance des rendements sur une observation

Tests d'intégration :
- Invariance de la densité gaussienne des rendements vis-à-vis de la décomposition
- Fenêtres LLIS / LLOOS, réinitialisation hors échantillon
- Test de corrélation et tableau du rapport
"""
import math
import unittest

import numpy as np
from scipy import stats

from core.exceptions import EvalError, ParamError, StatError
from core.models import CorrInterval, DccParams, DecompMethod, DecompTag, EvalReport, GarchParams, MenuItem
from core.utils import information_criteria
from distributions.skewt import make_skewt
from pipelines.evalkit import (
    REPORT_COLUMNS,
    cokurtosis22,
    cokurtosis_table,
    correlation_test,
    evaluate_model,
    report_frame,
    returns_loglik,
    returns_loglik_terms,
)
from pipelines.residual_fit import FitResult, ResidualModel
from volatility.dcc import filter_dcc
from volatility.garch import simulate_garch, variance_path

UNIT_GARCH = GarchParams(omega=0.5, alpha=0.0, beta=0.5, sigma0=1.0)

Q_BAR = np.array([
    [1.0, 0.6, 0.3],
    [0.6, 1.0, 0.4],
    [0.3, 0.4, 1.0],
])


def _garch_panel(n: int):
    return [GarchParams(omega=1e-6 * (i + 1), alpha=0.05, beta=0.9, sigma0=0.004 + 0.001 * i) for i in range(n)]


def _returns(n: int, size: int, seed: int) -> np.ndarray:
    return np.column_stack([
        simulate_garch(p, size, seed=seed + i) for i, p in enumerate(_garch_panel(n))
    ])


class TestInformationCriteria(unittest.TestCase):
    """AIC / BIC"""

    def test_values(self):
        """L=10, k=3, n=100 -> AIC=-14, BIC=-6.184490"""
        aic, bic = information_criteria(10.0, 3, 100)
        self.assertAlmostEqual(aic, -14.0)
        self.assertAlmostEqual(bic, -6.184490, places=6)

    def test_invalid_n(self):
        """n=0 -> ParamError"""
        with self.assertRaises(ParamError):
            information_criteria(1.0, 1, 0)


class TestCokurtosis(unittest.TestCase):
    """Cokurtosis 2-2"""

    def test_hand_value(self):
        """x=[1,-1,1,-1], y=[1,1,-1,-1] -> 1"""
        self.assertAlmostEqual(cokurtosis22([1, -1, 1, -1], [1, 1, -1, -1]), 1.0)

    def test_kurtosis(self):
        """x = y = [1,-1,2,-2] -> 8.5 / 6.25"""
        x = [1.0, -1.0, 2.0, -2.0]
        self.assertAlmostEqual(cokurtosis22(x, x), 1.36)

    def test_errors(self):
        """Trop court, longueurs différentes, variance nulle -> StatError"""
        with self.assertRaises(StatError):
            cokurtosis22([1, 2, 3], [1, 2, 3])
        with self.assertRaises(StatError):
            cokurtosis22([1, 2, 3, 4], [1, 2, 3])
        with self.assertRaises(StatError):
            cokurtosis22([1, 1, 1, 1], [1, 2, 3, 4])

    def test_table_keys(self):
        """Trois actifs -> Group1-12, Group1-13, Group1-23"""
        table = cokurtosis_table(np.random.default_rng(0).standard_normal((200, 3)))
        self.assertEqual(list(table), ["Group1-12", "Group1-13", "Group1-23"])

    def test_independent_normal(self):
        """Normales indépendantes -> proche de 1"""
        x = np.random.default_rng(1).standard_normal((20_000, 2))
        self.assertAlmostEqual(cokurtosis22(x[:, 0], x[:, 1]), 1.0, delta=0.05)


class TestReturnsLoglik(unittest.TestCase):
    """Log-vraisemblance des rendements"""

    def test_single_zero(self):
        """N=1, r=0, sigma^2=1 -> -0.918939"""
        terms = returns_loglik_terms([UNIT_GARCH], None, None, None, np.array([[0.0]]))
        self.assertAlmostEqual(terms[0], -0.918939, places=6)

    def test_single_unit(self):
        """N=1, r=1, sigma^2=1 -> -1.418939"""
        terms = returns_loglik_terms([UNIT_GARCH], None, None, None, np.array([1.0]))
        self.assertAlmostEqual(terms[0], -1.418939, places=6)

    def test_gaussian_invariance(self):
        """Densité normale : même log-vraisemblance pour les cinq décompositions"""
        returns = _returns(3, 80, seed=2)
        garch = _garch_panel(3)
        dcc = DccParams(a=0.05, b=0.9, q_bar=Q_BAR)
        sigma = np.column_stack([np.sqrt(variance_path(p, returns[:, i])) for i, p in enumerate(garch)])
        path = filter_dcc(dcc, returns / sigma)
        expected = np.array([
            stats.multivariate_normal(np.zeros(3), path.r[t] * np.outer(sigma[t], sigma[t])).logpdf(returns[t])
            for t in range(80)
        ])
        for tag in DecompTag:
            terms = returns_loglik_terms(garch, dcc, DecompMethod(tag=tag), None, returns)
            np.testing.assert_allclose(terms, expected, atol=1e-8, err_msg=tag.value)

    def test_residual_independent_normal_limit(self):
        """IC à marges quasi normales -> proche de la densité normale"""
        returns = _returns(2, 50, seed=3)
        garch = _garch_panel(2)
        ic = ResidualModel(menu_item=MenuItem.IC, marginals=[make_skewt(1e6), make_skewt(1e6)])
        normal = returns_loglik_terms(garch, None, None, None, returns)
        skew = returns_loglik_terms(garch, None, None, ic, returns)
        np.testing.assert_allclose(skew, normal, atol=1e-3)

    def test_windows(self):
        """LLIS et LLOOS : moyennes des termes de part et d'autre de la coupure"""
        returns = _returns(3, 120, seed=4)
        garch = _garch_panel(3)
        dcc = DccParams(a=0.05, b=0.9, q_bar=Q_BAR)
        method = DecompMethod(tag=DecompTag.CHOLESKY)
        terms = returns_loglik_terms(garch, dcc, method, None, returns)
        llis = returns_loglik(garch, dcc, method, None, returns, "in", 100)
        lloos = returns_loglik(garch, dcc, method, None, returns, "out", 100)
        self.assertAlmostEqual(llis, float(np.mean(terms[:100])))
        self.assertAlmostEqual(lloos, float(np.mean(terms[100:])))

    def test_reinit(self):
        """reinit : termes identiques avant la coupure, différents après"""
        returns = _returns(3, 120, seed=5)
        garch = _garch_panel(3)
        dcc = DccParams(a=0.08, b=0.9, q_bar=Q_BAR)
        method = DecompMethod(tag=DecompTag.EIGEN, tau=5)
        cont = returns_loglik_terms(garch, dcc, method, None, returns)
        reset = returns_loglik_terms(garch, dcc, method, None, returns, reinit_at=100)
        np.testing.assert_allclose(reset[:100], cont[:100], atol=1e-12)
        self.assertFalse(np.allclose(reset[100:], cont[100:]))

    def test_errors(self):
        """Fenêtre inconnue -> ParamError ; fenêtre vide ou dimensions -> EvalError"""
        returns = _returns(2, 30, seed=6)
        garch = _garch_panel(2)
        with self.assertRaises(ParamError):
            returns_loglik(garch, None, None, None, returns, "all", 10)
        with self.assertRaises(EvalError):
            returns_loglik(garch, None, None, None, returns, "out", 30)
        with self.assertRaises(EvalError):
            returns_loglik_terms(garch[:1], None, None, None, returns)
        with self.assertRaises(EvalError):
            returns_loglik_terms(garch, DccParams(a=0.05, b=0.9, q_bar=np.eye(2)), None, None, returns)


class TestCorrelationTest(unittest.TestCase):
    """Corrélations du modèle dans les intervalles bootstrap"""

    def setUp(self):
        self.model = ResidualModel(menu_item=MenuItem.IC, marginals=[make_skewt(8.0), make_skewt(8.0)])

    def test_pass(self):
        """IC et intervalle contenant 0 -> T"""
        ci = CorrInterval(point=0.01, lower=-0.05, upper=0.07, resamples=100)
        self.assertEqual(correlation_test(self.model, {(0, 1): ci}, grid_points=40), "T")

    def test_fail(self):
        """IC et intervalle [0.5, 0.9] -> F"""
        ci = CorrInterval(point=0.7, lower=0.5, upper=0.9, resamples=100)
        self.assertEqual(correlation_test(self.model, {(0, 1): ci}, grid_points=40), "F")


class TestReport(unittest.TestCase):
    """Lignes du rapport"""

    def test_evaluate_model(self):
        """Rapport d'un IC NoDCC : LLIS, LLOOS, cokurtosis"""
        returns = _returns(2, 60, seed=7)
        garch = _garch_panel(2)
        model = ResidualModel(menu_item=MenuItem.IC, marginals=[make_skewt(8.0), make_skewt(8.0)])
        fit = FitResult(model=model, loglik=-100.0, k=4, n_obs=50, aic=208.0, bic=215.0, converged=True)
        xi = returns[:50] / np.column_stack([np.sqrt(variance_path(p, returns[:, i])) for i, p in enumerate(garch)])[:50]
        ci = CorrInterval(point=0.0, lower=-0.3, upper=0.3, resamples=100)
        report = evaluate_model("nodcc", fit, garch, None, None, returns, 50, xi,
                                intervals={(0, 1): ci}, grid_points=40)
        terms = returns_loglik_terms(garch, None, None, model, returns)
        self.assertAlmostEqual(report.llis, float(np.mean(terms[:50])))
        self.assertAlmostEqual(report.lloos, float(np.mean(terms[50:])))
        self.assertEqual(report.corr_test, "T")
        self.assertEqual(report.menu_item, "IC")
        self.assertFalse(report.addin_used)
        self.assertEqual(list(report.cokurtosis), ["Group1-12"])

    def test_report_frame(self):
        """Une ligne par modèle puis meilleurs PC par AIC, BIC et LLIS"""
        reports = [EvalReport(method="sqrt", menu_item="CGC", aic=10.0, bic=12.0, llis=-1.0, corr_test="T")]
        sweep = [
            EvalReport(method="sqrt", menu_item="PC", spec_string="P1:ga:ga:ga",
                       aic=20.0, bic=25.0, llis=-1.5, corr_test="T"),
            EvalReport(method="sqrt", menu_item="PC", spec_string="P2:cl:fr:t",
                       aic=18.0, bic=26.0, llis=-1.2, corr_test="F"),
        ]
        frame = report_frame(reports, sweep)
        self.assertEqual(list(frame.columns[:len(REPORT_COLUMNS)]), REPORT_COLUMNS)
        self.assertEqual(list(frame["type"]), ["CGC", "PC-AIC", "PC-BIC", "PC-LLIS"])
        self.assertEqual(list(frame["spec_string"][1:]), ["P2:cl:fr:t", "P1:ga:ga:ga", "P2:cl:fr:t"])
        self.assertEqual(int(frame["passed"].iloc[1]), 1)
        self.assertEqual(int(frame["total"].iloc[1]), 2)

    def test_report_without_sweep(self):
        """Sans balayage -> seulement les colonnes du rapport"""
        frame = report_frame([EvalReport(method="nodcc", menu_item="IC", aic=1.0, bic=2.0, llis=math.log(0.5))])
        self.assertEqual(list(frame.columns), REPORT_COLUMNS)
        self.assertEqual(len(frame), 1)


if __name__ == "__main__":
    unittest.main()
