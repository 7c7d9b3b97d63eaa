#!/usr/bin/env python3
"""
Générer un panel de taux synthétique (processus DCC-GARCH simulé)

    python scripts/generate_synthetic_panel.py --rows 1200 --seed 7 --out data/synthetic_rates.csv

Les actifs listés dans --quoted-inverse sont écrits en 1 / niveau, comme des
cotations USD/XXX, pour exercer l'option --inverse de l'ingestion.
"""
import argparse
import os
import sys
from datetime import date
from pathlib import Path
from typing import Dict, List, Sequence

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pandas as pd
from loguru import logger

from core.models import DccParams, GarchParams
from volatility.dcc import simulate_dcc
from volatility.garch import simulate_garch, unconditional_sigma

# Ordres de grandeur de taux de change quotidiens
DEFAULT_GARCH: Dict[str, Dict[str, float]] = {
    "EUR": {"omega": 5.410e-7, "alpha": 0.0653, "beta": 0.8970},
    "GBP": {"omega": 3.639e-6, "alpha": 0.1327, "beta": 0.7355},
    "JPY": {"omega": 1.0e-6, "alpha": 0.05, "beta": 0.90},
}
DEFAULT_Q_BAR = np.array([
    [1.0, 0.6, 0.3],
    [0.6, 1.0, 0.4],
    [0.3, 0.4, 1.0],
])
DEFAULT_LEVELS = {"EUR": 1.26, "GBP": 1.79, "JPY": 0.0094}


def garch_params(asset: str) -> GarchParams:
    raw = DEFAULT_GARCH[asset]
    p = GarchParams(sigma0=1.0, **raw)
    return p.model_copy(update={"sigma0": unconditional_sigma(p)})


def generate_panel(
    rows: int,
    assets: Sequence[str] = ("EUR", "GBP", "JPY"),
    a: float = 0.03,
    b: float = 0.88,
    seed: int = 0,
    start: date = date(2004, 1, 2),
    quoted_inverse: Sequence[str] = ()
) -> pd.DataFrame:
    """
    Niveaux de taux (rows lignes) : xi par DCC, puis r = sigma xi par GARCH

    Returns:
        DataFrame date + un niveau par actif
    """
    assets = list(assets)
    n = len(assets)
    q_bar = DEFAULT_Q_BAR[:n, :n]
    T = rows - 1
    xi = simulate_dcc(DccParams(a=a, b=b, q_bar=q_bar), T, seed=seed) if n > 1 else (
        np.random.default_rng(seed).standard_normal((T, 1))
    )
    frame = pd.DataFrame({"date": [d.date().isoformat() for d in pd.bdate_range(start, periods=rows)]})
    for k, asset in enumerate(assets):
        column = xi[:, k]
        r = simulate_garch(garch_params(asset), T, residual_sampler=lambda rng, size, c=column: c, seed=seed)
        levels = DEFAULT_LEVELS[asset] * np.exp(np.concatenate([[0.0], np.cumsum(r)]))
        frame[asset] = 1.0 / levels if asset in quoted_inverse else levels
    return frame


def main(argv: List[str] = None) -> int:
    parser = argparse.ArgumentParser(description="Panel de taux synthétique")
    parser.add_argument("--rows", type=int, default=1200)
    parser.add_argument("--assets", default="EUR,GBP,JPY")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--quoted-inverse", dest="quoted_inverse", default="JPY")
    parser.add_argument("--out", default="data/synthetic_rates.csv")
    args = parser.parse_args(argv)

    assets = [a.strip() for a in args.assets.split(",") if a.strip()]
    inverse = [a.strip() for a in args.quoted_inverse.split(",") if a.strip()]
    frame = generate_panel(args.rows, assets, seed=args.seed, quoted_inverse=inverse)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False, float_format="%.10g")
    logger.info(f"✅ {len(frame)} lignes écrites dans {out} (actifs : {', '.join(assets)})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
