"""
Configuration centralisée
Valeurs par défaut du processus, surchargeables par variables d'environnement FXCOPULA_*
ou par un fichier .env local
"""
import os
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

load_dotenv()


class Settings(BaseSettings):
    """Configuration de l'application"""

    model_config = SettingsConfigDict(
        env_prefix="FXCOPULA_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Logs
    log_level: str = "INFO"
    log_dir: str = "logs"

    # Exécution
    seed: int = 20240101
    jobs: int = 0  # 0 = tous les cœurs disponibles
    out_dir: str = "runs"

    # Décomposition
    tau: int = 50

    # Bootstrap
    bootstrap_resamples: int = 10_000
    bootstrap_level: float = 0.95
    bootstrap_max_redraws: int = 100

    # Intégration sur grille [-8, 8]^N
    grid_points: int = 100
    grid_half_width: float = 8.0

    # Optimiseurs
    simplex_max_iter: int = 2000
    simplex_rel_tol: float = 1e-10
    simplex_restarts: int = 3
    residual_max_iter: int = 500

    # Bornes
    nu_lower_bound: float = 2.001
    clamp_eps: float = 1e-12

    # Tests longs (études d'acceptation)
    slow_tests: bool = False


settings = Settings()


def available_jobs(jobs: int) -> int:
    """Nombre de workers effectif (0 ou négatif = tous les cœurs)"""
    if jobs and jobs > 0:
        return jobs
    return max(1, os.cpu_count() or 1)
