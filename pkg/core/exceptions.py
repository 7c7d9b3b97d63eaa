"""
Hiérarchie d'erreurs du pipeline copula-DCC-GARCH

Chaque erreur peut transporter un dict `details` (index de ligne, index t,
rapport d'optimiseur...) repris tel quel dans les logs et les marqueurs .failed.
"""
from typing import Any, Dict, Optional


class PipelineError(Exception):
    """Erreur de base du pipeline"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details or {}

    def __str__(self) -> str:
        if not self.details:
            return self.message
        extra = ", ".join(f"{k}={v}" for k, v in self.details.items())
        return f"{self.message} ({extra})"


class IngestError(PipelineError):
    """Fichier de taux invalide (dates manquantes/dupliquées, niveau non positif)"""


class ConfigError(PipelineError):
    """Configuration invalide (date de split hors plage, schéma inconnu...)"""


class StatError(PipelineError):
    """Statistique non définie (variance nulle, échantillon trop court)"""


class ParamError(PipelineError):
    """Paramètre hors de son domaine"""


class DomainError(PipelineError):
    """Évaluation hors du domaine d'une fonction (bord du cube, vecteur nul)"""


class MatrixError(PipelineError):
    """Matrice singulière ou non définie positive"""


class FitError(PipelineError):
    """Échec d'estimation (non-convergence, données dégénérées)"""


class EvalError(PipelineError):
    """Terme non fini dans l'évaluation de la vraisemblance"""
