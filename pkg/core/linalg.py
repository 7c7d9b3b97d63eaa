"""
Aides d'algèbre linéaire partagées
"""
from typing import Tuple

import numpy as np

from core.exceptions import MatrixError


def safe_cholesky(m: np.ndarray, name: str = "matrice") -> np.ndarray:
    """Cholesky inférieure, MatrixError si non définie positive"""
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise MatrixError(f"{name} n'est pas définie positive")


def sym_eigh(m: np.ndarray, name: str = "matrice") -> Tuple[np.ndarray, np.ndarray]:
    """Décomposition spectrale d'une matrice symétrique définie positive"""
    m = 0.5 * (m + m.T)
    vals, vecs = np.linalg.eigh(m)
    if np.min(vals) <= 0:
        raise MatrixError(f"{name} n'est pas définie positive", {"min_eigenvalue": float(np.min(vals))})
    return vals, vecs


def sqrtm_spd(m: np.ndarray, name: str = "matrice") -> np.ndarray:
    """Racine carrée symétrique V √D V'"""
    vals, vecs = sym_eigh(m, name)
    root = (vecs * np.sqrt(vals)) @ vecs.T
    return 0.5 * (root + root.T)


def cov_to_corr(cov: np.ndarray) -> np.ndarray:
    """Normaliser une covariance en corrélation (diagonale exactement 1)"""
    d = np.sqrt(np.diag(cov))
    corr = cov / np.outer(d, d)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return corr


def corr_from_partials(partials: np.ndarray, n: int) -> np.ndarray:
    """
    Corrélation à partir des corrélations partielles d'une C-vine

    partials est rangé ligne par ligne : (0,1), (0,2), ..., (1,2), ...
    Toute valeur dans (-1, 1) donne une matrice définie positive.
    """
    p = np.zeros((n, n))
    idx = 0
    for k in range(n - 1):
        for i in range(k + 1, n):
            p[k, i] = partials[idx]
            idx += 1
    r = np.eye(n)
    for k in range(n - 1):
        for i in range(k + 1, n):
            val = p[k, i]
            for ll in range(k - 1, -1, -1):
                val = val * np.sqrt((1.0 - p[ll, i] ** 2) * (1.0 - p[ll, k] ** 2)) + p[ll, i] * p[ll, k]
            r[k, i] = r[i, k] = val
    return r


def partials_from_corr(r: np.ndarray) -> np.ndarray:
    """Inverse de corr_from_partials (corrélations partielles de la C-vine)"""
    n = r.shape[0]
    p = np.zeros((n, n))
    out = []
    for k in range(n - 1):
        for i in range(k + 1, n):
            val = r[k, i]
            for ll in range(k):
                val = (val - p[ll, i] * p[ll, k]) / np.sqrt((1.0 - p[ll, i] ** 2) * (1.0 - p[ll, k] ** 2))
            p[k, i] = val
            out.append(val)
    return np.array(out)


def gram_schmidt(v: np.ndarray) -> np.ndarray:
    """Ré-orthonormalisation de Gram-Schmidt modifiée (colonnes)"""
    q = np.array(v, dtype=float, copy=True)
    n = q.shape[1]
    for j in range(n):
        for k in range(j):
            q[:, j] -= np.dot(q[:, k], q[:, j]) * q[:, k]
        norm = np.linalg.norm(q[:, j])
        if norm == 0:
            raise MatrixError("vecteurs propres linéairement dépendants")
        q[:, j] /= norm
    return q


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2
