"""
Décompositions Xi de R_t (Xi Xi' = R_t)

    sqrt      racine symétrique V sqrt(D) V'
    sqrt2     diag(sigma)^-1 sqrt(H),  H = diag(sigma) R diag(sigma)
    cholesky  triangulaire inférieure, diagonale positive
    eigen     V* sqrt(D*), vecteurs triés par valeur propre décroissante et
              signés de façon cohérente dans le temps
    eigen2    diag(sigma)^-1 V*_H sqrt(D*_H), historique propre à H

Le signe d'un vecteur propre est choisi pour minimiser la somme des carrés des
angles avec les vecteurs signés des tau dates précédentes.
"""
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from core.exceptions import DomainError, MatrixError
from core.linalg import gram_schmidt, safe_cholesky, sqrtm_spd, sym_eigh
from core.models import DecompMethod, DecompTag, check_corr_matrix

ORTHO_TOL = 1e-10


class EigenSortState(BaseModel):
    """Historique (au plus tau matrices) des vecteurs propres signés"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    tau: int = 50
    history: Tuple[np.ndarray, ...] = ()

    def push(self, signed: np.ndarray) -> "EigenSortState":
        kept = (self.history + (signed,))[-self.tau:]
        return EigenSortState(tau=self.tau, history=kept)

    @property
    def size(self) -> int:
        return len(self.history)


def angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle entre deux vecteurs, dans [0, pi]"""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise DomainError("angle indéfini pour un vecteur nul")
    return float(np.arccos(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0)))


def _canonical_signs(vecs: np.ndarray) -> np.ndarray:
    """Chaque colonne : composante de plus grande valeur absolue positive (premier indice en cas d'égalité)"""
    mag = np.abs(vecs)
    # égalité à l'arrondi près du solveur
    idx = np.argmax(mag >= mag.max(axis=0) - 1e-12, axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def _orthonormal(vecs: np.ndarray) -> np.ndarray:
    gap = np.max(np.abs(vecs.T @ vecs - np.eye(vecs.shape[1])))
    return gram_schmidt(vecs) if gap > ORTHO_TOL else vecs


def _eigen_order(vecs: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Valeurs propres décroissantes ; égalités départagées par les composantes"""
    n = vals.size
    return np.array(sorted(range(n), key=lambda j: (-vals[j], tuple(-vecs[:, j]))))


def _sorted_eigen(vecs: np.ndarray, vals: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    vecs = _canonical_signs(_orthonormal(np.asarray(vecs, dtype=float)))
    vals = np.asarray(vals, dtype=float)
    order = _eigen_order(vecs, vals)
    return vecs[:, order], vals[order]


def _signed(ordered: np.ndarray, state: EigenSortState) -> np.ndarray:
    if not state.history:
        return ordered
    out = ordered.copy()
    for i in range(ordered.shape[1]):
        d = np.array([angle(ordered[:, i], past[:, i]) for past in state.history])
        keep = np.sum(d ** 2)
        flip = np.sum((np.pi - d) ** 2)
        # égalité : on garde le signe +1
        if flip < keep:
            out[:, i] = -ordered[:, i]
    return out


def eigen_sort_step(
    eigvecs: np.ndarray,
    eigvals: np.ndarray,
    state: EigenSortState,
    tau: Optional[int] = None
) -> Tuple[np.ndarray, EigenSortState]:
    """
    Trier et signer les vecteurs propres d'une date

    Returns:
        (vecteurs triés et signés, nouvel état)
    """
    if tau is not None and tau != state.tau:
        state = EigenSortState(tau=tau, history=state.history[-tau:])
    ordered, _ = _sorted_eigen(eigvecs, eigvals)
    signed = _signed(ordered, state)
    return signed, state.push(signed)


def _eigen_factor(m: np.ndarray, state: EigenSortState, name: str) -> Tuple[np.ndarray, EigenSortState]:
    vals, vecs = sym_eigh(m, name)
    ordered, vals_sorted = _sorted_eigen(vecs, vals)
    signed = _signed(ordered, state)
    return signed * np.sqrt(vals_sorted), state.push(signed)


def _check_sigma(sigma: Optional[np.ndarray], n: int) -> np.ndarray:
    if sigma is None:
        raise DomainError("sqrt2/eigen2 exigent les volatilités sigma_t")
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (n,) or np.any(~np.isfinite(sigma)) or np.any(sigma <= 0):
        raise DomainError("sigma_t doit être un vecteur strictement positif", {"shape": sigma.shape})
    return sigma


def decompose(
    method: DecompMethod,
    r: np.ndarray,
    state: Optional[EigenSortState] = None,
    sigma: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, Optional[EigenSortState]]:
    """
    Calculer Xi pour une matrice de corrélation

    Returns:
        (Xi, état du tri propre mis à jour ou None)
    """
    r = check_corr_matrix(r)
    n = r.shape[0]
    tag = method.tag
    if tag.uses_eigen_sort and state is None:
        state = EigenSortState(tau=method.tau)

    if tag == DecompTag.SQRT:
        return sqrtm_spd(r, "R"), state
    if tag == DecompTag.CHOLESKY:
        return safe_cholesky(r, "R"), state
    if tag == DecompTag.EIGEN:
        return _eigen_factor(r, state, "R")

    sigma = _check_sigma(sigma, n)
    h = r * np.outer(sigma, sigma)
    h = 0.5 * (h + h.T)
    if tag == DecompTag.SQRT2:
        return sqrtm_spd(h, "H") / sigma[:, None], state
    if tag == DecompTag.EIGEN2:
        factor, state = _eigen_factor(h, state, "H")
        return factor / sigma[:, None], state
    raise MatrixError(f"Méthode de décomposition inconnue : {tag}")


def decompose_path(
    method: DecompMethod,
    r_path: np.ndarray,
    sigma_path: Optional[np.ndarray] = None,
    reset_at: Optional[int] = None
) -> np.ndarray:
    """
    Xi_t pour toute une trajectoire (T, N, N)

    reset_at vide l'historique du tri propre à cet indice.
    """
    r_path = np.asarray(r_path, dtype=float)
    T = r_path.shape[0]
    factors = np.empty_like(r_path)
    state: Optional[EigenSortState] = None
    for t in range(T):
        if reset_at is not None and t == reset_at:
            state = None
        sig = None if sigma_path is None else sigma_path[t]
        try:
            factors[t], state = decompose(method, r_path[t], state, sig)
        except MatrixError as e:
            e.details["t"] = t
            raise
    return factors
