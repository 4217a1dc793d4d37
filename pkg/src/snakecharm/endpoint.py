"""Endpoint map E(u) = integral of u, its pushforward, and Gram-based singularity tests.

The Gram operator Gamma_u = (integral u_i u_j ds) has trace L and spectrum in
[0, L]; u is a singular point of E exactly when L is an eigenvalue, i.e. when
u is collinear (u(s) = +/- x).  margin = L - lambda_max is the distance to
that top eigenvalue and doubles as the conditioning of A_u = L Id - Gamma_u.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import (
    Configuration,
    DegeneracyError,
    TangentField,
    integrate_field,
    snake_shape,  # re-exported: the shape is the endpoint map run partway
)

__all__ = [
    "GramData",
    "SingularityReport",
    "endpoint",
    "gram",
    "pushforward",
    "singular_tolerance",
    "singularity",
    "snake_shape",
    "solve_transfer",
]

TOL_SINGULAR_SCALE = 1e-8   # default tol_singular = scale * L
TOL_COLLINEAR = 1e-6


def endpoint(u: Configuration) -> np.ndarray:
    """E(u) = integral_0^L u(s) ds, the head position."""
    return integrate_field(u)


def pushforward(u: Configuration, v: TangentField) -> np.ndarray:
    """T_u E (v) = integral of v; the differential of E along v."""
    if v.base is not u and not v.base.same_layout(u):
        raise ValueError("tangent field does not live over this configuration")
    return integrate_field(v)


def singular_tolerance(u: Configuration, tol_singular: Optional[float] = None) -> float:
    return TOL_SINGULAR_SCALE * u.total_length if tol_singular is None else tol_singular


def _gram_values(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return (weights[:, None] * values).T @ values


def _normalize_sign(vecs: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so the first nonzero coordinate is positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.nonzero(np.abs(col) > 1e-14)[0]
        pivot = nz[0] if nz.size else 0
        if col[pivot] < 0:
            out[:, j] = -col
    return out


@dataclass(frozen=True, eq=False)
class GramData:
    """Spectral data of Gamma_u and the transfer operator A_u = L Id - Gamma_u."""

    gamma: np.ndarray        # (d, d) symmetric PSD
    a_op: np.ndarray         # (d, d)
    eigenvalues: np.ndarray  # descending, lambda_1 >= ... >= lambda_d
    eigenvectors: np.ndarray # columns, matching order, sign-normalized
    total_length: float

    @property
    def margin(self) -> float:
        return float(self.total_length - self.eigenvalues[0])

    @property
    def condition_number(self) -> float:
        """cond of A_u: largest over smallest eigenvalue (inf at a singularity)."""
        m = self.margin
        big = self.total_length - self.eigenvalues[-1]
        return float("inf") if m <= 0 else float(big / m)


def gram(u: Configuration) -> GramData:
    """Gram operator of u with its full eigensystem."""
    g = _gram_values(u.values, u.quadrature.weights)
    g = 0.5 * (g + g.T)
    evals, evecs = np.linalg.eigh(g)   # ascending
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = _normalize_sign(evecs[:, order])
    L = u.total_length
    return GramData(g, L * np.eye(u.d) - g, evals, evecs, L)


def solve_transfer(gd: GramData, rhs: np.ndarray, *,
                   tol_singular: float,
                   restricted: bool = False,
                   axis_tol: float = 1e-8) -> np.ndarray:
    """Solve A_u w = rhs through the eigensystem of Gamma_u.

    When restricted, directions with A-eigenvalue <= tol_singular are dropped
    after checking rhs has no component there (else DegeneracyError).
    """
    a_evals = gd.total_length - gd.eigenvalues      # ascending order of A
    coeffs = gd.eigenvectors.T @ rhs
    if gd.margin <= tol_singular:
        if not restricted:
            raise DegeneracyError(
                f"transfer operator is singular (margin {gd.margin:.3e})")
        degenerate = a_evals <= tol_singular
        bad = float(np.linalg.norm(coeffs[degenerate]))
        scale = max(float(np.linalg.norm(rhs)), 1e-300)
        if bad > axis_tol * scale:
            raise DegeneracyError(
                "requested head velocity has a component along the "
                f"uncontrollable axis (|component| = {bad:.3e})")
        coeffs = np.where(degenerate, 0.0, coeffs)
        safe = np.where(degenerate, 1.0, a_evals)
        return gd.eigenvectors @ (coeffs / safe)
    return gd.eigenvectors @ (coeffs / a_evals)


@dataclass(frozen=True, eq=False)
class SingularityReport:
    is_singular: bool
    margin: float
    axis: Optional[np.ndarray]          # leading eigenvector when singular
    collinearity_residual: float        # max_s dist(u(s), {+axis, -axis})
    tol_singular: float


def singularity(u: Configuration, tol_singular: Optional[float] = None) -> SingularityReport:
    """Classify u against the singular set via the Gram margin."""
    tol = singular_tolerance(u, tol_singular)
    gd = gram(u)
    axis = gd.eigenvectors[:, 0]
    dots = u.values @ axis
    residual = float(np.linalg.norm(u.values - np.sign(dots)[:, None] * axis,
                                    axis=1).max())
    is_sing = gd.margin <= tol
    return SingularityReport(is_sing, gd.margin, axis if is_sing else None,
                             residual, tol)
