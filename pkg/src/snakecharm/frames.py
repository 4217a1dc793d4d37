"""Frame fields spanning the horizontal distribution, their brackets, and rank.

E_i(u)(s) = e_i - u_i(s) u(s) are the horizontal gradients of the endpoint
coordinates.  Their pairwise brackets close onto the rotation generator
fields B_ij(u)(s) = u_j(s) E_i(u)(s) - u_i(s) E_j(u)(s) = (e_i e_j^T -
e_j e_i^T) u(s), and the whole family {E_i, B_ij} is closed under the
commutator convention C(X, Y) = DX.Y - DY.X used throughout.

Psi maps a constant coefficient vector a = (sigma, xi) in R^{d + d(d-1)/2}
to the field sum(sigma_i E_i) + sum_{i<j}(xi_ij B_ij); its pointwise rank
measures the bracket-closure distribution at u.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .endpoint import GramData, gram, singular_tolerance, solve_transfer
from .geometry import Configuration, LayoutError, TangentField, integrate_field

__all__ = [
    "GVector",
    "PolyField",
    "RankReport",
    "bracket_field",
    "dbar_rank",
    "frame_field",
    "gvector_dim",
    "horizontal_gradient",
    "horizontal_projection",
    "lambda_pairs",
    "matrix_to_xi",
    "pointwise_commutator",
    "predicted_kernel_dim",
    "psi",
    "psi_matrix",
    "v_subspace",
    "xi_to_matrix",
]

TOL_RANK = 1e-9


def lambda_pairs(d: int) -> List[Tuple[int, int]]:
    """Lexicographic index pairs (i, j), i < j, for the xi block."""
    return [(i, j) for i in range(d) for j in range(i + 1, d)]


def gvector_dim(d: int) -> int:
    return d + d * (d - 1) // 2


def xi_to_matrix(xi: np.ndarray, d: int) -> np.ndarray:
    """Antisymmetric matrix with upper triangle xi in lexicographic order."""
    m = np.zeros((d, d))
    for k, (i, j) in enumerate(lambda_pairs(d)):
        m[i, j] = xi[k]
        m[j, i] = -xi[k]
    return m


def matrix_to_xi(m: np.ndarray) -> np.ndarray:
    d = m.shape[0]
    return np.array([m[i, j] for i, j in lambda_pairs(d)])


@dataclass(frozen=True, eq=False)
class GVector:
    """Coefficients (sigma, xi) in R^d x R^{d(d-1)/2} for the field family."""

    sigma: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        x = np.asarray(self.xi, dtype=float)
        d = s.size
        if x.size != d * (d - 1) // 2:
            raise LayoutError(f"xi block has {x.size} entries, expected "
                              f"{d * (d - 1) // 2} for d = {d}")
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "xi", x)

    @property
    def d(self) -> int:
        return self.sigma.size

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.sigma @ self.sigma + self.xi @ self.xi))

    def concat(self) -> np.ndarray:
        return np.concatenate([self.sigma, self.xi])

    def xi_matrix(self) -> np.ndarray:
        return xi_to_matrix(self.xi, self.d)

    @staticmethod
    def from_concat(vec: np.ndarray, d: int) -> "GVector":
        return GVector(vec[:d], vec[d:])

    @staticmethod
    def zero(d: int) -> "GVector":
        return GVector(np.zeros(d), np.zeros(d * (d - 1) // 2))

    @staticmethod
    def sigma_basis(d: int, i: int) -> "GVector":
        g = GVector.zero(d)
        s = g.sigma.copy()
        s[i] = 1.0
        return GVector(s, g.xi)

    @staticmethod
    def xi_basis(d: int, i: int, j: int) -> "GVector":
        if not i < j:
            raise LayoutError("xi basis indices must satisfy i < j")
        x = np.zeros(d * (d - 1) // 2)
        x[lambda_pairs(d).index((i, j))] = 1.0
        return GVector(np.zeros(d), x)


# -- the field family ------------------------------------------------------

def frame_field(u: Configuration, i: int) -> TangentField:
    """E_i(u)(s) = e_i - u_i(s) u(s), the horizontal gradient of head coord i."""
    if not 0 <= i < u.d:
        raise LayoutError(f"frame index {i} out of range for d = {u.d}")
    vals = -u.values[:, i][:, None] * u.values
    vals[:, i] += 1.0
    return TangentField(u, vals)


def horizontal_gradient(u: Configuration, g: np.ndarray) -> TangentField:
    """Pointwise tangential projection of the constant vector g."""
    g = np.asarray(g, dtype=float)
    if g.shape != (u.d,):
        raise LayoutError(f"gradient direction has shape {g.shape}, expected ({u.d},)")
    vals = g[None, :] - (u.values @ g)[:, None] * u.values
    return TangentField(u, vals)


def bracket_field(u: Configuration, i: int, j: int, *,
                  allow_equal: bool = False) -> TangentField:
    """B_ij(u)(s) = u_j(s) E_i(u)(s) - u_i(s) E_j(u)(s)."""
    if i == j:
        if allow_equal:
            return TangentField(u, np.zeros_like(u.values))
        raise LayoutError("bracket of a frame field with itself is zero; "
                          "pass allow_equal=True if that is intended")
    ei = frame_field(u, i).values
    ej = frame_field(u, j).values
    vals = u.values[:, j][:, None] * ei - u.values[:, i][:, None] * ej
    return TangentField(u, vals)


def psi(u: Configuration, a: GVector) -> TangentField:
    """Psi_u(a) = sum sigma_i E_i(u) + sum_{i<j} xi_ij B_ij(u)."""
    if a.d != u.d:
        raise LayoutError(f"coefficient dimension {a.d} != ambient {u.d}")
    sig = a.sigma
    vals = sig[None, :] - (u.values @ sig)[:, None] * u.values
    vals += u.values @ a.xi_matrix().T
    return TangentField(u, vals)


def psi_matrix(u: Configuration, *, weighted: bool = True) -> np.ndarray:
    """Stack Psi images of all basis coefficient vectors as columns.

    Rows are samples x ambient coordinates, scaled by sqrt(quadrature weight)
    when weighted, so columns have L^2 geometry; rank is unaffected either way.
    """
    d = u.d
    dim = gvector_dim(d)
    cols = np.empty((u.n_samples * d, dim))
    for k in range(d):
        cols[:, k] = frame_field(u, k).values.ravel()
    for k, (i, j) in enumerate(lambda_pairs(d)):
        cols[:, d + k] = bracket_field(u, i, j).values.ravel()
    if weighted:
        scale = np.repeat(np.sqrt(u.quadrature.weights), d)
        cols = scale[:, None] * cols
    return cols


# -- pointwise-analytic commutators on the closed family --------------------

@dataclass(frozen=True, eq=False)
class PolyField:
    """Ambient field x -> a - <a, x> x + M x with constant a and antisymmetric M.

    The family contains every frame field (a = e_i, M = 0) and every bracket
    field (a = 0, M = e_i e_j^T - e_j e_i^T), and is closed under the
    commutator below; jvp is the exact derivative, no differencing.
    """

    a: np.ndarray
    m: np.ndarray

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.a - (x @ self.a)[..., None] * x + x @ self.m.T

    def jvp(self, x: np.ndarray, h: np.ndarray) -> np.ndarray:
        """Directional derivative D field(x) . h (exact)."""
        return (-(h @ self.a)[..., None] * x
                - (x @ self.a)[..., None] * h + h @ self.m.T)

    @staticmethod
    def frame(d: int, i: int) -> "PolyField":
        a = np.zeros(d)
        a[i] = 1.0
        return PolyField(a, np.zeros((d, d)))

    @staticmethod
    def rotation(d: int, i: int, j: int) -> "PolyField":
        m = np.zeros((d, d))
        m[i, j] = 1.0
        m[j, i] = -1.0
        return PolyField(np.zeros(d), m)

    @staticmethod
    def of_gvector(a: "GVector") -> "PolyField":
        return PolyField(a.sigma.copy(), a.xi_matrix())


def pointwise_commutator(x_field: PolyField, y_field: PolyField, pts: np.ndarray) -> np.ndarray:
    """C(X, Y)(x) = DX(x).Y(x) - DY(x).X(x), evaluated at pts (ladder sign convention)."""
    return (x_field.jvp(pts, y_field(pts)) - y_field.jvp(pts, x_field(pts)))


# -- rank of the bracket-closure distribution --------------------------------

def v_subspace(u: Configuration, tol_rank: float = TOL_RANK) -> np.ndarray:
    """Orthonormal basis (d x m) of V_u = span{u(s) - u(0)}."""
    diffs = u.values - u.values[0]
    if diffs.shape[0] == 1 or not np.any(np.abs(diffs) > 0):
        return np.zeros((u.d, 0))
    _, svals, vt = np.linalg.svd(diffs, full_matrices=False)
    keep = svals > tol_rank * svals[0] if svals[0] > 0 else np.zeros_like(svals, bool)
    return vt[keep].T


def predicted_kernel_dim(d: int, v_dim: int, is_singular: bool) -> int:
    """Closed-form kernel count: antisymmetric maps killing V_u, plus the axis line.

    Valid when u takes at least three distinct values or is collinear; a regular
    configuration with exactly two distinct values carries one extra kernel
    direction not covered by this count.
    """
    free = d - v_dim
    return free * (free - 1) // 2 + (1 if is_singular else 0)


@dataclass(frozen=True, eq=False)
class RankReport:
    rank: int
    v_dim: int
    kernel_basis: List[GVector]
    singular_values: np.ndarray  # descending
    model: str


def dbar_rank(u: Configuration, model: Optional[str] = None,
              tol_rank: float = TOL_RANK) -> RankReport:
    """Numerical rank and kernel of Psi_u on the discretized tangent model."""
    if model is None:
        model = u.kind
    if model != u.kind:
        raise LayoutError(
            f"configuration is represented as {u.kind!r}; rebuild it before "
            f"asking for the {model!r} model")
    mat = psi_matrix(u)
    _, svals, vt = np.linalg.svd(mat, full_matrices=True)
    dim = gvector_dim(u.d)
    svals_full = np.zeros(dim)
    svals_full[:svals.size] = svals
    top = svals_full[0]
    if top == 0.0:
        rank = 0
    else:
        rank = int(np.sum(svals_full > tol_rank * top))
    kernel = [GVector.from_concat(vt[k], u.d) for k in range(rank, dim)]
    return RankReport(rank, v_subspace(u, tol_rank).shape[1], kernel,
                      svals_full, model)


# -- minimal-norm horizontal representative ---------------------------------

def horizontal_projection(u: Configuration, v: TangentField,
                          tol_singular: Optional[float] = None,
                          gram_data: Optional[GramData] = None) -> TangentField:
    """L^2-orthogonal projection of v onto span{E_1, ..., E_d} at u.

    Solves A_u w = integral(v) and returns the horizontal gradient of w; at a
    singular u the solve is restricted to the controllable complement (and
    fails if integral(v) has a component along the axis).
    """
    gd = gram(u) if gram_data is None else gram_data
    tol = singular_tolerance(u, tol_singular)
    rhs = integrate_field(v)
    w = solve_transfer(gd, rhs, tol_singular=tol, restricted=gd.margin <= tol)
    return horizontal_gradient(u, w)
