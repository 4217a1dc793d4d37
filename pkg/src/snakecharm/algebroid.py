"""Finite-truncation algebroid: the bracket algebra on G = R^d + R^{d(d-1)/2}.

The frame fields and their brackets close under commutators with constant
integer structure coefficients; Psi anchors a coefficient vector to the
tangent field it generates.  The full bracket satisfies Jacobi exactly (the
algebra is so(d+1) in disguise, which the exhaustive tests certify without
assuming it); the almost bracket projects onto the sigma block and gives up
Jacobi in exchange for staying inside the horizontal frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np

from .frames import GVector, gvector_dim, lambda_pairs, psi
from .geometry import Configuration, LayoutError, TangentField, renormalize

__all__ = [
    "SectionField",
    "StructureConstants",
    "almost_bracket",
    "almost_jacobi_defect",
    "anchor",
    "g_bracket",
    "jacobi_defect",
    "section_bracket",
]

H_FD = 1e-5


def _omega_index(d: int, pairs: List[Tuple[int, int]], i: int, j: int) -> Tuple[int, int]:
    """Basis slot and sign of omega_ij, folding omega_ji = -omega_ij."""
    if i < j:
        return d + pairs.index((i, j)), +1
    return d + pairs.index((j, i)), -1


@dataclass(frozen=True, eq=False)
class StructureConstants:
    """Sparse integer bracket table over the basis (eps_0..eps_{d-1}, omega_ij)."""

    d: int
    table: Dict[Tuple[int, int], Tuple[Tuple[int, int], ...]] = field(default=None)

    def __post_init__(self):
        if self.d < 2:
            raise LayoutError("structure constants need d >= 2")
        pairs = lambda_pairs(self.d)
        d = self.d
        tbl: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}

        def put(p, q, r, c):
            if c != 0:
                tbl.setdefault((p, q), []).append((r, c))

        # [eps_i, eps_j] = omega_ij
        for i in range(d):
            for j in range(d):
                if i == j:
                    continue
                r, s = _omega_index(d, pairs, i, j)
                put(i, j, r, s)
        # [eps_i, omega_jk] = delta_ij eps_k - delta_ik eps_j (and antisymmetric flip)
        for i in range(d):
            for k_idx, (j, k) in enumerate(pairs):
                out: Dict[int, int] = {}
                if i == j:
                    out[k] = out.get(k, 0) + 1
                if i == k:
                    out[j] = out.get(j, 0) - 1
                for r, c in out.items():
                    put(i, d + k_idx, r, c)
                    put(d + k_idx, i, r, -c)
        # [omega_ij, omega_kl] = d_il w_jk + d_jk w_il - d_ik w_jl - d_jl w_ik
        for a_idx, (i, j) in enumerate(pairs):
            for b_idx, (k, l) in enumerate(pairs):
                acc: Dict[int, int] = {}

                def add(m, n, coeff):
                    if m == n or coeff == 0:
                        return
                    r, s = _omega_index(d, pairs, m, n)
                    acc[r] = acc.get(r, 0) + coeff * s

                if i == l:
                    add(j, k, 1)
                if j == k:
                    add(i, l, 1)
                if i == k:
                    add(j, l, -1)
                if j == l:
                    add(i, k, -1)
                for r, c in acc.items():
                    put(d + a_idx, d + b_idx, r, c)

        frozen = {key: tuple(val) for key, val in tbl.items()}
        object.__setattr__(self, "table", frozen)
        for (p, q), terms in frozen.items():
            for _, c in terms:
                if c not in (-1, 1):
                    raise AssertionError("structure coefficients must be +/-1")

    @property
    def dim(self) -> int:
        return gvector_dim(self.d)

    def bracket_basis(self, p: int, q: int) -> Tuple[Tuple[int, int], ...]:
        """[b_p, b_q] as ((slot, integer coefficient), ...)."""
        return self.table.get((p, q), ())

    def dense(self) -> np.ndarray:
        """(dim, dim, dim) int64 tensor C with [b_p, b_q] = sum_r C[p,q,r] b_r."""
        n = self.dim
        out = np.zeros((n, n, n), dtype=np.int64)
        for (p, q), terms in self.table.items():
            for r, c in terms:
                out[p, q, r] = c
        return out


_CACHE: Dict[int, StructureConstants] = {}


def structure_constants(d: int) -> StructureConstants:
    if d not in _CACHE:
        _CACHE[d] = StructureConstants(d)
    return _CACHE[d]


def g_bracket(a: GVector, b: GVector) -> GVector:
    """Bilinear extension of the integer bracket table."""
    if a.d != b.d:
        raise LayoutError(f"bracket operands have d = {a.d} and {b.d}")
    sc = structure_constants(a.d)
    va, vb = a.concat(), b.concat()
    out = np.zeros(sc.dim)
    for (p, q), terms in sc.table.items():
        coeff = va[p] * vb[q]
        if coeff == 0.0:
            continue
        for r, c in terms:
            out[r] += c * coeff
    return GVector.from_concat(out, a.d)


def jacobi_defect(a: GVector, b: GVector, c: GVector,
                  bracket: Callable[[GVector, GVector], GVector] = g_bracket) -> GVector:
    """[a,[b,c]] + [b,[c,a]] + [c,[a,b]] under the given bracket."""
    return GVector.from_concat(
        bracket(a, bracket(b, c)).concat()
        + bracket(b, bracket(c, a)).concat()
        + bracket(c, bracket(a, b)).concat(), a.d)


def anchor(u: Configuration, a: GVector) -> TangentField:
    """The anchored field Psi(u, a); the algebroid's view of psi."""
    return psi(u, a)


@dataclass(frozen=True, eq=False)
class SectionField:
    """A section u -> GVector with central-difference directional derivatives."""

    fn: Callable[[Configuration], GVector]
    h_fd: float = H_FD

    def value(self, u: Configuration) -> GVector:
        return self.fn(u)

    def directional_derivative(self, u: Configuration, w: TangentField) -> GVector:
        """d(section)/dt along the retracted line u + t w at t = 0."""
        h = self.h_fd
        plus = self.fn(renormalize(u.with_values(u.values + h * w.values)))
        minus = self.fn(renormalize(u.with_values(u.values - h * w.values)))
        return GVector.from_concat((plus.concat() - minus.concat()) / (2.0 * h), plus.d)

    @staticmethod
    def constant(a: GVector, h_fd: float = H_FD) -> "SectionField":
        return SectionField(lambda _u: a, h_fd)


def section_bracket(phi: SectionField, phi2: SectionField,
                    u: Configuration) -> GVector:
    """[phi, phi2](u) = [phi(u), phi2(u)] + dphi(Psi(u, phi2(u))) - dphi2(Psi(u, phi(u)))."""
    a = phi.value(u)
    b = phi2.value(u)
    lead = g_bracket(a, b)
    d_phi = phi.directional_derivative(u, psi(u, b))
    d_phi2 = phi2.directional_derivative(u, psi(u, a))
    return GVector.from_concat(lead.concat() + d_phi.concat() - d_phi2.concat(), a.d)


def almost_bracket(phi: SectionField, phi2: SectionField,
                   u: Configuration) -> GVector:
    """Projection of the section bracket onto the sigma block (xi zeroed)."""
    full = section_bracket(phi, phi2, u)
    return GVector(full.sigma, np.zeros_like(full.xi))


def almost_jacobi_defect(phi1: SectionField, phi2: SectionField,
                         phi3: SectionField, u: Configuration) -> GVector:
    """Jacobi defect of the almost bracket; reported, not expected to vanish."""

    def nest(f, g):
        return SectionField(lambda v: almost_bracket(f, g, v),
                            min(f.h_fd, g.h_fd))

    total = (almost_bracket(phi1, nest(phi2, phi3), u).concat()
             + almost_bracket(phi2, nest(phi3, phi1), u).concat()
             + almost_bracket(phi3, nest(phi1, phi2), u).concat())
    return GVector.from_concat(total, phi1.value(u).d)
