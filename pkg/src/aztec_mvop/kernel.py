"""Correlation-kernel blocks by three equivalent contour-integral routes.

Route one keeps the reproducing kernel inside a double integral over two
outer contours (with the reproducing kernel itself expanded as an inner
integral over the factorization contour).  Route two uses the Wiener-Hopf
boundary values after the residue reduction, with the s variable on the
inner contour and z on the outer one.  Route three replaces the factor pair
by the left polynomial and its inverse.  Agreement of the three routes is the
module's core correctness check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contour import CircleContour, ContourPair
from .errors import DomainError
from .mvop import MVOPSolution, cd_companion
from .weights import WeightData, as_weight_fn, eval_partial_product
from .wienerhopf import WHFactorization


@dataclass(frozen=True)
class KernelQuery:
    """Integer kernel query; x indexes factor slabs, y vertical blocks."""

    x: int
    x_prime: int
    y: int
    y_prime: int

    def validate(self, w: WeightData):
        top = 2 * w.k * w.n - 1
        if not (0 < self.x < top and 0 < self.x_prime < top):
            raise DomainError(
                f"x indices must lie strictly between 0 and {top}",
                where="kernel.KernelQuery",
                hypothesis="query inside the admissible index range",
            )
        if not (0 <= self.y <= w.n - 1 and 0 <= self.y_prime <= w.n - 1):
            raise DomainError(
                f"y indices must lie in [0, {w.n - 1}]",
                where="kernel.KernelQuery",
                hypothesis="query inside the admissible index range",
            )


def single_term(w: WeightData, q: KernelQuery, outer: CircleContour) -> np.ndarray:
    """-(1/2pi i) oint (prod of factors x'+1..x)(z) z^{y'-y-1} dz, only for x > x'."""
    k = w.k
    if q.x <= q.x_prime:
        return np.zeros((k, k), dtype=complex)
    zs = outer.nodes
    prod = eval_partial_product(w, q.x_prime, q.x, zs)
    scal = zs ** (q.y_prime - q.y - 1) * outer.quad_factors
    return -np.einsum("m,mij->ij", scal, prod)


def _inv_prefix(w: WeightData, upto: int, zs: np.ndarray) -> np.ndarray:
    return np.linalg.inv(eval_partial_product(w, 0, upto, zs))


def kernel_via_rn(q: KernelQuery, sol: MVOPSolution, w: WeightData,
                  pair: ContourPair) -> np.ndarray:
    """Reproducing-kernel route: double integral over two outer circles.

    The reproducing kernel enters in its exterior Christoffel-Darboux form
    (polynomial evaluations only); the two copies of the outer contour use
    slightly different radii so its denominator never sees coincident nodes.
    """
    q.validate(w)
    if sol.q is None:
        raise DomainError("reproducing-kernel route needs the auxiliary polynomial",
                          where="kernel.kernel_via_rn")
    c1 = pair.gamma_prime
    c2 = pair.intermediate()

    z1, z2 = c1.nodes, c2.nodes
    g = cd_companion(sol)
    a_prod = eval_partial_product(w, q.x_prime, w.num_factors, z1)
    scal1 = (z1 ** q.y_prime * c1.quad_factors)[:, None, None]
    u = a_prod @ sol.phat(z1) * scal1
    x = a_prod @ g(z1) * scal1

    b_right = eval_partial_product(w, 0, q.x, z2)
    scal2 = (z2 ** (-q.y - 1) * c2.quad_factors)[:, None, None]
    v = sol.q(z2) @ b_right * scal2
    y = sol.p(z2) @ b_right * scal2

    inv_dz = 1.0 / (z2[None, :] - z1[:, None])
    double = (np.einsum("mij,mn,njl->il", u, inv_dz, v)
              - np.einsum("mij,mn,njl->il", x, inv_dz, y))
    return single_term(w, q, c1) + double


def kernel_via_wh(q: KernelQuery, f: WHFactorization, w: WeightData,
                  pair: ContourPair) -> np.ndarray:
    """Wiener-Hopf route: s on the inner contour, z on the outer contour."""
    q.validate(w)
    cg, c1 = pair.gamma, pair.gamma_prime
    s, z = cg.nodes, c1.nodes
    v = _inv_prefix(w, q.x_prime, s) @ f.phi_minus(s)
    v = v * (s ** q.y_prime * cg.quad_factors)[:, None, None]
    u = np.linalg.inv(f.phi(z)) @ eval_partial_product(w, 0, q.x, z)
    u = u * (z ** (-q.y - 1) * c1.quad_factors)[:, None, None]
    usum = np.einsum("mij,sm->sij", u, 1.0 / (s[:, None] - z[None, :]))
    double = -np.einsum("sij,sjl->il", v, usum)
    return single_term(w, q, c1) + double


def kernel_via_pn(q: KernelQuery, sol: MVOPSolution, w: WeightData,
                  pair: ContourPair) -> np.ndarray:
    """Polynomial route: the factor pair replaced by inv(P)(s) and P(z)."""
    q.validate(w)
    cg, c1 = pair.gamma, pair.gamma_prime
    s, z = cg.nodes, c1.nodes
    v = _inv_prefix(w, q.x_prime, s) @ sol.p.inverse_at(s)
    v = v * (s ** q.y_prime * cg.quad_factors)[:, None, None]
    u = sol.p(z) @ eval_partial_product(w, 0, q.x, z)
    u = u * (z ** (-q.y - 1) * c1.quad_factors)[:, None, None]
    usum = np.einsum("mij,sm->sij", u, 1.0 / (s[:, None] - z[None, :]))
    double = -np.einsum("sij,sjl->il", v, usum)
    return single_term(w, q, c1) + double


def kernel_all_routes(q: KernelQuery, sol: MVOPSolution, f: WHFactorization,
                      w: WeightData, pair: ContourPair) -> dict:
    """All three routes plus the worst pairwise relative disagreement."""
    blocks = {
        "reproducing": kernel_via_rn(q, sol, w, pair),
        "wiener_hopf": kernel_via_wh(q, f, w, pair),
        "polynomial": kernel_via_pn(q, sol, w, pair),
    }
    vals = list(blocks.values())
    scale = max(max(float(np.max(np.abs(b))) for b in vals), 1e-300)
    worst = max(
        float(np.max(np.abs(vals[i] - vals[j]))) / scale
        for i in range(3) for j in range(i + 1, 3)
    )
    return {"blocks": blocks, "residual_cross_check": worst}
