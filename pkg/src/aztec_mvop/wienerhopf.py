"""Wiener-Hopf factors of the weight matrix, built from the monic polynomials.

On the factorization contour the weight splits as W = phi_minus phi_plus =
phihat_plus phihat_minus, where phi equals the inverse left polynomial in the
exterior and (left polynomial) * W in the interior, and phihat mirrors this
on the right.  The factors are stored as piecewise evaluators; boundary
values are realized by a small radial offset with one Richardson step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contour import CircleContour, extract_poly_coeffs
from .errors import DegreeMismatch, TooCloseToContour, ZeroInsideContour
from .matpoly import MatrixPolynomial
from .weights import WeightData, as_weight_fn

BOUNDARY_EPS = 1e-6
REGION_GUARD = 1e-8


@dataclass(frozen=True, eq=False)
class WHFactorization:
    """Piecewise-analytic factor evaluators plus winding diagnostics."""

    p: MatrixPolynomial
    phat: MatrixPolynomial
    weight_fn: object
    contour: CircleContour
    n: int
    winding: int
    expected_winding: int

    def _regions(self, z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z - self.contour.center)
        if np.any(np.abs(r - self.contour.radius) < REGION_GUARD * self.contour.radius):
            raise TooCloseToContour("point inside the contour guard band",
                                    where="wienerhopf.WHFactorization")
        return z, r < self.contour.radius

    def phi(self, z):
        """Left factor: inv(P) outside the contour, P W inside."""
        z, inside = self._regions(z)
        out = np.empty(z.shape + (self.p.k, self.p.k), dtype=complex)
        if np.any(inside):
            zi = z[inside]
            out[inside] = self.p(zi) @ self.weight_fn(zi)
        if np.any(~inside):
            ze = z[~inside]
            out[~inside] = self.p.inverse_at(ze)
        return out

    def phi_hat(self, z):
        """Right factor: inv(Phat) outside the contour, W Phat inside."""
        z, inside = self._regions(z)
        out = np.empty(z.shape + (self.p.k, self.p.k), dtype=complex)
        if np.any(inside):
            zi = z[inside]
            out[inside] = self.weight_fn(zi) @ self.phat(zi)
        if np.any(~inside):
            ze = z[~inside]
            out[~inside] = self.phat.inverse_at(ze)
        return out

    def _boundary(self, evaluator, s, sign: int, eps: float = BOUNDARY_EPS):
        """Richardson limit of ``evaluator`` toward the contour.

        ``sign`` = +1 approaches from the interior (plus boundary value),
        -1 from the exterior.  Two extrapolation levels keep the boundary
        values accurate to the level the factorization residuals demand.
        """
        s = np.asarray(s, dtype=complex)
        u = (s - self.contour.center)
        u = u / np.abs(u)
        step = sign * eps * self.contour.radius
        f1 = evaluator(s - step * u)
        f2 = evaluator(s - 0.5 * step * u)
        f4 = evaluator(s - 0.25 * step * u)
        r1 = 2.0 * f2 - f1
        r2 = 2.0 * f4 - f2
        return (4.0 * r2 - r1) / 3.0

    def phi_plus(self, s):
        return self._boundary(self.phi, s, +1)

    def phi_minus(self, s):
        return self._boundary(self.phi, s, -1)

    def phi_hat_plus(self, s):
        return self._boundary(self.phi_hat, s, +1)

    def phi_hat_minus(self, s):
        return self._boundary(self.phi_hat, s, -1)


def _winding_number(det_fn, contour: CircleContour) -> int:
    """Winding of a smooth nonvanishing function along the contour.

    Node count doubles until every phase step is unambiguous (below one
    radian), so sharp near-minima cannot alias the count.
    """
    c = contour
    while True:
        values = det_fn(c.nodes)
        steps = np.angle(np.roll(values, -1) / values)
        if float(np.max(np.abs(steps))) <= 1.0 or c.m >= 16 * contour.m:
            return int(round(float(np.sum(steps)) / (2.0 * np.pi)))
        c = c.refined()


def factors_from_mvop(sol, weight, contour: CircleContour, *,
                      expected_interior_zeros: int = 0,
                      check_winding: bool = True) -> WHFactorization:
    """Build the factorization from a solved pair of monic polynomials.

    The winding number of det(P W) along the contour counts its interior
    zeros; for an invertible factorization it must match the expected count
    (zero in the separated-contour setting).  A mismatch raises
    ZeroInsideContour.  ``expected_interior_zeros`` lets callers with known
    non-invertible factors (for example, scalar oracles with zeros at the
    origin) opt in.
    """
    wf = as_weight_fn(weight)
    if isinstance(weight, WeightData):
        # stable determinant route: det P is a fixed polynomial and det W has
        # a closed form, so the product avoids the cancellation that direct
        # evaluation of det(P(s) W(s)) suffers near the weight poles
        from numpy.polynomial import polynomial as npoly

        from .weights import det_W_closed_form

        det_p = sol.p.det_poly()
        det_fn = lambda s: npoly.polyval(s, det_p) * det_W_closed_form(weight, s)
    else:
        det_fn = lambda s: np.linalg.det(sol.p(s) @ wf(s))
    winding = _winding_number(det_fn, contour)
    if check_winding and winding != expected_interior_zeros:
        raise ZeroInsideContour(
            f"det(P W) winds {winding} times along the contour, expected "
            f"{expected_interior_zeros}",
            where="wienerhopf.factors_from_mvop",
            hypothesis="det(P W) has no unexpected zeros inside the contour",
        )
    return WHFactorization(sol.p, sol.phat, wf, contour, sol.n,
                           winding, expected_interior_zeros)


def mvop_from_factors(f: WHFactorization, *, radius_factor: float = 1.6,
                      m: int | None = None):
    """Recover the monic polynomials from the factors by coefficient extraction.

    The inverse of the exterior factor agrees with the respective polynomial
    on any circle outside the factorization contour.
    """
    circle = CircleContour(f.contour.center, radius_factor * f.contour.radius,
                           m or f.contour.m)
    p = extract_poly_coeffs(circle, lambda z: np.linalg.inv(f.phi(z)), f.n)
    phat = extract_poly_coeffs(circle, lambda z: np.linalg.inv(f.phi_hat(z)), f.n)
    for poly, name in ((p, "left"), (phat, "right")):
        if not poly.is_monic(1e-6):
            raise DegreeMismatch(
                f"recovered {name} polynomial is not monic",
                where="wienerhopf.mvop_from_factors",
            )
    return p, phat


def _interior_analyticity_residual(f: WHFactorization, weight_data: WeightData,
                                   j_max: int) -> float:
    """Relative Laurent mass of P W over a circle around all weight poles.

    If the factorization contour fails to enclose some pole of the weight,
    P W is not a polynomial and this residual is large; the pointwise product
    identity alone cannot flag that.
    """
    pts = weight_data.pole_points()
    c = 0.5 * (pts.min() + pts.max())
    r = 1.3 * max(float(np.max(np.abs(pts - c))), 0.5, abs(f.contour.center - c) + f.contour.radius)
    circle = CircleContour(c, r, max(f.contour.m, 512))
    wf = f.weight_fn
    vals = f.p(circle.nodes) @ wf(circle.nodes)
    worst = 0.0
    for j in range(j_max + 1):
        integrand = vals * (circle.nodes ** j)[:, None, None]
        est = np.tensordot(circle.quad_factors, integrand, axes=(0, 0))
        scale = float(np.sum(np.abs(circle.quad_factors)
                             * np.max(np.abs(integrand), axis=(1, 2))))
        worst = max(worst, float(np.max(np.abs(est))) / max(scale, 1e-300))
    return worst


def verify_factorization(f: WHFactorization, *, weight_data: WeightData | None = None,
                         far_factor: float = 1e3,
                         product_tol: float = 1e-10,
                         analyticity_tol: float = 1e-6) -> dict:
    """Residual report for the factorization; failures are reported, not raised.

    Keys: node residuals of both product identities, the normalization defect
    at a far point, minimal boundary determinants, the winding check, and
    (when weight data is available) the interior analyticity residual that
    catches contours missing a pole.
    """
    nodes = f.contour.nodes
    w_vals = f.weight_fn(nodes)
    w_norm = np.maximum(np.max(np.abs(w_vals), axis=(1, 2)), 1e-300)

    pm, pp = f.phi_minus(nodes), f.phi_plus(nodes)
    hp, hm = f.phi_hat_plus(nodes), f.phi_hat_minus(nodes)
    res = float(np.max(np.max(np.abs(pm @ pp - w_vals), axis=(1, 2)) / w_norm))
    res_hat = float(np.max(np.max(np.abs(hp @ hm - w_vals), axis=(1, 2)) / w_norm))

    z_far = f.contour.center + far_factor * f.contour.radius
    eye = np.eye(f.p.k)
    defect = max(
        float(np.max(np.abs(z_far ** f.n * f.phi(np.asarray(z_far)) - eye))),
        float(np.max(np.abs(z_far ** f.n * f.phi_hat(np.asarray(z_far)) - eye))),
    )

    min_det = min(
        float(np.min(np.abs(np.linalg.det(b)))) for b in (pm, pp, hp, hm)
    )

    report = {
        "residual_phi": res,
        "residual_phi_hat": res_hat,
        "normalization_defect": defect,
        "min_boundary_det": min_det,
        "winding_check": {
            "computed": f.winding,
            "expected": f.expected_winding,
            "ok": f.winding == f.expected_winding,
        },
    }
    ok = (res <= product_tol and res_hat <= product_tol
          and f.winding == f.expected_winding)
    if weight_data is not None:
        ana = _interior_analyticity_residual(f, weight_data, 2 * f.n + 2)
        report["interior_analyticity_residual"] = ana
        ok = ok and ana <= analyticity_tol
    report["ok"] = bool(ok)
    return report


def q_from_factors(f: WHFactorization, z, *, rel_tol: float = 1e-12):
    """Auxiliary polynomial at an exterior point via the boundary-value integral."""
    from .contour import integrate

    z = complex(z)
    if abs(z - f.contour.center) <= f.contour.radius * (1 + REGION_GUARD):
        raise TooCloseToContour("point must lie outside the factorization contour",
                                where="wienerhopf.q_from_factors")

    def integrand(s):
        vals = np.linalg.inv(f.phi_hat_plus(s)) @ f.phi_minus(s)
        return vals / (s - z)[..., None, None]

    t = integrate(f.contour, integrand, rel_tol=rel_tol)
    return t @ np.linalg.inv(f.phi(np.asarray(z)))
