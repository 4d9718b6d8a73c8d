"""Circle contours, spectrally accurate quadrature, and Cauchy machinery.

All contour integrals in the package are (1/2pi i) times a closed integral
over a circle, discretized by the trapezoidal rule with node angles offset by
half a step so no node lands on the real axis.  For integrands analytic in an
annulus around the circle the error decays geometrically in the node count,
so the adaptive drivers double the node count until two successive estimates
agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    ContourGeometryImpossible,
    DegreeMismatch,
    NonConvergence,
    TooCloseToContour,
)

MAX_NODES = 16384


@dataclass(frozen=True, eq=False)
class CircleContour:
    """Positively oriented circle with trapezoidal quadrature nodes.

    Node m sits at angle 2*pi*(m + 1/2)/m_count, so an even node count never
    touches the real axis when the center is real.
    """

    center: complex
    radius: float
    m: int = 256

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.m < 64 or (self.m & (self.m - 1)) != 0:
            raise ValueError("node count must be a power of two, at least 64")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))

    @cached_property
    def nodes(self) -> np.ndarray:
        ang = 2.0 * np.pi * (np.arange(self.m) + 0.5) / self.m
        return self.center + self.radius * np.exp(1j * ang)

    @cached_property
    def quad_factors(self) -> np.ndarray:
        """Factors q_m with (1/2pi i) oint f dz ~= sum_m q_m f(z_m)."""
        return (self.nodes - self.center) / self.m

    def refined(self, factor: int = 2) -> "CircleContour":
        return CircleContour(self.center, self.radius, self.m * factor)

    def distance(self, z) -> np.ndarray:
        """Distance from z to the circle itself."""
        return np.abs(np.abs(np.asarray(z, dtype=complex) - self.center) - self.radius)

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z, dtype=complex) - self.center) < self.radius


def _estimate(contour: CircleContour, f) -> tuple[np.ndarray, float]:
    vals = np.asarray(f(contour.nodes))
    est = np.tensordot(contour.quad_factors, vals, axes=(0, 0))
    scale = float(np.sum(np.abs(contour.quad_factors) * np.max(np.abs(vals), axis=tuple(range(1, vals.ndim)), initial=0.0)))
    return est, scale


def integrate(contour: CircleContour, f, *, rel_tol: float = 1e-12,
              max_nodes: int = MAX_NODES, on_cap: str = "raise"):
    """(1/2pi i) oint f(z) dz with adaptive node doubling.

    ``f`` maps an array of points to an array of samples whose leading axis
    matches the points.  Doubling stops once two successive estimates agree to
    ``rel_tol`` relative to the integral or to the integrand magnitude
    (whichever is larger, so integrals that are genuinely zero converge too).
    With ``on_cap="return"`` the last estimate is returned when the node cap
    is reached; integrands dominated by rounding noise of large cancellations
    then yield their measurement floor instead of an error.
    """
    c = contour
    prev, prev_scale = _estimate(c, f)
    prev_diff = np.inf
    while c.m < max_nodes:
        c = c.refined()
        cur, scale = _estimate(c, f)
        floor = max(rel_tol, 3e-14 * np.sqrt(c.m))
        tol = max(rel_tol * float(np.max(np.abs(cur))), floor * scale)
        diff = float(np.max(np.abs(cur - prev)))
        if diff <= tol:
            return cur
        # geometric convergence squares the error under doubling, so a
        # stalled difference means the rounding floor of a large
        # cancellation was reached, not lack of resolution
        if diff > 0.25 * prev_diff and diff <= 1e-9 * scale:
            return cur
        prev, prev_diff = cur, diff
    if on_cap == "return":
        return prev
    raise NonConvergence(
        f"no agreement to {rel_tol:g} with {max_nodes} nodes",
        where="contour.integrate",
    )


def cauchy_transform(contour: CircleContour, f, z, *, rel_tol: float = 1e-12,
                     guard: float = 1e-8):
    """(1/2pi i) oint f(s)/(s - z) ds for a single point z off the contour."""
    z = complex(z)
    if contour.distance(z) < guard * contour.radius:
        raise TooCloseToContour(
            f"z = {z} is within {guard:g} * radius of the contour",
            where="contour.cauchy_transform",
        )
    return integrate(contour, lambda s: f(s) / (s - z)[..., None, None],
                     rel_tol=rel_tol)


def cauchy_transform_nodes(samples: np.ndarray, contour: CircleContour, zs):
    """Fixed-node Cauchy transform of precomputed samples, vectorized over zs.

    ``samples`` are f evaluated at ``contour.nodes``; no adaptivity.
    """
    zs = np.asarray(zs, dtype=complex)
    denom = contour.nodes[:, None] - zs[None, :]
    weighted = samples * contour.quad_factors[:, None, None]
    return np.einsum("mij,mz->zij", weighted, 1.0 / denom)


def extract_poly_coeffs(contour: CircleContour, f, degree: int, *,
                        rel_tol: float = 1e-12, check_tol: float = 1e-8,
                        max_nodes: int = MAX_NODES):
    """Coefficients A_j = (1/2pi i) oint f(z) z^{-j-1} dz for j = 0..degree.

    Valid when f agrees on and outside the circle with a matrix polynomial of
    degree <= ``degree`` (any singularities strictly inside are removable for
    the coefficients).  The circle must enclose the origin.  The coefficient
    at degree+1 is computed as a consistency check; if it is not negligible
    against the leading coefficient the function raises DegreeMismatch.
    """
    from .matpoly import MatrixPolynomial

    if abs(contour.center) >= contour.radius:
        raise ContourGeometryImpossible(
            "extraction circle must enclose the origin",
            where="contour.extract_poly_coeffs",
        )

    def all_coeffs(c: CircleContour) -> np.ndarray:
        vals = np.asarray(f(c.nodes))
        powers = c.nodes[:, None] ** (-(np.arange(degree + 2) + 1)[None, :])
        return np.einsum("m,mj,mkl->jkl", c.quad_factors, powers, vals)

    c = contour
    prev = all_coeffs(c)
    prev_diff = np.inf
    while True:
        if c.m >= max_nodes:
            raise NonConvergence(
                f"coefficients did not stabilize with {max_nodes} nodes",
                where="contour.extract_poly_coeffs",
            )
        c = c.refined()
        cur = all_coeffs(c)
        scale = float(np.max(np.abs(cur)))
        diff = float(np.max(np.abs(cur - prev)))
        if diff <= rel_tol * max(scale, 1e-300):
            break
        if diff > 0.25 * prev_diff and diff <= 1e-8 * scale:
            break
        prev, prev_diff = cur, diff

    lead = float(np.max(np.abs(cur[degree])))
    ref = lead if lead > 0 else float(np.max(np.abs(cur[: degree + 1])))
    overflow = float(np.max(np.abs(cur[degree + 1])))
    if overflow > check_tol * max(ref, 1e-300):
        raise DegreeMismatch(
            f"coefficient at degree {degree + 1} has norm {overflow:.3e} "
            f"(reference {ref:.3e})",
            where="contour.extract_poly_coeffs",
            hypothesis=f"f is a matrix polynomial of degree <= {degree}",
        )
    return MatrixPolynomial(cur[: degree + 1])


@dataclass(frozen=True, eq=False)
class ContourPair:
    """Inner contour (around the weight poles) and outer contour inside the zeros."""

    gamma: CircleContour
    gamma_prime: CircleContour

    def __post_init__(self):
        if self.gamma_prime.radius <= self.gamma.radius:
            raise ContourGeometryImpossible(
                "outer contour must strictly contain the inner one",
                where="contour.ContourPair",
            )

    @classmethod
    def from_real_points(cls, enclosed, excluded, *, m: int = 256,
                         m_prime: int | None = None) -> "ContourPair":
        """Circles centered on the real axis separating two real point sets.

        The center is the midpoint of the enclosed span.  Radii follow a
        geometric-mean rule: r = sqrt(d_enc * d_exc) for the inner circle and
        r' = sqrt(r * d_exc) for the outer one, where d_enc / d_exc are the
        largest enclosed / smallest excluded distances from the center.
        """
        enclosed = np.asarray(enclosed, dtype=float)
        excluded = np.asarray(excluded, dtype=float)
        if enclosed.size == 0:
            raise ContourGeometryImpossible("nothing to enclose",
                                            where="contour.ContourPair")
        c = 0.5 * (enclosed.min() + enclosed.max())
        d_enc = float(np.max(np.abs(enclosed - c)))
        if excluded.size == 0:
            d_exc = 4.0 * max(d_enc, 1.0)
        else:
            d_exc = float(np.min(np.abs(excluded - c)))
        if d_enc >= d_exc * (1.0 - 1e-9):
            raise ContourGeometryImpossible(
                f"enclosed span reaches {d_enc:.6g} from center {c:.6g} but an "
                f"excluded point sits at distance {d_exc:.6g}",
                where="contour.ContourPair.from_real_points",
                hypothesis="poles and zeros separable by circles on the real axis",
            )
        r = np.sqrt(d_enc * d_exc) if d_enc > 0 else 0.5 * d_exc
        r_prime = np.sqrt(r * d_exc)
        return cls(CircleContour(c, r, m),
                   CircleContour(c, r_prime, m_prime or m))

    @classmethod
    def from_weight_data(cls, w, *, m: int = 256, m_prime: int | None = None) -> "ContourPair":
        return cls.from_real_points(w.pole_points(), w.det_zero_points(),
                                    m=m, m_prime=m_prime)

    def intermediate(self, m: int | None = None) -> CircleContour:
        """A third circle strictly between the pair; useful as a second outer contour."""
        r = np.sqrt(self.gamma.radius * self.gamma_prime.radius)
        return CircleContour(self.gamma.center, r, m or self.gamma_prime.m)


def pole_enclosing_contour(w, *, margin: float = 1.25, m: int = 256) -> CircleContour:
    """Circle around the weight poles only, ignoring determinant zeros.

    Moments depend only on the residues at the enclosed poles, so this is the
    right contour for orthogonality work when no circle separates the poles
    from the zeros.
    """
    pts = np.asarray(w.pole_points(), dtype=float)
    c = 0.5 * (pts.min() + pts.max())
    d = float(np.max(np.abs(pts - c)))
    return CircleContour(c, margin * max(d, 0.5), m)
