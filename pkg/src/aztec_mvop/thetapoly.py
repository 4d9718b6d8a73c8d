"""Explicit monic orthogonal polynomials from theta functions on the curve.

The construction diagonalizes the one-period transfer matrix with an
eigenvector matrix, multiplies by a diagonal of theta-function quotients
raised to the size parameter (a linear flow on the curve), and removes the
resulting jump discontinuities with a twisted copy of the eigenvector matrix
whose twist is the size parameter times the rotation number.  The product
extends to a matrix polynomial; normalizing its leading coefficient (a lower
triangular matrix) makes it monic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .elliptic import (
    EllipticCurveData,
    SpectralCurve,
    build_curve_data,
    eigen_branches,
    theta,
)
from .errors import DegreeMismatch, DomainError, TriangularityViolation
from .matpoly import MatrixPolynomial
from .weights import WeightData


@dataclass(frozen=True, eq=False)
class _PointState:
    """Everything point-dependent the evaluators share at one z."""

    z: complex
    u: tuple  # Abel values on the two sheets
    lam: tuple  # eigenvalue pair, larger modulus first
    psi_val: np.ndarray  # cleared transfer matrix at z
    pref: complex  # pole prefactor at z


@dataclass(frozen=True, eq=False)
class ThetaFrame:
    """Curve data plus the marked Abel values used by all evaluators."""

    curve: SpectralCurve
    data: EllipticCurveData

    @classmethod
    def build(cls, w: WeightData) -> "ThetaFrame":
        curve = SpectralCurve.from_weight_data(w)
        return cls(curve, build_curve_data(curve))

    @cached_property
    def _marks(self):
        d = self.data
        k = d.theta_zero
        return {
            "pole": tuple(np.asarray(d.abel_pole, dtype=complex)),
            "inf": tuple(np.asarray(d.abel_inf, dtype=complex)),
            "star": complex(d.abel_star_plus),
            "star2": complex(d.abel_star2_plus),
            "K": complex(k),
        }

    @property
    def omega0(self) -> float:
        return self.data.omega0

    def _guard(self, z: complex):
        d = self.data
        band = 1e-12 * (1.0 + d.span)
        if abs(z.imag) <= band and d.x3 - band <= z.real <= d.x0 + band:
            raise DomainError(
                "evaluators are discontinuous on the real segment between the "
                "outer branch points",
                where="thetapoly.ThetaFrame",
            )

    def abel_pair(self, z):
        """Abel values of the two lifts of z; needs no eigenvalue data."""
        z = complex(z)
        self._guard(z)
        return self.data.abel(z, sheet=1), self.data.abel(z, sheet=2)

    def state(self, z) -> _PointState:
        z = complex(z)
        u1, u2 = self.abel_pair(z)
        lam1, lam2 = eigen_branches(self.curve, np.asarray(z, dtype=complex))
        return _PointState(z, (u1, u2), (complex(lam1), complex(lam2)),
                           self.curve.psi_at(np.asarray(z, dtype=complex)),
                           complex(self.curve.pole_prefactor(np.asarray(z, dtype=complex))))

    # -- evaluators ---------------------------------------------------------

    def eigenvector_matrix(self, z, state: _PointState | None = None) -> np.ndarray:
        """Columns are transfer-matrix eigenvectors, scaled by the pole prefactor."""
        st = state or self.state(z)
        e = np.empty((2, 2), dtype=complex)
        e[0, 0] = e[0, 1] = st.psi_val[0, 1]
        e[1, 0] = st.pref * st.lam[0] - st.psi_val[0, 0]
        e[1, 1] = st.pref * st.lam[1] - st.psi_val[0, 0]
        return e

    def flow_values(self, z, state: _PointState | None = None):
        """The pair of theta-quotient functions, one per sheet."""
        us = state.u if state is not None else self.abel_pair(z)
        m = self._marks
        k = m["K"]
        out = []
        for u in us:
            num = theta(u - m["pole"][0] - k, self.data.tau) \
                * theta(u - m["pole"][1] - k, self.data.tau)
            den = theta(u - m["inf"][0] - k, self.data.tau) \
                * theta(u - m["inf"][1] - k, self.data.tau)
            out.append(complex(num / den))
        return out[0], out[1]

    def flow_diag(self, z, power: int, state: _PointState | None = None) -> np.ndarray:
        g1, g2 = self.flow_values(z, state)
        return np.diag([g1 ** power, g2 ** power])

    def _twist_ratio(self, u: complex, omega: float, mark: complex) -> complex:
        k = self._marks["K"]
        return complex(theta(u - omega - mark - k, self.data.tau)
                       / theta(u - mark - k, self.data.tau))

    def twisted_eigenvector_matrix(self, omega: float, z,
                                   state: _PointState | None = None) -> np.ndarray:
        """Entrywise product of the eigenvector matrix with theta quotients
        shifted by ``omega``; integer omega gives back the plain matrix."""
        st = state or self.state(z)
        e = self.eigenvector_matrix(z, st)
        m = self._marks
        out = np.empty_like(e)
        for col in range(2):
            u = st.u[col]
            out[0, col] = e[0, col] * self._twist_ratio(u, omega, m["star"])
            out[1, col] = e[1, col] * self._twist_ratio(u, omega, m["star2"])
        return out

    def transfer_power_eval(self, z, n: int) -> np.ndarray:
        """Unnormalized left polynomial value: twisted * flow^n * inverse."""
        st = self.state(z)
        e = self.eigenvector_matrix(z, st)
        return (self.twisted_eigenvector_matrix(-n * self.omega0, z, st)
                @ self.flow_diag(z, n, st) @ np.linalg.inv(e))

    def transfer_power_eval_right(self, z, n: int) -> np.ndarray:
        """Unnormalized right polynomial value: plain * flow^n * inverse twisted."""
        st = self.state(z)
        e = self.eigenvector_matrix(z, st)
        tw = self.twisted_eigenvector_matrix(n * self.omega0, z, st)
        return e @ self.flow_diag(z, n, st) @ np.linalg.inv(tw)


def _check_lower_triangular(lead: np.ndarray, tol: float, where: str) -> None:
    off = abs(lead[0, 1])
    scale = float(np.max(np.abs(lead)))
    if off > tol * max(scale, 1e-300):
        raise TriangularityViolation(
            f"leading coefficient has off-triangle mass {off / scale:.3e}",
            where=where,
            hypothesis="normalizing constant is lower triangular",
        )


def _fit_poly_coeffs(frame: ThetaFrame, n: int, eval_fn, *,
                     oversample: int = 3, check_tol: float = 1e-7,
                     where: str = "thetapoly") -> np.ndarray:
    """Degree-n coefficients of a verified-polynomial evaluator by least squares.

    The evaluator is sampled at points of moderate modulus on an arc that
    stays clear of the real segment carrying the jump seams.  Fitting at
    O(1)-scale points avoids the noise amplification a Laurent extraction on
    a circle enclosing the whole branch segment would suffer (the low
    coefficients would inherit the radius-to-the-degree dynamic range).  A
    degree-(n+1) column acts as the degree check, and the oversampled fit
    residual guards against non-polynomial input.
    """
    c = frame.curve
    rho = 1.5 * max(1.0, float(np.max(c.beta_v)), abs(frame.data.x0))
    m = oversample * (n + 2)
    ang = np.linspace(-0.8 * np.pi, 0.8 * np.pi, m)
    pts = rho * np.exp(1j * ang)
    vals = np.stack([eval_fn(z) for z in pts])
    basis = (pts[:, None] / rho) ** np.arange(n + 2)[None, :]
    sol, *_ = np.linalg.lstsq(basis, vals.reshape(m, -1), rcond=None)
    coeffs = sol.reshape(n + 2, 2, 2) / rho ** np.arange(n + 2)[:, None, None]
    fit = np.einsum("mj,jkl->mkl", pts[:, None] ** np.arange(n + 2)[None, :], coeffs)
    scale = float(np.max(np.abs(vals)))
    resid = float(np.max(np.abs(fit - vals))) / max(scale, 1e-300)
    top = float(np.max(np.abs(coeffs[n + 1] * rho ** (n + 1)))) / max(scale, 1e-300)
    if resid > check_tol or top > check_tol:
        raise DegreeMismatch(
            f"samples are not a degree-{n} matrix polynomial "
            f"(fit residual {resid:.2e}, degree overflow {top:.2e})",
            where=where,
            hypothesis=f"transfer product extends to a polynomial of degree {n}",
        )
    return coeffs[: n + 1]


def explicit_left_poly(frame: ThetaFrame, n: int, *, tri_tol: float = 1e-8):
    """Monic left polynomial of degree n from the theta-function formula.

    Returns (polynomial, normalizing matrix); the normalizer is the inverse
    of the leading coefficient and must be lower triangular.
    """
    if n == 0:
        return MatrixPolynomial.identity(2), np.eye(2, dtype=complex)
    raw = _fit_poly_coeffs(frame, n, lambda z: frame.transfer_power_eval(z, n),
                           where="thetapoly.explicit_left_poly")
    lead = raw[n]
    _check_lower_triangular(lead, tri_tol, "thetapoly.explicit_left_poly")
    c_n = np.linalg.inv(lead)
    coeffs = np.einsum("ij,njk->nik", c_n, raw)
    return MatrixPolynomial(coeffs), c_n


def explicit_right_poly(frame: ThetaFrame, n: int, *, tri_tol: float = 1e-8):
    """Monic right polynomial of degree n from the theta-function formula."""
    if n == 0:
        return MatrixPolynomial.identity(2), np.eye(2, dtype=complex)
    raw = _fit_poly_coeffs(frame, n,
                           lambda z: frame.transfer_power_eval_right(z, n),
                           where="thetapoly.explicit_right_poly")
    lead = raw[n]
    _check_lower_triangular(lead, tri_tol, "thetapoly.explicit_right_poly")
    c_hat = np.linalg.inv(lead)
    coeffs = np.einsum("njk,kl->njl", raw, c_hat)
    return MatrixPolynomial(coeffs), c_hat
