"""Dense matrix-valued polynomials with square complex coefficient blocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """Polynomial ``sum_j coeffs[j] z**j`` with k x k complex blocks.

    ``coeffs`` has shape (degree+1, k, k); index j holds the z**j coefficient.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[0] == 0 or c.shape[1] != c.shape[2]:
            raise ValueError("coeffs must have shape (degree+1, k, k)")
        object.__setattr__(self, "coeffs", c)

    @property
    def k(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def leading(self) -> np.ndarray:
        return self.coeffs[-1]

    @classmethod
    def identity(cls, k: int) -> "MatrixPolynomial":
        return cls(np.eye(k, dtype=complex)[None, :, :])

    @classmethod
    def from_scalar_coeffs(cls, coeffs) -> "MatrixPolynomial":
        c = np.asarray(coeffs, dtype=complex)
        return cls(c[:, None, None])

    def __call__(self, z):
        """Evaluate by Horner's rule; broadcasts over an array of points."""
        z = np.asarray(z, dtype=complex)
        out = np.broadcast_to(self.coeffs[-1], z.shape + self.coeffs.shape[1:]).copy()
        for block in self.coeffs[-2::-1]:
            out = out * z[..., None, None] + block
        return out

    def is_monic(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.leading - np.eye(self.k))) <= tol)

    def det_poly(self) -> np.ndarray:
        """Scalar coefficients (ascending) of det P, via exact interpolation.

        det P has degree at most k*degree; sampling at that many points on a
        circle away from the coefficient scale makes the fit an interpolation.
        """
        d = self.k * self.degree
        if d == 0:
            return np.array([np.linalg.det(self.coeffs[0])])
        rho = 1.0 + max(1.0, np.max(np.abs(self.coeffs)) ** (1.0 / max(1, self.degree)))
        zs = rho * np.exp(2j * np.pi * (np.arange(d + 1) + 0.25) / (d + 1))
        vals = np.linalg.det(self(zs))
        vand = zs[:, None] ** np.arange(d + 1)[None, :]
        return np.linalg.solve(vand, vals)

    def max_coeff_diff(self, other: "MatrixPolynomial") -> float:
        """Max entrywise coefficient difference, padding the shorter one."""
        n = max(self.coeffs.shape[0], other.coeffs.shape[0])
        a = np.zeros((n, self.k, self.k), dtype=complex)
        b = np.zeros((n, other.k, other.k), dtype=complex)
        a[: self.coeffs.shape[0]] = self.coeffs
        b[: other.coeffs.shape[0]] = other.coeffs
        return float(np.max(np.abs(a - b)))

    def coeff_scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def inverse_at(self, z) -> np.ndarray:
        """Inverse values computed as adjugate over the determinant polynomial.

        The determinant polynomial is evaluated directly from its own
        coefficients, which stays accurate even where the determinant nearly
        vanishes and a generic matrix inverse would lose digits.  Sizes above
        two fall back to the generic inverse.
        """
        z = np.asarray(z, dtype=complex)
        vals = self(z)
        if self.k == 1:
            return 1.0 / vals
        if self.k == 2:
            det = np.polynomial.polynomial.polyval(z, self.det_poly())
            adj = np.empty_like(vals)
            adj[..., 0, 0] = vals[..., 1, 1]
            adj[..., 1, 1] = vals[..., 0, 0]
            adj[..., 0, 1] = -vals[..., 0, 1]
            adj[..., 1, 0] = -vals[..., 1, 0]
            return adj / det[..., None, None]
        return np.linalg.inv(vals)
