"""Genus-one spectral curve of the two-by-two periodic weight matrix.

The one-period transfer matrix is the product of four elementary factors.
Clearing its two poles gives a polynomial matrix whose trace and determinant
define a degree-four discriminant; the four real roots are the branch points
of the eigenvalue curve.  On the resulting elliptic curve this module
computes the normalized holomorphic differential, the periods, the Abel map
(with boundary values on the real ovals), the Jacobi theta function, the two
special points where the off-diagonal transfer entries vanish, and the
rotation number built from the Abel values of the eigenvalue poles.

Conventions.  The square-root branch is the product of principal square
roots of (z - x_j); it is analytic off the two cuts, positive on
(x_0, infinity), and negative on the bounded oval.  The first sheet carries
the eigenvalue of larger modulus; on it the holomorphic differential is
dz / (C * sqrt), which makes the bounded-oval cycle integral equal +1 with
the orientation used throughout.  The Abel map uses the rightmost branch
point as base point, with paths kept inside the slit plane, and lands in the
fundamental rectangle centered at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    ConfigError,
    DegeneratePosition,
    DomainError,
    GenusZero,
    NonConvergence,
    NonRealBranchPoint,
    PathCrossesCut,
    PeriodNormalizationFailure,
)
from .weights import WeightData

_AXIS_EPS = 1e-12


# ---------------------------------------------------------------------------
# spectral curve


def _polymat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0] - 1, 2, 2), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            out[i + j] += a[i] @ b[j]
    return out


def _polymat_eval(coeffs: np.ndarray, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.broadcast_to(coeffs[-1], z.shape + (2, 2)).copy()
    for block in coeffs[-2::-1]:
        out = out * z[..., None, None] + block
    return out


@dataclass(frozen=True, eq=False)
class SpectralCurve:
    """Cleared one-period transfer matrix and its discriminant data."""

    alpha: np.ndarray  # (2, 2) base columns
    beta: np.ndarray
    gamma: np.ndarray
    psi: np.ndarray  # (3, 2, 2) cleared transfer matrix, degree <= 2
    tr_coeffs: np.ndarray  # (3,)
    det_coeffs: np.ndarray  # (5,)
    disc_coeffs: np.ndarray  # (5,)
    phi_inf: np.ndarray  # (2, 2)
    _cache: dict = field(default_factory=dict)

    @classmethod
    def from_weight_data(cls, w: WeightData) -> "SpectralCurve":
        if w.k != 2:
            raise ConfigError("spectral-curve machinery requires k = 2",
                              where="elliptic.SpectralCurve")
        base_a, base_b, base_g = w.alpha[:, :2], w.beta[:, :2], w.gamma[:, :2]
        for name, arr, base in (("alpha", w.alpha, base_a), ("beta", w.beta, base_b),
                                ("gamma", w.gamma, base_g)):
            tiled = np.tile(base, (1, w.n))
            if not np.allclose(arr, tiled, rtol=0, atol=0):
                raise ConfigError(
                    f"{name} is not two-periodic in the column index",
                    where="elliptic.SpectralCurve",
                    hypothesis="weights are two-by-two periodic",
                )
        return cls.from_base_columns(base_a, base_b, base_g)

    @classmethod
    def from_base_columns(cls, alpha, beta, gamma) -> "SpectralCurve":
        a = np.asarray(alpha, dtype=float)
        b = np.asarray(beta, dtype=float)
        g = np.asarray(gamma, dtype=float)
        if a.shape != (2, 2) or b.shape != (2, 2) or g.shape != (2, 2):
            raise ConfigError("base columns must be 2 x 2 arrays",
                              where="elliptic.SpectralCurve")

        def b_factor(i):
            # z * (b factor of column i), a degree-one polynomial matrix
            c0 = np.array([[0.0, a[1, i]], [0.0, 0.0]], dtype=complex)
            c1 = np.array([[g[0, i], 0.0], [a[0, i], g[1, i]]], dtype=complex)
            return np.stack([c0, c1])

        def g_factor(i):
            # (z - beta_i^v) * (g factor of column i)
            c0 = np.array([[0.0, b[1, i]], [0.0, 0.0]], dtype=complex)
            c1 = np.array([[1.0, 0.0], [b[0, i], 1.0]], dtype=complex)
            return np.stack([c0, c1])

        num = _polymat_mul(_polymat_mul(b_factor(0), g_factor(0)),
                           _polymat_mul(b_factor(1), g_factor(1)))
        # the two z factors pulled out of the b factors divide the product
        dust = float(np.max(np.abs(num[:2]))) / max(float(np.max(np.abs(num))), 1e-300)
        if dust > 1e-12:
            raise ConfigError(
                f"cleared transfer matrix is not polynomial (residual {dust:.2e})",
                where="elliptic.SpectralCurve",
            )
        psi = num[2:]

        beta_v = b.prod(axis=0)
        alpha_v = a.prod(axis=0)
        gamma_v = g.prod(axis=0)
        tr = np.array([psi[j, 0, 0] + psi[j, 1, 1] for j in range(3)])
        det = npoly.polymul(npoly.polymul([-beta_v[0], 1.0], [-beta_v[1], 1.0]),
                            npoly.polymul([-alpha_v[0], gamma_v[0]],
                                          [-alpha_v[1], gamma_v[1]]))
        disc = npoly.polysub(npoly.polymul(tr, tr), 4.0 * det)
        disc = np.pad(disc, (0, 5 - disc.size))

        phi_inf = np.eye(2)
        for i in range(2):
            phi_inf = phi_inf @ np.array([[g[0, i], 0.0], [a[0, i], g[1, i]]])
            phi_inf = phi_inf @ np.array([[1.0, 0.0], [b[0, i], 1.0]])

        return cls(a, b, g, psi, tr, np.asarray(det, dtype=complex),
                   np.asarray(disc, dtype=complex), phi_inf)

    @property
    def beta_v(self) -> np.ndarray:
        return self.beta.prod(axis=0)

    @property
    def alpha_v(self) -> np.ndarray:
        return self.alpha.prod(axis=0)

    @property
    def gamma_v(self) -> np.ndarray:
        return self.gamma.prod(axis=0)

    def pole_prefactor(self, z):
        z = np.asarray(z, dtype=complex)
        b1, b2 = self.beta_v
        return (z - b1) * (z - b2)

    def psi_at(self, z) -> np.ndarray:
        return _polymat_eval(self.psi, z)

    def phi_at(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return self.psi_at(z) / self.pole_prefactor(z)[..., None, None]

    def disc_at(self, z):
        return npoly.polyval(np.asarray(z, dtype=complex), self.disc_coeffs)

    def _guard_roots(self) -> np.ndarray:
        """Sorted real projections of the discriminant roots, no genus checks."""
        if "guard_roots" not in self._cache:
            r = np.sort(np.roots(self.disc_coeffs[::-1]).real)
            self._cache["guard_roots"] = r
        return self._cache["guard_roots"]


def branch_points(curve: SpectralCurve):
    """The four real branch points, ascending; raises on degenerate curves."""
    if "branch_points" in curve._cache:
        return curve._cache["branch_points"]
    d = curve.disc_coeffs
    scale = float(np.max(np.abs(d)))
    if abs(d[4]) < 1e-12 * scale:
        raise DegeneratePosition(
            "discriminant degree drops below four (branching at infinity)",
            where="elliptic.branch_points",
            hypothesis="the two gamma column products differ",
        )
    roots = np.roots(d[::-1])
    dp = npoly.polyder(d)
    for _ in range(2):
        roots = roots - npoly.polyval(roots, d) / npoly.polyval(roots, dp)
    span = float(np.max(np.abs(roots)) + 1.0)
    for r in roots:
        if abs(r.imag) > 1e-5 * span:
            raise NonRealBranchPoint(
                f"discriminant root {r} is not real",
                where="elliptic.branch_points",
            )
    xs = np.sort(roots.real)
    if xs[-1] > 1e-8 * span:
        raise DomainError(
            f"largest branch point {xs[-1]:.3e} is positive",
            where="elliptic.branch_points",
            hypothesis="branch points are non-positive for positive weights",
        )
    x3, x2, x1, x0 = xs
    worst_imag = float(np.max(np.abs(roots.imag)))
    genus_tol = max(1e-10 * abs(x2), 1e-6 * (x0 - x3), 10.0 * worst_imag)
    if x1 - x2 < genus_tol:
        raise GenusZero(
            f"middle branch points coincide (gap {x1 - x2:.3e})",
            where="elliptic.branch_points",
            hypothesis="the spectral curve has genus one",
        )
    out = (float(x3), float(x2), float(x1), float(x0))
    curve._cache["branch_points"] = out
    return out


def _near_cut(z, xs, band: float) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    x3, x2, x1, x0 = xs
    on_axis = np.abs(z.imag) <= band
    in_cut1 = (z.real >= x3 - band) & (z.real <= x2 + band)
    in_cut2 = (z.real >= x1 - band) & (z.real <= x0 + band)
    return on_axis & (in_cut1 | in_cut2)


def eigen_branches(curve: SpectralCurve, z):
    """Eigenvalue pair (larger modulus first), analytic off the two cuts."""
    z = np.asarray(z, dtype=complex)
    xs = curve._guard_roots()
    span = float(xs[-1] - xs[0] + 1.0)
    if np.any(_near_cut(z, xs, _AXIS_EPS * span)):
        raise DomainError("eigenvalues are discontinuous on the branch cuts",
                          where="elliptic.eigen_branches")
    for bv in curve.beta_v:
        if np.any(np.abs(z - bv) < 1e-12 * (1.0 + bv)):
            raise DomainError(f"z = {bv} is a pole of the transfer matrix",
                              where="elliptic.eigen_branches")
    pref = curve.pole_prefactor(z)
    tr = npoly.polyval(z, curve.tr_coeffs) / pref
    det = npoly.polyval(z, curve.det_coeffs) / pref ** 2
    s = np.sqrt(npoly.polyval(z, curve.disc_coeffs)) / pref
    lam_a = 0.5 * (tr + s)
    lam_b = 0.5 * (tr - s)
    swap = np.abs(lam_b) > np.abs(lam_a)
    lam1 = np.where(swap, lam_b, lam_a)
    # recompute the small eigenvalue from the determinant for stability
    lam2 = det / lam1
    return lam1, lam2


# ---------------------------------------------------------------------------
# Gauss-Legendre segments


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_rule(n: int):
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[n]


def _gl_segment(f, *, rel_tol: float = 5e-14, n0: int = 64, n_max: int = 16384):
    """Integral over t in [0, 1] of f(t), doubling the rule until agreement."""
    n = n0
    t, w = _gl_rule(n)
    prev = np.sum(w * f(t))
    prev_scale = float(np.sum(w * np.abs(f(t))))
    while n < n_max:
        n *= 2
        t, w = _gl_rule(n)
        vals = f(t)
        cur = np.sum(w * vals)
        scale = float(np.sum(w * np.abs(vals)))
        if abs(cur - prev) <= rel_tol * max(abs(cur), scale, prev_scale):
            return cur
        prev, prev_scale = cur, scale
    raise NonConvergence("path segment did not converge",
                         where="elliptic._gl_segment")


# ---------------------------------------------------------------------------
# periods and the square-root branch


def sqrt_branch(xs, z):
    """Product of principal square roots of (z - x_j); analytic off the cuts."""
    z = np.asarray(z, dtype=complex)
    x3, x2, x1, x0 = xs
    return np.sqrt(z - x3) * np.sqrt(z - x2) * np.sqrt(z - x1) * np.sqrt(z - x0)


def _abs_quartic(xs, x):
    x3, x2, x1, x0 = xs
    return np.abs((x - x3) * (x - x2) * (x - x1) * (x - x0))


def _oval_integral(xs, a: float, b: float, *, rel_tol: float = 1e-12) -> float:
    """integral_a^b dx / sqrt(|quartic|) with inverse-square-root endpoints."""
    mid = 0.5 * (a + b)

    def left(t):
        x = a + (mid - a) * t * t
        rest = _abs_quartic(xs, x) / (x - a)
        return 2.0 * np.sqrt(mid - a) / np.sqrt(rest)

    def right(t):
        x = b - (b - mid) * t * t
        rest = _abs_quartic(xs, x) / (b - x)
        return 2.0 * np.sqrt(b - mid) / np.sqrt(rest)

    return float(np.real(_gl_segment(left, rel_tol=rel_tol)
                         + _gl_segment(right, rel_tol=rel_tol)))


def _loop_integral(xs, center: float, radius: float, m: int) -> complex:
    """Trapezoid of dz / sqrt_branch over a circle avoiding the cuts."""
    ang = 2.0 * np.pi * (np.arange(m) + 0.5) / m
    z = center + radius * np.exp(1j * ang)
    vals = 1.0 / sqrt_branch(xs, z)
    return complex(np.sum(vals * (z - center)) * 2j * np.pi / m)


def _a_cycle_integral(xs, c_norm: float) -> complex:
    """Loop around the bounded oval with the sheet switch on the lower arc."""
    x3, x2, x1, x0 = xs
    g = 0.5 * min(x2 - x3, x0 - x1)
    c = 0.5 * (x2 + x1)
    r = 0.5 * (x1 - x2) + 0.5 * g

    def arc(t, lo, hi, sign):
        th = lo + (hi - lo) * t
        z = c + r * np.exp(1j * th)
        return sign * (hi - lo) * 1j * r * np.exp(1j * th) / sqrt_branch(xs, z)

    upper = _gl_segment(lambda t: arc(t, 0.0, np.pi, +1.0))
    lower = _gl_segment(lambda t: arc(t, np.pi, 2.0 * np.pi, -1.0))
    return (upper + lower) / c_norm


def periods(xs, *, rel_tol: float = 1e-12):
    """Normalization constant, the period tau, and period diagnostics.

    The constant makes the bounded-oval cycle integral one; tau is the loop
    integral around the rightmost cut, sign-fixed to the upper half plane.
    Raises PeriodNormalizationFailure when the independent cycle checks miss.
    """
    x3, x2, x1, x0 = xs
    c_norm = 2.0 * _oval_integral(xs, x2, x1, rel_tol=rel_tol)

    g = 0.5 * min(x1 - x2, x0 - x1)
    cb = 0.5 * (x1 + x0)
    rb = 0.5 * (x0 - x1) + 0.5 * g
    tau_m = _loop_integral(xs, cb, rb, 512) / c_norm
    tau_2m = _loop_integral(xs, cb, rb, 1024) / c_norm
    drift = abs(tau_2m - tau_m) / max(abs(tau_2m), 1e-300)
    tau = tau_2m
    flipped = False
    if tau.imag < 0:
        tau, flipped = -tau, True
    if drift > 1e-10:
        raise PeriodNormalizationFailure(
            f"tau drifts by {drift:.3e} under quadrature doubling",
            where="elliptic.periods",
        )
    if abs(tau.real) > 1e-8 * max(1.0, abs(tau)):
        raise PeriodNormalizationFailure(
            f"tau = {tau} is not purely imaginary",
            where="elliptic.periods",
        )
    a_val = _a_cycle_integral(xs, c_norm)
    if abs(a_val - 1.0) > 1e-9:
        raise PeriodNormalizationFailure(
            f"bounded-oval cycle integral is {a_val}, expected 1",
            where="elliptic.periods",
        )
    tau_alt = 2j * _oval_integral(xs, x1, x0, rel_tol=rel_tol) / c_norm
    diag = {
        "a_cycle": a_val,
        "tau_drift": drift,
        "tau_vs_collapsed": abs(tau - tau_alt) / abs(tau),
        "tau_sign_flipped": flipped,
    }
    return c_norm, complex(tau), diag


# ---------------------------------------------------------------------------
# curve data and the Abel map


@dataclass(eq=False)
class EllipticCurveData:
    """Branch points, periods, Abel values of the marked points, and caches."""

    curve: SpectralCurve
    x3: float
    x2: float
    x1: float
    x0: float
    c_norm: float
    tau: complex
    period_diag: dict
    abel_pole: tuple = ()
    abel_inf: tuple = ()
    x_star: float = 0.0
    x_star2: float = 0.0
    sheet_star: int = 0
    sheet_star2: int = 0
    abel_star_plus: complex = 0.0
    abel_star2_plus: complex = 0.0
    omega0: float = 0.0
    omega0_diag: dict = field(default_factory=dict)
    _abel_cache: dict = field(default_factory=dict)

    @property
    def xs(self):
        return (self.x3, self.x2, self.x1, self.x0)

    @property
    def span(self) -> float:
        return self.x0 - self.x3

    @property
    def theta_zero(self) -> complex:
        """First zero of the theta function: (1 + tau) / 2."""
        return 0.5 * (1.0 + self.tau)

    def theta(self, u):
        return theta(u, self.tau)

    def abel(self, z, sheet: int = 1, side: str | None = None, *,
             rel_tol: float = 5e-14) -> complex:
        return abel_map(self, z, sheet, side, rel_tol=rel_tol)


def _reduce_rectangle(u: complex, tau: complex, *, tol: float = 1e-9) -> complex:
    """Lattice-reduce into the centered fundamental rectangle.

    Values within ``tol`` of the boundary are left in place so that limit
    values on the ovals keep their conventional representatives.
    """
    it = tau.imag
    re, im = u.real, u.imag
    while re > 0.5 + tol:
        re -= 1.0
    while re < -0.5 - tol:
        re += 1.0
    while im > 0.5 * it + tol * it:
        im -= it
    while im < -0.5 * it - tol * it:
        im += it
    return complex(re, im)


def _path_halfplane(data: EllipticCurveData, z: complex, sgn: float,
                    rel_tol: float) -> complex:
    """Integral of dz / sqrt from the base point to z through one half plane."""
    xs = data.xs
    x0 = data.x0
    h = max(0.6 * data.span, 1.6 * abs(z.imag))
    top0 = complex(x0, sgn * h)
    topz = complex(z.real, sgn * h)

    def seg1(t):
        zeta = x0 + 1j * sgn * h * t * t
        return 2j * sgn * h * t / sqrt_branch(xs, zeta)

    total = _gl_segment(seg1, rel_tol=rel_tol)
    if abs(topz - top0) > 1e-15 * (1.0 + data.span):
        dz = topz - top0

        def seg2(t):
            return dz / sqrt_branch(xs, top0 + dz * t)

        total += _gl_segment(seg2, rel_tol=rel_tol)
    if abs(z - topz) > 1e-15 * (1.0 + data.span):

        def seg3(t):
            zeta = z + (topz - z) * (1.0 - t) ** 2
            return -2.0 * (topz - z) * (1.0 - t) / sqrt_branch(xs, zeta)

        total += _gl_segment(seg3, rel_tol=rel_tol)
    return total


def _path_real_right(data: EllipticCurveData, x: float, rel_tol: float) -> complex:
    """Real-axis integral from the base point to x > x0."""
    xs = data.xs
    x0 = data.x0

    def seg(t):
        zeta = x0 + (x - x0) * t * t
        return 2.0 * (x - x0) * t / sqrt_branch(xs, zeta + 0j)

    return _gl_segment(seg, rel_tol=rel_tol)


def _abel_infinity_raw(data: EllipticCurveData, rel_tol: float) -> float:
    """Integral of dz / sqrt from the base point to +infinity along the axis."""
    xs = data.xs
    x0 = data.x0
    # the inversion u = 1/x in the tail needs a positive split point
    cut = max(x0 + 2.0 * data.span, 1.0, -2.0 * data.x3)
    head = _path_real_right(data, cut, rel_tol)

    def tail(t):
        u = t / cut
        prod = np.ones_like(np.asarray(t, dtype=complex))
        for xj in xs:
            prod = prod * np.sqrt(1.0 - xj * u)
        return (1.0 / cut) / prod

    return float(np.real(head + _gl_segment(tail, rel_tol=rel_tol))) / data.c_norm


def abel_map(data: EllipticCurveData, z, sheet: int = 1, side: str | None = None,
             *, rel_tol: float = 5e-14) -> complex:
    """Abel map of the point over z on the requested sheet.

    For z on the closed segment between the outer branch points a ``side``
    flag ('+' or '-') selects the boundary value from the upper or lower half
    plane; elsewhere the flag is ignored.  Results are lattice-reduced to the
    fundamental rectangle.  Raises PathCrossesCut when a side flag would be
    required but is missing.
    """
    if sheet not in (1, 2):
        raise ValueError("sheet must be 1 or 2")
    z = complex(z)
    key = (sheet, z, side)
    if key in data._abel_cache:
        return data._abel_cache[key]

    eps = _AXIS_EPS * (1.0 + data.span)
    if abs(z.imag) <= eps:
        x = z.real
        if abs(x - data.x0) <= eps:
            raw = 0.0 + 0.0j
        elif x > data.x0:
            raw = _path_real_right(data, x, rel_tol)
        elif x < data.x3 - eps:
            raw = _path_halfplane(data, complex(x, 0.0), +1.0, rel_tol)
        else:
            if side not in ("+", "-"):
                raise PathCrossesCut(
                    f"z = {z} lies on [{data.x3:.6g}, {data.x0:.6g}]; a side "
                    "flag is required",
                    where="elliptic.abel_map",
                )
            raw = _path_halfplane(data, complex(x, 0.0),
                                  +1.0 if side == "+" else -1.0, rel_tol)
    else:
        raw = _path_halfplane(data, z, np.sign(z.imag), rel_tol)

    u = raw / data.c_norm
    if sheet == 2:
        u = -u
    u = _reduce_rectangle(u, data.tau)
    data._abel_cache[key] = u
    return u


# ---------------------------------------------------------------------------
# theta function


def theta(u, tau: complex):
    """Jacobi theta series sum_n exp(pi i n^2 tau + 2 pi i n u).

    The argument is first shifted by a lattice multiple of tau toward the
    central strip (with the exact quasi-periodicity factor), then the series
    is truncated once |q|^(n^2) drops below 1e-17.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise DomainError("theta requires Im tau > 0", where="elliptic.theta")
    u = np.asarray(u, dtype=complex)
    n_shift = np.round(u.imag / tau.imag)
    v = u - n_shift * tau
    pref = np.exp(-1j * np.pi * n_shift ** 2 * tau - 2j * np.pi * n_shift * v)
    n_terms = int(math.ceil(math.sqrt(17.0 * math.log(10.0) / (np.pi * tau.imag)))) + 2
    n = np.arange(1, n_terms + 1)
    qn = np.exp(1j * np.pi * n ** 2 * tau)
    phases = 2j * np.pi * np.multiply.outer(v, n)
    series = 1.0 + np.sum(qn * (np.exp(phases) + np.exp(-phases)), axis=-1)
    out = pref * series
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# special points and the rotation number


def special_point_values(curve: SpectralCurve):
    """Closed-form abscissas where the off-diagonal transfer entries vanish.

    The first value is the unique root of the degree-one upper-right entry of
    the cleared transfer matrix; the second is the nonzero root of the
    degree-two lower-left entry.
    """
    a, b, g = curve.alpha, curve.beta, curve.gamma
    num1 = (a[0, 1] * a[1, 0] * b[1, 1]
            + a[0, 1] * b[1, 0] * b[1, 1] * g[0, 0]
            + a[1, 0] * a[1, 1] * b[0, 0]
            + a[1, 0] * b[0, 0] * b[1, 1] * g[0, 1])
    den1 = (a[1, 0] * g[1, 1] + a[1, 1] * g[0, 0]
            + b[1, 0] * g[0, 0] * g[1, 1] + b[1, 1] * g[0, 0] * g[0, 1])
    num2 = (a[0, 0] * a[0, 1] * b[1, 0]
            + a[0, 0] * a[1, 1] * b[0, 1]
            + a[0, 0] * b[0, 1] * b[1, 0] * g[1, 1]
            + a[1, 1] * b[0, 0] * b[0, 1] * g[1, 0])
    den2 = (a[0, 0] * g[0, 1] + a[0, 1] * g[1, 0]
            + b[0, 0] * g[0, 1] * g[1, 0] + b[0, 1] * g[1, 0] * g[1, 1])
    return -num1 / den1, -num2 / den2


def special_points(curve: SpectralCurve, data: EllipticCurveData, *,
                   sep_tol: float = 1e-8):
    """Locate the two marked oval points, identify their sheets, and take
    upper boundary Abel values; strict-position failures raise."""
    x_star, x_star2 = special_point_values(curve)
    gap = data.x1 - data.x2
    for name, val in (("first", x_star), ("second", x_star2)):
        if not (data.x2 + 1e-12 * gap < val < data.x1 - 1e-12 * gap):
            raise DegeneratePosition(
                f"{name} special point {val:.8g} is not interior to the "
                f"bounded oval ({data.x2:.8g}, {data.x1:.8g})",
                where="elliptic.special_points",
                hypothesis="special points strictly inside the bounded oval",
            )
    if abs(x_star - x_star2) < sep_tol * gap:
        raise DegeneratePosition(
            f"special points coincide to {abs(x_star - x_star2):.3e}",
            where="elliptic.special_points",
            hypothesis="the two special points are distinct",
        )

    def sheet_of(xval: float, diag_entry: complex) -> int:
        lam1, lam2 = eigen_branches(curve, np.asarray(xval, dtype=complex))
        return 1 if abs(diag_entry - lam1) <= abs(diag_entry - lam2) else 2

    phi_s = curve.phi_at(np.asarray(x_star, dtype=complex))
    phi_s2 = curve.phi_at(np.asarray(x_star2, dtype=complex))
    s1 = sheet_of(x_star, phi_s[1, 1])
    s2 = sheet_of(x_star2, phi_s2[0, 0])
    a1 = abel_map(data, x_star, sheet=s1, side="+")
    a2 = abel_map(data, x_star2, sheet=s2, side="+")
    return float(x_star), float(x_star2), s1, s2, a1, a2


def omega_zero(data: EllipticCurveData, *, agree_tol: float = 1e-8):
    """Rotation number: sum of the Abel values of the eigenvalue poles.

    Also evaluates the four-term variant that subtracts the Abel values of
    the two infinities and checks agreement mod one.
    """
    a1, a2 = data.abel_pole
    val = float(np.real(a1 + a2))
    four = float(np.real(a1 + a2 - data.abel_inf[0] - data.abel_inf[1]))
    diff = abs(val - four)
    diff = min(diff % 1.0, 1.0 - diff % 1.0)
    if diff > agree_tol:
        raise PeriodNormalizationFailure(
            f"rotation-number variants disagree by {diff:.3e} mod 1",
            where="elliptic.omega_zero",
        )
    if not 0.0 < val < 1.0:
        raise DomainError(
            f"rotation number {val} outside (0, 1)",
            where="elliptic.omega_zero",
        )
    return val, {"four_term_diff_mod1": diff}


def torsion_distance(data: EllipticCurveData, n: int) -> float:
    """Distance of n * omega0 from the nearest integer."""
    t = (n * data.omega0) % 1.0
    return min(t, 1.0 - t)


def build_curve_data(curve: SpectralCurve, *, rel_tol: float = 1e-12) -> EllipticCurveData:
    """Two-phase construction: curve -> periods -> marked points."""
    xs = branch_points(curve)
    c_norm, tau, diag = periods(xs, rel_tol=rel_tol)
    data = EllipticCurveData(curve, *xs, c_norm, tau, diag)

    b1, b2 = curve.beta_v
    data.abel_pole = (abel_map(data, b1, sheet=1), abel_map(data, b2, sheet=1))
    a_inf = _abel_infinity_raw(data, rel_tol)
    g11g21, g12g22 = curve.phi_inf[0, 0], curve.phi_inf[1, 1]
    first_sheet_at_inf = 1 if g11g21.real > g12g22.real else 2
    a_first = _reduce_rectangle(complex(a_inf), tau)
    if first_sheet_at_inf == 1:
        data.abel_inf = (a_first, -a_first)
    else:
        data.abel_inf = (-a_first, a_first)

    (data.x_star, data.x_star2, data.sheet_star, data.sheet_star2,
     data.abel_star_plus, data.abel_star2_plus) = special_points(curve, data)
    data.omega0, data.omega0_diag = omega_zero(data)
    return data
