"""Monic matrix orthogonal polynomials from block moment systems.

The left polynomial P of degree N kills the first N positive moments of the
weight from the left, the right polynomial Phat from the right, and the
auxiliary Q of degree <= N-1 satisfies the same conditions with -I at the top
moment.  All three reduce to one dense block-Hankel solve.

The solve works in the Chebyshev basis of the contour-centered scaled
variable zeta = (z - c)/r: both the unknown polynomial and the test
polynomials are expanded in T_m(zeta), which spans exactly the same spaces
as the monomial conditions but keeps the dense block system well conditioned
even though the weight's poles are clustered real points.  Coefficients are
converted back to the monomial basis at the end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contour import CircleContour, cauchy_transform, integrate
from .errors import DomainError, RouteDisagreement, SingularMomentSystem
from .matpoly import MatrixPolynomial
from .weights import as_weight_fn

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class MomentTable:
    """Chebyshev moment blocks C_t = (1/2pi i) oint W(z) T_t((z-c)/r) dz.

    C_0 is the plain zeroth moment of the weight; higher blocks are the
    moments against the Chebyshev polynomials of the centered scaled
    variable, from which moments against any polynomial of degree <= upto
    follow by linearity.
    """

    moments: np.ndarray  # (upto+1, k, k)
    contour: CircleContour
    nodes_used: int
    last_delta: float

    @property
    def upto(self) -> int:
        return self.moments.shape[0] - 1

    @property
    def k(self) -> int:
        return self.moments.shape[1]

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.moments[0])))

    def product_block(self, j: int, m: int) -> np.ndarray:
        """Moment against T_j T_m = (T_{j+m} + T_{|j-m|}) / 2."""
        return 0.5 * (self.moments[j + m] + self.moments[abs(j - m)])


@dataclass(frozen=True, eq=False)
class MVOPSolution:
    """Left/right monic polynomials, the auxiliary polynomial, and diagnostics."""

    n: int
    p: MatrixPolynomial
    phat: MatrixPolynomial
    q: MatrixPolynomial | None
    moments: MomentTable
    cond: float
    residuals: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.p.k


def compute_moments(weight, contour: CircleContour, upto: int, *,
                    rel_tol: float = 1e-12, max_nodes: int = 16384) -> MomentTable:
    """Centered moment table via one shared adaptive sampling of the weight.

    The convergence test is per-moment, relative to that moment's integrand
    magnitude, with a floor for rounding noise in large cancellations.
    """
    wf = as_weight_fn(weight)
    c0, r0 = contour.center, contour.radius

    def table(c: CircleContour):
        vals = np.asarray(wf(c.nodes))
        zeta = (c.nodes - c0) / r0
        cheb = np.empty((c.m, upto + 1), dtype=complex)
        cheb[:, 0] = 1.0
        if upto >= 1:
            cheb[:, 1] = zeta
        for t in range(2, upto + 1):
            cheb[:, t] = 2.0 * zeta * cheb[:, t - 1] - cheb[:, t - 2]
        mom = np.einsum("m,mj,mkl->jkl", c.quad_factors, cheb, vals)
        mags = np.einsum("m,mj,m->j", np.abs(c.quad_factors), np.abs(cheb),
                         np.max(np.abs(vals), axis=(1, 2)))
        return mom, mags

    c = contour
    prev, _ = table(c)
    prev_worst = np.inf
    while True:
        c = c.refined()
        cur, mags = table(c)
        delta = np.max(np.abs(cur - prev), axis=(1, 2))
        floor = max(rel_tol, 3e-14 * np.sqrt(c.m))
        ok = delta <= np.maximum(rel_tol * np.max(np.abs(cur), axis=(1, 2)),
                                 floor * mags)
        worst = float(np.max(delta / np.maximum(mags, 1e-300)))
        stalled = worst > 0.25 * prev_worst and worst <= 1e-9
        if np.all(ok) or stalled:
            return MomentTable(cur, contour, c.m, float(np.max(delta)))
        if c.m >= max_nodes:
            from .errors import NonConvergence
            raise NonConvergence(
                f"moments did not stabilize with {max_nodes} nodes",
                where="mvop.compute_moments",
            )
        prev, prev_worst = cur, worst


def _block_solve(table: MomentTable, n: int, rhs_blocks: np.ndarray,
                 transpose: bool, where: str):
    """Solve sum_m X_m G_{jm} = rhs_j (transpose) or sum_m G_{jm} X_m = rhs_j
    for blocks X_0..X_{n-1}, with G_{jm} the moment against T_j T_m."""
    k = table.k
    big = np.zeros((n * k, n * k), dtype=complex)
    rhs = np.zeros((n * k, k), dtype=complex)
    for j in range(n):
        for m in range(n):
            block = table.product_block(j, m)
            if transpose:
                block = block.T
            big[j * k : (j + 1) * k, m * k : (m + 1) * k] = block
        r = rhs_blocks[j]
        rhs[j * k : (j + 1) * k] = r.T if transpose else r
    cond = float(np.linalg.cond(big))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMomentSystem(
            f"moment system has condition {cond:.3e}",
            cond=cond,
            where=where,
            hypothesis="unique existence of the monic orthogonal polynomial",
        )
    sol = np.linalg.solve(big, rhs)
    blocks = sol.reshape(n, k, k)
    if transpose:
        blocks = np.transpose(blocks, (0, 2, 1))
    return blocks, cond


def _centered_to_monomial(blocks: np.ndarray, center: complex, radius: float) -> np.ndarray:
    """Convert sum_m B_m ((z-c)/r)^m to monomial coefficients by Horner."""
    shift = np.array([-center / radius, 1.0 / radius], dtype=complex)
    out = blocks[-1][None, :, :]
    for b in blocks[-2::-1]:
        grown = np.zeros((out.shape[0] + 1,) + out.shape[1:], dtype=complex)
        for i, s in enumerate(shift):
            grown[i : i + out.shape[0]] += s * out
        grown[0] += b
        out = grown
    return out


def _cheb_blocks_to_poly(blocks: np.ndarray, contour: CircleContour) -> MatrixPolynomial:
    """Matrix Chebyshev coefficients in the centered variable -> MatrixPolynomial."""
    from numpy.polynomial import chebyshev as ncheb

    t, k, _ = blocks.shape
    zeta = np.zeros_like(blocks)
    for i in range(k):
        for j in range(k):
            conv = ncheb.cheb2poly(blocks[:, i, j])
            zeta[: conv.size, i, j] = conv
    return MatrixPolynomial(_centered_to_monomial(zeta, contour.center, contour.radius))


def _monic_top_block(table: MomentTable, n: int) -> float:
    """Chebyshev coefficient making the degree-n term monic in z."""
    r = table.contour.radius
    return r ** n * (1.0 if n <= 1 else 2.0 ** (1 - n))


def solve_left(table: MomentTable, n: int):
    """Monic degree-n polynomial orthogonal to lower powers from the left."""
    k = table.k
    if n == 0:
        return MatrixPolynomial.identity(k), 1.0
    if table.upto < 2 * n:
        raise DomainError(f"need moments up to {2 * n}", where="mvop.solve_left")
    top = _monic_top_block(table, n)
    rhs = np.array([-top * table.product_block(n, j) for j in range(n)])
    blocks, cond = _block_solve(table, n, rhs, transpose=True, where="mvop.solve_left")
    full = np.concatenate([blocks, top * np.eye(k)[None, :, :]])
    return _cheb_blocks_to_poly(full, table.contour), cond


def solve_right(table: MomentTable, n: int):
    """Monic degree-n polynomial orthogonal to lower powers from the right."""
    k = table.k
    if n == 0:
        return MatrixPolynomial.identity(k), 1.0
    if table.upto < 2 * n:
        raise DomainError(f"need moments up to {2 * n}", where="mvop.solve_right")
    top = _monic_top_block(table, n)
    rhs = np.array([-top * table.product_block(n, j) for j in range(n)])
    blocks, cond = _block_solve(table, n, rhs, transpose=False, where="mvop.solve_right")
    full = np.concatenate([blocks, top * np.eye(k)[None, :, :]])
    return _cheb_blocks_to_poly(full, table.contour), cond


def solve_q(table: MomentTable, n: int):
    """Degree <= n-1 polynomial whose weighted moments are 0, .., 0, -I."""
    k = table.k
    if n == 0:
        return MatrixPolynomial(np.zeros((1, k, k), dtype=complex)), 1.0
    if table.upto < 2 * n - 2:
        raise DomainError(f"need moments up to {2 * n - 2}", where="mvop.solve_q")
    rhs = np.zeros((n, k, k), dtype=complex)
    # only the top test polynomial reaches degree n-1; its leading monomial
    # coefficient rescales the -I condition
    rhs[n - 1] = -np.eye(k) / _monic_top_block(table, n - 1)
    blocks, cond = _block_solve(table, n, rhs, transpose=True, where="mvop.solve_q")
    return _cheb_blocks_to_poly(blocks, table.contour), cond


def solve_all(weight, contour: CircleContour, n: int, *,
              rel_tol: float = 1e-12, with_q: bool = True) -> MVOPSolution:
    """Moments plus the three polynomial solves, with fresh-quadrature residuals."""
    table = compute_moments(weight, contour, 2 * n, rel_tol=rel_tol)
    p, cond_l = solve_left(table, n)
    phat, cond_r = solve_right(table, n)
    q = None
    cond_q = 1.0
    if with_q:
        q, cond_q = solve_q(table, n)

    m0 = max(table.scale, 1e-300)
    res = {}
    if n > 0:
        res["left"] = float(np.max(orthogonality_residuals(
            weight, contour, p, range(n), side="left"))) / m0
        res["right"] = float(np.max(orthogonality_residuals(
            weight, contour, phat, range(n), side="right"))) / m0
        if q is not None:
            res["q"] = q_residual(weight, contour, q, n) / m0
    res["det_consistency"] = _det_consistency(p, phat)
    return MVOPSolution(n, p, phat, q, table, max(cond_l, cond_r, cond_q), res)


def q_residual(weight, contour: CircleContour, q: MatrixPolynomial, n: int,
               *, rel_tol: float = 1e-12) -> float:
    """Worst defect of the auxiliary conditions, by fresh quadrature."""
    wf = as_weight_fn(weight)
    worst = 0.0
    for j in range(n):
        f = lambda z: q(z) @ wf(z) * (z ** j)[..., None, None]
        val = integrate(contour, f, rel_tol=rel_tol, on_cap="return")
        target = -np.eye(q.k) if j == n - 1 else np.zeros((q.k, q.k))
        worst = max(worst, float(np.max(np.abs(val - target))))
    return worst


def _det_consistency(p: MatrixPolynomial, phat: MatrixPolynomial) -> float:
    dp, dh = p.det_poly(), phat.det_poly()
    m = max(dp.size, dh.size)
    a = np.zeros(m, dtype=complex)
    b = np.zeros(m, dtype=complex)
    a[: dp.size] = dp
    b[: dh.size] = dh
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))


def orthogonality_residuals(weight, contour: CircleContour, poly: MatrixPolynomial,
                            js, *, side: str = "left",
                            rel_tol: float = 1e-12) -> np.ndarray:
    """Fresh-quadrature norms of the orthogonality integrals for each j.

    Independent of the moment table used by the solvers: the integrand is
    resampled and integrated adaptively.
    """
    wf = as_weight_fn(weight)
    out = []
    for j in js:
        if side == "left":
            f = lambda z: poly(z) @ wf(z) * (z ** j)[..., None, None]
        else:
            f = lambda z: wf(z) @ poly(z) * (z ** j)[..., None, None]
        out.append(float(np.max(np.abs(integrate(contour, f, rel_tol=rel_tol,
                                                 on_cap="return")))))
    return np.asarray(out)


def assemble_y(sol: MVOPSolution, weight, contour: CircleContour, z, *,
               rel_tol: float = 1e-12) -> np.ndarray:
    """2k x 2k solution of the jump problem: polynomial blocks on the left,
    their weighted Cauchy transforms on the right."""
    if sol.q is None:
        raise DomainError("solution lacks the auxiliary polynomial",
                          where="mvop.assemble_y")
    wf = as_weight_fn(weight)
    z = complex(z)
    k = sol.k
    pw = lambda s: sol.p(s) @ wf(s)
    qw = lambda s: sol.q(s) @ wf(s)
    out = np.zeros((2 * k, 2 * k), dtype=complex)
    out[:k, :k] = sol.p(z)
    out[:k, k:] = cauchy_transform(contour, pw, z, rel_tol=rel_tol)
    out[k:, :k] = sol.q(z)
    out[k:, k:] = cauchy_transform(contour, qw, z, rel_tol=rel_tol)
    return out


def reproducing_kernel(sol: MVOPSolution, weight, contour: CircleContour,
                       wpt, zpt, *, route: str = "integral",
                       check_tol: float = 1e-8, rel_tol: float = 1e-12):
    """Reproducing kernel R_N(w, z) for points in the exterior domain.

    ``route`` selects the contour-integral formula ("integral"), the
    Christoffel-Darboux form built from the jump-problem solution ("rh"), or
    both with a cross-check ("both", raising RouteDisagreement on mismatch).
    For n == 0 the polynomial space is empty and the kernel is zero.
    """
    k = sol.k
    if sol.n == 0:
        return np.zeros((k, k), dtype=complex)
    wpt, zpt = complex(wpt), complex(zpt)
    wf = as_weight_fn(weight)

    def integral_route():
        def f(s):
            vals = np.linalg.inv(sol.phat(s)) @ np.linalg.inv(wf(s)) @ np.linalg.inv(sol.p(s))
            return vals / ((s - zpt) * (s - wpt))[..., None, None]
        t = integrate(contour, f, rel_tol=rel_tol)
        return sol.phat(wpt) @ t @ sol.p(zpt)

    def rh_route():
        if abs(zpt - wpt) < 1e-12 * (1.0 + abs(zpt)):
            raise DomainError("confluent points not supported by the rh route",
                              where="mvop.reproducing_kernel")
        yw = assemble_y(sol, weight, contour, wpt, rel_tol=rel_tol)
        yz = assemble_y(sol, weight, contour, zpt, rel_tol=rel_tol)
        block = np.linalg.inv(yw)[k:, :] @ yz[:, :k]
        return block / (zpt - wpt)

    def cd_route():
        # exterior closed form of the rh route: the jump-problem solution is
        # block triangular outside the contour, so the kernel reduces to
        # polynomial evaluations (no quadrature, no large cancellations)
        if sol.q is None:
            raise DomainError("closed-form route needs the auxiliary polynomial",
                              where="mvop.reproducing_kernel")
        return reproducing_kernel_cd(sol, np.asarray(wpt), np.asarray(zpt))

    if route == "integral":
        return integral_route()
    if route == "rh":
        return rh_route()
    if route == "cd":
        return cd_route()
    if route == "both":
        a = cd_route()
        b = rh_route()
        scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
        diff = float(np.max(np.abs(a - b))) / scale
        if diff > check_tol:
            raise RouteDisagreement(
                f"kernel routes differ by {diff:.3e} (tol {check_tol:g})",
                where="mvop.reproducing_kernel",
            )
        return a
    raise ValueError(f"unknown route {route!r}")


def cd_companion(sol: MVOPSolution) -> MatrixPolynomial:
    """The polynomial Phat Q P^{-1} of degree <= n-1.

    Although written with an inverse, this combination is an adjugate block
    of the jump-problem solution and extends to a matrix polynomial.  Its
    coefficients come from dividing Phat * Q by the monic P on the right,
    which avoids the massive cancellation a pointwise product would suffer
    near the zeros of det P.
    """
    if sol.q is None:
        raise DomainError("companion polynomial needs the auxiliary polynomial",
                          where="mvop.cd_companion")
    k = sol.k
    n = sol.n
    if n == 0:
        return MatrixPolynomial(np.zeros((1, k, k), dtype=complex))
    # numerator Phat * Q, degree <= 2n - 1
    num = np.zeros((2 * n, k, k), dtype=complex)
    for i, a in enumerate(sol.phat.coeffs):
        for j, b in enumerate(sol.q.coeffs):
            num[i + j] += a @ b
    # right division by the monic P: num = G * P with deg G <= n - 1
    rem = num.copy()
    g = np.zeros((n, k, k), dtype=complex)
    for j in range(n - 1, -1, -1):
        g[j] = rem[j + n]
        for m in range(n + 1):
            rem[j + m] -= g[j] @ sol.p.coeffs[m]
    defect = float(np.max(np.abs(rem))) / max(float(np.max(np.abs(num))), 1e-300)
    if defect > 1e-8:
        raise DomainError(
            f"companion division leaves residual {defect:.2e}",
            where="mvop.cd_companion",
            hypothesis="Phat Q P^{-1} extends to a matrix polynomial",
        )
    return MatrixPolynomial(g)


def reproducing_kernel_cd(sol: MVOPSolution, wpt, zpt, companion=None):
    """Christoffel-Darboux kernel for exterior points, vectorized.

    R(w, z) = [Phat(w) Q(z) - (Phat Q P^{-1})(w) P(z)] / (z - w); valid when
    both points lie outside the moment contour, where the jump-problem
    solution is block triangular.
    """
    g = companion if companion is not None else cd_companion(sol)
    w = np.asarray(wpt, dtype=complex)
    z = np.asarray(zpt, dtype=complex)
    num = sol.phat(w) @ sol.q(z) - g(w) @ sol.p(z)
    return num / (z - w)[..., None, None]


def high_precision_polys(weight_data, contour: CircleContour, n: int, *,
                         dps: int = 40, m_start: int = 512, m_max: int = 4096,
                         with_q: bool = False):
    """Left and right monic polynomials via extended-precision moments.

    The float64 moment route is limited by the conditioning of the block
    moment system, which grows geometrically with n (the weight's poles are
    confluent for periodic columns).  Since the polynomial coefficients are
    themselves well conditioned in the weight data, recomputing the moments
    and the dense solve at ``dps`` digits recovers them to full double
    precision; the result is converted back to float64 coefficients.
    """
    import mpmath as mp

    from .weights import WeightData, eval_W_mp

    if not isinstance(weight_data, WeightData):
        raise DomainError("high-precision route requires explicit weight data",
                          where="mvop.high_precision_polys")
    k = weight_data.k
    if n == 0:
        eye = MatrixPolynomial.identity(k)
        if with_q:
            return eye, eye, MatrixPolynomial(np.zeros((1, k, k), dtype=complex))
        return eye, eye

    upto = 2 * n
    with mp.workdps(dps):
        c0 = mp.mpc(contour.center)
        r0 = mp.mpf(contour.radius)

        def moments(m_nodes: int):
            mom = [mp.zeros(k, k) for _ in range(upto + 1)]
            for idx in range(m_nodes):
                ang = 2 * mp.pi * (idx + mp.mpf(1) / 2) / m_nodes
                z = c0 + r0 * mp.expjpi(2 * (idx + mp.mpf(1) / 2) / m_nodes)
                qf = (z - c0) / m_nodes
                wv = eval_W_mp(weight_data, z) * qf
                zeta = (z - c0) / r0
                t_prev, t_cur = mp.mpf(1), zeta
                for t in range(upto + 1):
                    if t == 0:
                        coef = mp.mpf(1)
                    elif t == 1:
                        coef = zeta
                    else:
                        t_prev, t_cur = t_cur, 2 * zeta * t_cur - t_prev
                        coef = t_cur
                    mom[t] += wv * coef
            return mom

        m_nodes = m_start
        mom = moments(m_nodes)
        while True:
            m_nodes *= 2
            nxt = moments(m_nodes)
            scale = max(max(abs(x) for x in block) for block in nxt)
            diff = max(max(abs(a - b) for a, b in zip(x, y))
                       for x, y in zip(mom, nxt))
            mom = nxt
            if diff <= mp.mpf(10) ** (-(dps - 8)) * scale or m_nodes >= m_max:
                break

        def product_block(j, mm):
            return (mom[j + mm] + mom[abs(j - mm)]) * mp.mpf(0.5)

        top = r0 ** n * (mp.mpf(1) if n <= 1 else mp.mpf(2) ** (1 - n))
        top_q = r0 ** (n - 1) * (mp.mpf(1) if n - 1 <= 1 else mp.mpf(2) ** (2 - n))

        def solve(transpose: bool, q_rhs: bool = False):
            big = mp.zeros(n * k, n * k)
            rhs = mp.zeros(n * k, k)
            for j in range(n):
                if q_rhs:
                    blk_r = (mp.eye(k) * (-1 / top_q)) if j == n - 1 else mp.zeros(k, k)
                else:
                    blk_r = product_block(n, j) * (-top)
                for mm in range(n):
                    blk = product_block(j, mm)
                    for a in range(k):
                        for b in range(k):
                            if transpose:
                                big[j * k + a, mm * k + b] = blk[b, a]
                            else:
                                big[j * k + a, mm * k + b] = blk[a, b]
                for a in range(k):
                    for b in range(k):
                        rhs[j * k + a, b] = blk_r[b, a] if transpose else blk_r[a, b]
            sol = mp.zeros(n * k, k)
            for col in range(k):
                x = mp.lu_solve(big, rhs[:, col])
                for row in range(n * k):
                    sol[row, col] = x[row]
            blocks = []
            for mm in range(n):
                blk = mp.zeros(k, k)
                for a in range(k):
                    for b in range(k):
                        blk[a, b] = sol[mm * k + b, a] if transpose else sol[mm * k + a, b]
                blocks.append(blk)
            if not q_rhs:
                blocks.append(mp.eye(k) * top)
            return blocks

        def to_monomial(blocks):
            # chebyshev (in zeta) -> zeta powers -> z powers, all in mp
            t_polys = [[mp.mpf(1)], [mp.mpf(0), mp.mpf(1)]]
            while len(t_polys) < len(blocks):
                prev2, prev1 = t_polys[-2], t_polys[-1]
                nxt = [mp.mpf(0)] * (len(prev1) + 1)
                for i, cc in enumerate(prev1):
                    nxt[i + 1] += 2 * cc
                for i, cc in enumerate(prev2):
                    nxt[i] -= cc
                t_polys.append(nxt)
            deg = len(blocks) - 1
            zeta_coeffs = [mp.zeros(k, k) for _ in range(deg + 1)]
            for t, blk in enumerate(blocks):
                for s, cc in enumerate(t_polys[t]):
                    if cc != 0:
                        zeta_coeffs[s] += blk * cc
            out = [zeta_coeffs[deg]]
            for blk in reversed(zeta_coeffs[:deg]):
                grown = [mp.zeros(k, k) for _ in range(len(out) + 1)]
                for i, ob in enumerate(out):
                    grown[i] += ob * (-c0 / r0)
                    grown[i + 1] += ob / r0
                grown[0] += blk
                out = grown
            arr = np.empty((deg + 1, k, k), dtype=complex)
            for t, blk in enumerate(out):
                for a in range(k):
                    for b in range(k):
                        arr[t, a, b] = complex(blk[a, b])
            return MatrixPolynomial(arr)

        p = to_monomial(solve(transpose=True))
        phat = to_monomial(solve(transpose=False))
        if with_q:
            q = to_monomial(solve(transpose=True, q_rhs=True))
    if with_q:
        return p, phat, q
    return p, phat
