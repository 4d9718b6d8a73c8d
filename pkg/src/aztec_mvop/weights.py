"""Periodic edge-weight data and the elementary transfer-matrix factors.

A weight configuration is three positive k x kN arrays (alpha, beta, gamma).
Column i defines two k x k factors: a "b" factor carrying gamma on the
diagonal, alpha on the subdiagonal and an alpha/z corner entry, and a "g"
factor of partial beta products with a (1 - beta_i^v/z)^{-1} prefactor.  The
full weight matrix is the alternating product of all 2kN factors, evaluated
pointwise; it is never expanded into a symbolic rational matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError

_POLE_GUARD = 1e-13


@dataclass(frozen=True, eq=False)
class WeightData:
    """Positive weights for the k-periodic model of size parameter n (kN columns)."""

    k: int
    n: int
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise ConfigError("k and n must be positive integers", where="weights.WeightData")
        shape = (self.k, self.k * self.n)
        for name in ("alpha", "beta", "gamma"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ConfigError(
                    f"{name} must have shape {shape}, got {arr.shape}",
                    where="weights.WeightData",
                )
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ConfigError(
                    f"{name} entries must be finite and strictly positive",
                    where="weights.WeightData",
                )
            object.__setattr__(self, name, arr)

    @property
    def num_columns(self) -> int:
        return self.k * self.n

    @property
    def num_factors(self) -> int:
        return 2 * self.k * self.n

    @property
    def alpha_v(self) -> np.ndarray:
        """Column products of alpha."""
        return np.prod(self.alpha, axis=0)

    @property
    def beta_v(self) -> np.ndarray:
        return np.prod(self.beta, axis=0)

    @property
    def gamma_v(self) -> np.ndarray:
        return np.prod(self.gamma, axis=0)

    def pole_points(self) -> np.ndarray:
        """Real points every moment/kernel contour must enclose: 0 and the beta products."""
        return np.concatenate(([0.0], self.beta_v))

    def det_zero_points(self) -> np.ndarray:
        """Zeros (-1)^k alpha_i^v / gamma_i^v of the closed-form determinant."""
        return (-1.0) ** self.k * self.alpha_v / self.gamma_v

    def column_vectors(self, i: int):
        """(alpha_i, beta_i, gamma_i) for 1-based column i."""
        return self.alpha[:, i - 1], self.beta[:, i - 1], self.gamma[:, i - 1]


def _check_poles(z: np.ndarray, poles, where: str):
    for p in poles:
        if np.any(np.abs(z - p) < _POLE_GUARD * (1.0 + abs(p))):
            raise DomainError(
                f"evaluation too close to the pole at z = {p}",
                where=where,
                hypothesis="z bounded away from factor poles",
            )


def eval_phi_b(w: WeightData, i: int, z):
    """k x k "b" factor of column i: gamma diagonal, alpha subdiagonal, alpha_k/z corner."""
    z = np.asarray(z, dtype=complex)
    _check_poles(z, [0.0], "weights.eval_phi_b")
    a, _, g = w.column_vectors(i)
    k = w.k
    out = np.zeros(z.shape + (k, k), dtype=complex)
    if k == 1:
        out[..., 0, 0] = g[0] + a[0] / z
        return out
    for j in range(k):
        out[..., j, j] = g[j]
    for j in range(k - 1):
        out[..., j + 1, j] = a[j]
    out[..., 0, k - 1] = a[k - 1] / z
    return out


def eval_phi_g(w: WeightData, i: int, z):
    """k x k "g" factor of column i: partial beta products with a (1-beta^v/z)^{-1} prefactor."""
    z = np.asarray(z, dtype=complex)
    _, b, _ = w.column_vectors(i)
    bv = float(np.prod(b))
    _check_poles(z, [0.0, bv], "weights.eval_phi_g")
    k = w.k
    pref = 1.0 / (1.0 - bv / z)
    out = np.zeros(z.shape + (k, k), dtype=complex)
    for r in range(1, k + 1):
        for c in range(1, k + 1):
            if r >= c:
                out[..., r - 1, c - 1] = np.prod(b[c - 1 : r - 1])
            else:
                out[..., r - 1, c - 1] = np.prod(b[c - 1 : k]) * np.prod(b[0 : r - 1]) / z
    return pref[..., None, None] * out


def eval_factor(w: WeightData, t: int, z):
    """Factor number t in 1..2kN; odd t is a b factor, even t a g factor."""
    if not 1 <= t <= w.num_factors:
        raise DomainError(
            f"factor index {t} outside 1..{w.num_factors}", where="weights.eval_factor"
        )
    if t % 2 == 1:
        return eval_phi_b(w, (t + 1) // 2, z)
    return eval_phi_g(w, t // 2, z)


def eval_partial_product(w: WeightData, start: int, stop: int, z):
    """Product of factors start+1 .. stop; the empty range gives the identity."""
    if not 0 <= start <= stop <= w.num_factors:
        raise DomainError(
            f"factor range ({start}, {stop}] outside 0..{w.num_factors}",
            where="weights.eval_partial_product",
        )
    z = np.asarray(z, dtype=complex)
    out = np.broadcast_to(np.eye(w.k, dtype=complex), z.shape + (w.k, w.k)).copy()
    for t in range(start + 1, stop + 1):
        out = out @ eval_factor(w, t, z)
    return out


def eval_W(w: WeightData, z):
    """Full alternating product of all 2kN factors, evaluated pointwise."""
    return eval_partial_product(w, 0, w.num_factors, z)


def det_W_closed_form(w: WeightData, z):
    """prod_i (gamma_i^v z - (-1)^k alpha_i^v) / (z - beta_i^v)."""
    z = np.asarray(z, dtype=complex)
    sign = (-1.0) ** w.k
    out = np.ones(z.shape, dtype=complex)
    for av, bv, gv in zip(w.alpha_v, w.beta_v, w.gamma_v):
        out = out * (gv * z - sign * av) / (z - bv)
    return out


def apply_switching_rule(alpha_vec, beta_vec, gamma_vec):
    """Commute a b factor past a g factor; returns the transformed (alpha', beta').

    Index arithmetic is cyclic mod k; gamma is unchanged.  For positive inputs
    the denominators are positive, so no error cases arise.
    """
    a = np.asarray(alpha_vec, dtype=float)
    b = np.asarray(beta_vec, dtype=float)
    g = np.asarray(gamma_vec, dtype=float)
    if a.shape != b.shape or a.shape != g.shape or a.ndim != 1:
        raise ConfigError("alpha, beta, gamma must be 1-d vectors of equal length",
                          where="weights.apply_switching_rule")
    num = a + np.roll(g, -1) * b
    den = np.roll(a, 1) + g * np.roll(b, 1)
    return np.roll(a, 1) * num / den, np.roll(b, 1) * num / den


def as_weight_fn(weight):
    """Normalize a WeightData or a callable z -> (.., k, k) into a callable."""
    if isinstance(weight, WeightData):
        return lambda z: eval_W(weight, z)
    if callable(weight):
        return weight
    raise ConfigError("weight must be WeightData or a callable", where="weights.as_weight_fn")


def eval_W_mp(w: WeightData, z):
    """Weight matrix at a single mpmath point, fully in working precision.

    Used by the high-precision moment path; mirrors eval_W exactly.
    """
    import mpmath as mp

    k = w.k
    out = mp.eye(k)
    for i in range(1, w.num_columns + 1):
        a, b, g = w.column_vectors(i)
        fb = mp.zeros(k, k)
        if k == 1:
            fb[0, 0] = g[0] + a[0] / z
        else:
            for j in range(k):
                fb[j, j] = g[j]
            for j in range(k - 1):
                fb[j + 1, j] = a[j]
            fb[0, k - 1] = a[k - 1] / z
        bv = float(np.prod(b))
        pref = 1 / (1 - bv / z)
        fg = mp.zeros(k, k)
        for r in range(1, k + 1):
            for c in range(1, k + 1):
                if r >= c:
                    fg[r - 1, c - 1] = pref * float(np.prod(b[c - 1 : r - 1]))
                else:
                    fg[r - 1, c - 1] = (pref / z) * float(np.prod(b[c - 1 : k])
                                                          * np.prod(b[0 : r - 1]))
        out = out * fb * fg
    return out


def load_weight_config(source) -> WeightData:
    """Build WeightData from a JSON document.

    Expected keys: k, N, alpha, beta, gamma.  The arrays are either k x kN or
    a k x ell period block with ell dividing kN, in which case the block is
    tiled to the full width.
    """
    if isinstance(source, (str, Path)):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}", where="weights.load_weight_config")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}", where="weights.load_weight_config")
    elif isinstance(source, dict):
        doc = source
    else:
        raise ConfigError("config source must be a path or a dict",
                          where="weights.load_weight_config")

    try:
        k = int(doc["k"])
        n = int(doc["N"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("config must define integer fields 'k' and 'N'",
                          where="weights.load_weight_config")
    arrays = {}
    for name in ("alpha", "beta", "gamma"):
        if name not in doc:
            raise ConfigError(f"config missing '{name}'", where="weights.load_weight_config")
        try:
            arr = np.asarray(doc[name], dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"'{name}' is not a numeric array",
                              where="weights.load_weight_config")
        if arr.ndim != 2 or arr.shape[0] != k:
            raise ConfigError(f"'{name}' must have k = {k} rows",
                              where="weights.load_weight_config")
        width = arr.shape[1]
        full = k * n
        if width != full:
            if width == 0 or full % width != 0:
                raise ConfigError(
                    f"'{name}' has width {width}, which does not tile kN = {full}",
                    where="weights.load_weight_config",
                )
            arr = np.tile(arr, (1, full // width))
        arrays[name] = arr
    return WeightData(k=k, n=n, **arrays)
