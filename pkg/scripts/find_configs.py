"""Regenerate the bundled weight configurations in configs/.

Seeded searches over positive two-by-two periodic weights:

* genus_one_2x2.json   -- generic configuration: genus one with margins,
  special points well separated inside the bounded oval, pole/zero circle
  separation, and moderate pole products (keeps the moment solves well
  conditioned up to the sizes the validation suite uses).
* genus_zero_2x2.json  -- the same base column duplicated, which collapses
  the two middle branch points.
* degenerate_xstar_2x2.json -- a bisected configuration whose two special
  points coincide to ~1e-12, violating the strict-position hypotheses.
* scalar_oracle.json   -- a k = 1 configuration with distinct poles and
  closed-form orthogonal polynomials.

Run from the repository root:  python3 scripts/find_configs.py
"""

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from aztec_mvop.elliptic import SpectralCurve, branch_points, special_point_values
from aztec_mvop.errors import AztecMvopError

OUT = Path(__file__).resolve().parent.parent / "configs"


def candidate_ok(a, b, g, *, margin=0.05):
    """Predicate for the generic configuration; returns diagnostics or None."""
    curve = SpectralCurve.from_base_columns(a, b, g)
    beta_v, alpha_v, gamma_v = curve.beta_v, curve.alpha_v, curve.gamma_v
    zeros = alpha_v / gamma_v
    if beta_v.max() > 1.4 or beta_v.min() < 0.45:
        return None
    if zeros.min() < 1.8 * beta_v.max():
        return None
    try:
        x3, x2, x1, x0 = branch_points(curve)
    except AztecMvopError:
        return None
    gap = x1 - x2
    if gap < 0.03 * max(1.0, abs(x2)) or x0 > -1e-3 or x3 < -40.0:
        return None
    xs, xss = special_point_values(curve)
    if not (x2 + margin * gap < xs < x1 - margin * gap):
        return None
    if not (x2 + margin * gap < xss < x1 - margin * gap):
        return None
    if abs(xs - xss) < margin * gap:
        return None
    return {"branch_points": [x3, x2, x1, x0], "x_star": xs, "x_star2": xss}


def draw(rng):
    return (rng.uniform(0.5, 2.0, (2, 2)), rng.uniform(0.5, 2.0, (2, 2)),
            rng.uniform(0.5, 2.0, (2, 2)))


def find_generic(rng):
    for attempt in range(1, 200_000):
        a, b, g = draw(rng)
        diag = candidate_ok(a, b, g)
        if diag is not None:
            print(f"generic config accepted after {attempt} draws: {diag}")
            return a, b, g
    raise RuntimeError("no generic configuration found")


def find_degenerate_xstar(rng):
    """Bisect x_star(t) - x_star2(t) to zero along a segment between two
    generic configurations on which it changes sign."""

    def gap(a, b, g):
        xs, xss = special_point_values(SpectralCurve.from_base_columns(a, b, g))
        return xs - xss

    while True:
        a0, b0, g0 = find_generic(rng)
        a1, b1, g1 = find_generic(rng)
        if gap(a0, b0, g0) * gap(a1, b1, g1) >= 0:
            continue

        def at(t):
            return (a0 + t * (a1 - a0), b0 + t * (b1 - b0), g0 + t * (g1 - g0))

        lo, hi = 0.0, 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if gap(*at(lo)) * gap(*at(mid)) <= 0:
                hi = mid
            else:
                lo = mid
        a, b, g = at(0.5 * (lo + hi))
        # the bisected point must still be genus one with separated contours
        try:
            curve = SpectralCurve.from_base_columns(a, b, g)
            x3, x2, x1, x0 = branch_points(curve)
        except AztecMvopError:
            continue
        if curve.alpha_v.min() / curve.gamma_v.max() <= 1.5 * curve.beta_v.max():
            continue
        xs, xss = special_point_values(curve)
        print(f"degenerate config: |x* - x**| = {abs(xs - xss):.3e}")
        return a, b, g


def write_config(path: Path, k: int, n: int, a, b, g):
    doc = {
        "k": k,
        "N": n,
        "alpha": np.asarray(a).tolist(),
        "beta": np.asarray(b).tolist(),
        "gamma": np.asarray(g).tolist(),
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(20240801)

    a, b, g = find_generic(rng)
    write_config(OUT / "genus_one_2x2.json", 2, 4, a, b, g)

    write_config(OUT / "genus_zero_2x2.json", 2, 4,
                 np.column_stack([a[:, 0], a[:, 0]]),
                 np.column_stack([b[:, 0], b[:, 0]]),
                 np.column_stack([g[:, 0], g[:, 0]]))

    ad, bd, gd = find_degenerate_xstar(rng)
    write_config(OUT / "degenerate_xstar_2x2.json", 2, 2, ad, bd, gd)

    rng1 = np.random.default_rng(11)
    write_config(OUT / "scalar_oracle.json", 1, 4,
                 rng1.uniform(0.7, 1.5, (1, 4)),
                 rng1.uniform(0.4, 0.85, (1, 4)),
                 rng1.uniform(0.8, 1.25, (1, 4)))


if __name__ == "__main__":
    main()
