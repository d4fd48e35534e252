"""Numerical checks of the corner limit, torus cone, conjugation homotopy and orbit dimension.

* the rescaled flow e^{-t(a_1 - a_n)} e^{t ad B} A collapses onto its
  (0, n-1) corner while the corner only rotates;
* the torus curve e^{i t c1} q e^{-i t c2} positively spans H exactly when q
  avoids span{1, i} and span{j, k};
* P(t) = e^{tA} e^{tB} fixes V_d and carries the sl(2, H) block on
  {d-1, d} to the block on {0, n-1};
* the Sl(2, H) corner block has a 4-dimensional orbit through V_d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .certify import DEFAULT_Q, check_h2
from .flow import GrassmannPoint, grassmann_act, grassmann_dist
from .hmat import HMatrix, hconj_transpose_array, hexp, qmatmul, sl2_block_basis, vectorize
from .lie import Subalgebra, ad_flow, complex_diagonal, generated_subalgebra
from .quaternion import Quaternion, _coerce, qmul_array

CONE_MARGIN_TOL = 1e-9
ORBIT_RANK_RTOL = 1e-8


# ----------------------------------------------------------------------------
# rescaled Ad-flow


@dataclass
class DecayTrace:
    t_grid: list
    off_target_norms: list
    target_entry_norms: list
    fitted_rate: float
    corner: tuple = (0, 0)

    def to_json(self) -> dict:
        rate = self.fitted_rate if math.isfinite(self.fitted_rate) else None
        return {
            "t_grid": list(self.t_grid),
            "off_target_norms": list(self.off_target_norms),
            "target_entry_norms": list(self.target_entry_norms),
            "fitted_rate": rate,
            "corner": list(self.corner),
        }


def _diag_parts(b_diag: HMatrix):
    parts = complex_diagonal(b_diag, 1e-12)
    if parts is None:
        raise ValueError("B must be diagonal with complex entries")
    return parts


def scaled_limit_trace(a: HMatrix, b_diag: HMatrix, t_grid, lower: bool = False) -> DecayTrace:
    """Track R(t) = e^{-t(a_1 - a_n)} e^{t ad B} A against its (0, n-1) entry.

    With ``lower`` the mirrored limit is traced instead:
    e^{-t(a_1 - a_n)} e^{-t ad B} A, which collapses onto the (n-1, 0) entry.
    ``fitted_rate`` is the least-squares slope of log |off-target part| in t
    (``-inf`` if the off-target part vanishes identically).
    """
    h2 = check_h2(b_diag)
    if not h2.ordering_ok:
        raise ValueError("real parts of B violate a_1 > a_2 >= ... > a_n; the limit need not exist")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing with at least two points")
    re, _ = _diag_parts(b_diag)
    n = a.n
    gap = re[0] - re[-1]
    r0, s0 = (n - 1, 0) if lower else (0, n - 1)
    sign = -1.0 if lower else 1.0
    offs, targets = [], []
    for t in t_grid:
        # e^{-t gap} e^{sign t ad B} = e^{(sign t) ad B} damped by gap / sign
        r = ad_flow(b_diag, a, sign * t, damping=sign * gap)
        data = r.data.copy()
        targets.append(float(np.linalg.norm(data[r0, s0])))
        data[r0, s0] = 0.0
        offs.append(float(np.linalg.norm(data)))
    offs = np.array(offs)
    mask = offs > 0
    if mask.sum() >= 2:
        rate = float(np.polyfit(t_grid[mask], np.log(offs[mask]), 1)[0])
    else:
        rate = -math.inf
    return DecayTrace(t_grid.tolist(), offs.tolist(), targets, rate, (r0, s0))


def predicted_decay_rate(a: HMatrix, b_diag: HMatrix, lower: bool = False) -> float:
    """Slowest exponential rate among nonzero off-corner entries of the rescaled flow.

    Entry (r, s) decays like e^{t(a_r - a_s - a_1 + a_n)} (upper corner) or
    e^{t(a_s - a_r - a_1 + a_n)} (lower corner).
    """
    re, _ = _diag_parts(b_diag)
    n = a.n
    corner = (n - 1, 0) if lower else (0, n - 1)
    gap = re[0] - re[-1]
    rates = []
    for r in range(n):
        for s in range(n):
            if (r, s) == corner or not np.any(a.data[r, s]):
                continue
            root = re[r] - re[s]
            rates.append((-root if lower else root) - gap)
    return max(rates) if rates else -math.inf


def corner_limits(a: HMatrix) -> tuple[HMatrix, HMatrix]:
    """The limit elements X = p E_{0,n-1} and Y = q E_{n-1,0} of the rescaled flows."""
    n = a.n
    return HMatrix.unit(n, 0, n - 1, a[0, n - 1]), HMatrix.unit(n, n - 1, 0, a[n - 1, 0])


def corner_closure(p, q, n: int) -> Subalgebra:
    """Subalgebra generated by the quaternionic lines through p E_{0,n-1} and q E_{n-1,0}.

    For p, q nonzero this is the 15-dimensional sl(2, H) block on {0, n-1}.
    """
    p, q = _coerce(p), _coerce(q)
    units = [Quaternion(1), Quaternion(0, 1), Quaternion(0, 0, 1), Quaternion(0, 0, 0, 1)]
    gens = [HMatrix.unit(n, 0, n - 1, p * u) for u in units]
    gens += [HMatrix.unit(n, n - 1, 0, q * u) for u in units]
    return generated_subalgebra(gens)


# ----------------------------------------------------------------------------
# torus cone


def torus_curve(q, c1: float, c2: float, t) -> np.ndarray:
    """Points e^{i t c1} q e^{-i t c2} as an (m, 4) array."""
    t = np.asarray(t, dtype=float)
    zeros = np.zeros_like(t)
    left = np.stack([np.cos(c1 * t), np.sin(c1 * t), zeros, zeros], axis=-1)
    right = np.stack([np.cos(c2 * t), -np.sin(c2 * t), zeros, zeros], axis=-1)
    return qmul_array(qmul_array(left, _coerce(q).to_array()), right)


def torus_window(c1: float, c2: float, Q: int = DEFAULT_Q, max_periods: int = 1000) -> float:
    """Length of the sampling window: min(Q, max_periods) periods of the slower rotation."""
    return 2.0 * math.pi * max(1.0 / abs(c1), 1.0 / abs(c2)) * min(Q, max_periods)


def hull_margin(points) -> float:
    """Radius of the largest ball about the origin inside conv(points); 0 if none.

    Uses the facet hyperplanes of the Qhull convex hull; the origin is interior
    exactly when every facet offset is negative.
    """
    points = np.asarray(points, dtype=float)
    dim = points.shape[1]
    sv = np.linalg.svd(points, compute_uv=False)
    if sv.size < dim or sv[dim - 1] <= 1e-9 * sv[0]:
        return 0.0
    try:
        hull = ConvexHull(points)
    except QhullError:
        return 0.0
    # equations rows: [unit normal, offset], interior satisfies normal.x + offset <= 0
    return float(max(0.0, np.min(-hull.equations[:, -1])))


def torus_cone_full(q, c1: float, c2: float, samples: int = 400, Q: int = DEFAULT_Q,
                    max_periods: int = 1000) -> tuple[bool, float]:
    """Does the sampled curve e^{i t c1} q e^{-i t c2} positively span H?

    Returns (full, margin) where margin is the in-radius about the origin of
    the convex hull of the normalized samples.
    """
    if samples < 8:
        raise ValueError("need at least 8 samples")
    if c1 * c2 == 0:
        raise ValueError("c1 and c2 must be nonzero")
    q = _coerce(q)
    if q.norm() == 0.0:
        return False, 0.0
    t = np.linspace(0.0, torus_window(c1, c2, Q, max_periods), samples)
    pts = torus_curve(q, c1, c2, t) / q.norm()
    margin = hull_margin(pts)
    return margin > CONE_MARGIN_TOL, margin


# ----------------------------------------------------------------------------
# homotopy between the block orbits


def rotation_generators(n: int, d: int) -> tuple[HMatrix, HMatrix]:
    """A: e_0 -> e_{d-1} -> -e_0 and B: e_d -> e_{n-1} -> -e_d (0-based).

    A rotation whose two indices coincide is zero.
    """
    a = HMatrix.zeros(n)
    if d - 1 != 0:
        a = a.with_entry(d - 1, 0, 1.0).with_entry(0, d - 1, -1.0)
    b = HMatrix.zeros(n)
    if d != n - 1:
        b = b.with_entry(n - 1, d, 1.0).with_entry(d, n - 1, -1.0)
    return a, b


def homotopy_path(n: int, d: int, t: float) -> HMatrix:
    a, b = rotation_generators(n, d)
    return hexp(a * t) @ hexp(b * t)


@dataclass
class HomotopyReport:
    n: int
    d: int
    ad_residual: float
    fixes_Vd_residual: float
    image_rank: int

    def __iter__(self):
        yield self.ad_residual
        yield self.fixes_Vd_residual

    def to_json(self) -> dict:
        return {"n": self.n, "d": self.d, "ad_residual": self.ad_residual,
                "fixes_Vd_residual": self.fixes_Vd_residual, "image_rank": self.image_rank}


def _orthonormal_rows(mats) -> np.ndarray:
    v = np.stack([vectorize(m) for m in mats])
    u, s, vt = np.linalg.svd(v, full_matrices=False)
    return vt[s > 1e-12 * s[0]]


def verify_conjugation_homotopy(n: int, d: int, t_grid=None) -> HomotopyReport:
    """Check that P(t) fixes V_d and P(pi/2) carries block {d-1, d} to block {0, n-1}.

    ``d`` is the subspace dimension (1 <= d <= n-1). Iterating the report
    yields (ad_residual, fixes_Vd_residual).
    """
    if n < 2 or not 1 <= d <= n - 1:
        raise ValueError(f"need n >= 2 and 1 <= d <= n-1, got n={n}, d={d}")
    if t_grid is None:
        t_grid = np.linspace(0.0, math.pi, 33)
    p = homotopy_path(n, d, math.pi / 2)
    pinv = p.inv()
    target = _orthonormal_rows(sl2_block_basis(n, 0, n - 1))
    images = [p @ x @ pinv for x in sl2_block_basis(n, d - 1, d)]
    ad_res = 0.0
    for img in images:
        v = vectorize(img)
        ad_res = max(ad_res, float(np.linalg.norm(v - target.T @ (target @ v)) / np.linalg.norm(v)))
    image_rank = len(_orthonormal_rows(images))

    vd = GrassmannPoint.standard(n, d)
    fix_res = max(grassmann_dist(grassmann_act(homotopy_path(n, d, t), vd), vd) for t in t_grid)
    return HomotopyReport(n, d, ad_res, float(fix_res), image_rank)


# ----------------------------------------------------------------------------
# orbit dimension on the Grassmannian


def orbit_tangent_singular_values(n: int, d: int, basis=None) -> np.ndarray:
    """Singular values of the infinitesimal action of ``basis`` at V_d.

    Each X contributes (I - F F^H) X F with F the frame of V_d, flattened over
    R. ``basis`` defaults to the sl(2, H) block on {0, n-1}.
    """
    if not 1 <= d <= n - 1:
        raise ValueError(f"need 1 <= d <= n-1, got d={d}, n={n}")
    if basis is None:
        basis = sl2_block_basis(n, 0, n - 1)
    frame = GrassmannPoint.standard(n, d).frame
    proj = np.eye(n)[:, :, None] * np.array([1.0, 0, 0, 0]) - qmatmul(frame, hconj_transpose_array(frame))
    rows = [qmatmul(proj, qmatmul(x.data, frame)).ravel() for x in basis]
    return np.linalg.svd(np.stack(rows), compute_uv=False)


def orbit_tangent_rank(n: int, d: int, basis=None, rtol: float = ORBIT_RANK_RTOL) -> int:
    sv = orbit_tangent_singular_values(n, d, basis)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))
