"""Piecewise-constant flows of g' = (A + uB) g, Grassmannians of H^n, reachability probes.

With u constant on each segment the flow is a product of exponentials, so
integration is exact up to the accuracy of ``hexp``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .hmat import (
    HMatrix,
    adjoint_array,
    hconj_transpose_array,
    hexp,
    qmatmul,
    renormalize,
    study_det_abs,
)
from .quaternion import qconj_array, qmul_array

FRAME_RTOL = 1e-10


@dataclass(frozen=True)
class ControlSignal:
    """Piecewise-constant control: ``segments`` of (duration, u), applied in order.

    The empty signal is allowed and acts as the identity.
    """

    segments: tuple = ()

    def __post_init__(self):
        segs = tuple((float(d), float(u)) for d, u in self.segments)
        for d, u in segs:
            if not (d > 0 and math.isfinite(d)) or not math.isfinite(u):
                raise ValueError(f"invalid segment ({d}, {u}): durations must be positive and finite")
        object.__setattr__(self, "segments", segs)

    @property
    def duration(self) -> float:
        return sum(d for d, _ in self.segments)

    def __len__(self):
        return len(self.segments)

    def __add__(self, other: "ControlSignal") -> "ControlSignal":
        return ControlSignal(self.segments + other.segments)

    def reversed(self) -> "ControlSignal":
        return ControlSignal(self.segments[::-1])

    def to_json(self) -> dict:
        return {"segments": [list(s) for s in self.segments]}

    @classmethod
    def from_json(cls, obj) -> "ControlSignal":
        try:
            segs = obj["segments"]
        except (KeyError, TypeError):
            raise ValueError("signal JSON needs a 'segments' list") from None
        if any(len(s) != 2 for s in segs):
            raise ValueError("each segment must be [duration, u]")
        return cls(tuple(tuple(s) for s in segs))


@dataclass
class FlowResult:
    g: HMatrix
    det_drift: float
    snapshots: list


def simulate(a: HMatrix, b: HMatrix, signal: ControlSignal, g0: HMatrix | None = None,
             renorm: bool = True, keep_snapshots: bool = False) -> FlowResult:
    """Integrate the system and report the worst |det| drift seen before renormalizing."""
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    if not isinstance(signal, ControlSignal):
        raise TypeError("signal must be a ControlSignal")
    g = HMatrix.identity(a.n) if g0 is None else g0
    if g.n != a.n:
        raise ValueError("initial condition has the wrong size")
    d0 = study_det_abs(g)
    if abs(d0 - 1.0) > 1e-8:
        raise ValueError(f"initial condition has |det| = {d0}, expected 1")
    drift = 0.0
    snaps = [g] if keep_snapshots else []
    for duration, u in signal.segments:
        g = hexp((a + b * u) * duration) @ g
        drift = max(drift, abs(study_det_abs(g) - 1.0))
        if renorm:
            g = renormalize(g)
        if keep_snapshots:
            snaps.append(g)
    return FlowResult(g=g, det_drift=drift, snapshots=snaps)


def flow(a: HMatrix, b: HMatrix, signal: ControlSignal, g0: HMatrix | None = None,
         renorm: bool = True) -> HMatrix:
    return simulate(a, b, signal, g0, renorm=renorm).g


# ----------------------------------------------------------------------------
# Grassmannians


def _inner(x, y):
    """Quaternionic inner product sum conj(x_r) y_r of (n, 4) vectors."""
    return qmul_array(qconj_array(x), y).sum(axis=0)


def orthonormalize(frame, rtol: float = FRAME_RTOL):
    """Modified Gram-Schmidt over H (right scalars), one re-orthogonalization pass."""
    frame = np.array(frame, dtype=float)
    out = np.empty_like(frame)
    for k in range(frame.shape[1]):
        v = frame[:, k].copy()
        size = np.linalg.norm(v)
        for _ in range(2):
            for j in range(k):
                u = out[:, j]
                v -= qmul_array(u, _inner(u, v))
        vn = np.linalg.norm(v)
        if size == 0.0 or vn <= rtol * size:
            raise np.linalg.LinAlgError(f"frame column {k} is numerically dependent")
        out[:, k] = v / vn
    return out


@dataclass
class GrassmannPoint:
    """A d-dimensional right H-subspace of H^n, stored as an orthonormal n x d frame."""

    n: int
    d: int
    frame: np.ndarray

    @classmethod
    def from_frame(cls, frame) -> "GrassmannPoint":
        frame = orthonormalize(frame)
        n, d, _ = frame.shape
        return cls(n, d, frame)

    @classmethod
    def standard(cls, n: int, d: int) -> "GrassmannPoint":
        """Span of the first d standard basis vectors."""
        if not 1 <= d <= n:
            raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
        frame = np.zeros((n, d, 4))
        frame[np.arange(d), np.arange(d), 0] = 1.0
        return cls(n, d, frame)

    @classmethod
    def random(cls, n: int, d: int, seed=None) -> "GrassmannPoint":
        rng = np.random.default_rng(seed)
        return cls.from_frame(rng.standard_normal((n, d, 4)))

    def projector(self) -> np.ndarray:
        return qmatmul(self.frame, hconj_transpose_array(self.frame))

    def gram(self) -> np.ndarray:
        return qmatmul(hconj_transpose_array(self.frame), self.frame)

    def gauge(self, u) -> "GrassmannPoint":
        """Same subspace, frame multiplied on the right by a d x d matrix u."""
        return GrassmannPoint.from_frame(qmatmul(self.frame, np.asarray(u, dtype=float)))

    def to_json(self) -> dict:
        return {"n": self.n, "d": self.d, "frame": self.frame.tolist()}


def grassmann_act(g: HMatrix, p: GrassmannPoint) -> GrassmannPoint:
    if g.n != p.n:
        raise ValueError(f"size mismatch: {g.n} vs {p.n}")
    return GrassmannPoint.from_frame(qmatmul(g.data, p.frame))


def grassmann_dist(p1: GrassmannPoint, p2: GrassmannPoint) -> float:
    """Frobenius distance between the orthogonal projectors."""
    if (p1.n, p1.d) != (p2.n, p2.d):
        raise ValueError("points live on different Grassmannians")
    return float(np.linalg.norm(p1.projector() - p2.projector()))


def complete_frame(frame) -> np.ndarray:
    """Extend an orthonormal n x d frame to an n x n unitary over H."""
    frame = np.asarray(frame, dtype=float)
    n, d, _ = frame.shape
    cols = [frame[:, k] for k in range(d)]
    for e in range(n):
        if len(cols) == n:
            break
        v = np.zeros((n, 4))
        v[e, 0] = 1.0
        for _ in range(2):
            for u in cols:
                v -= qmul_array(u, _inner(u, v))
        vn = np.linalg.norm(v)
        if vn > 1e-6:
            cols.append(v / vn)
    return np.stack(cols, axis=1)


def grassmann_transport(p: GrassmannPoint, q: GrassmannPoint) -> HMatrix:
    """A unitary g in Sl(n, H) with g p = q."""
    if (p.n, p.d) != (q.n, q.d):
        raise ValueError("points live on different Grassmannians")
    up = complete_frame(p.frame)
    uq = complete_frame(q.frame)
    return HMatrix(qmatmul(uq, hconj_transpose_array(up)))


# ----------------------------------------------------------------------------
# reachability


@dataclass
class ReachTrace:
    best_dist: float
    best_signal: ControlSignal
    history: np.ndarray  # history[k]: best distance over the first k + 1 candidates


def _batched_flow(ca, cb, durations, controls):
    """Products exp(d_K X_K) ... exp(d_1 X_1) of complex adjoints; arrays (m, K)."""
    gens = ca[None, None] + controls[..., None, None] * cb[None, None]
    exps = scipy.linalg.expm(gens * durations[..., None, None])
    g = exps[:, 0]
    for k in range(1, exps.shape[1]):
        g = exps[:, k] @ g
    return g


def _log_uniform(rng, lo, hi, size):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size=size))


def reach_probe_trace(a: HMatrix, b: HMatrix, target: HMatrix, budget: int, seed=None,
                      batch: int = 64, max_segments: int = 32, u_clip: float = 20.0) -> ReachTrace:
    """Random shooting with local refinement toward ``target``.

    Candidate 0 is the empty signal. Later candidates come in batches of
    ``batch``: a quarter fresh signals (Cauchy controls, log-uniform
    durations, segment count growing with the number of candidates already
    drawn), a quarter the incumbent extended by one random segment, and half
    perturbations of the incumbent's durations and controls. The incumbent is
    the one held at the start of the batch. The draw sequence does not depend
    on ``budget``, so a smaller budget sees a prefix of the candidates of a
    larger one and ``best_dist`` is nonincreasing in the budget.

    This is heuristic evidence only; it cannot decide controllability.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if a.n != b.n or target.n != a.n:
        raise ValueError("size mismatch")
    rng = np.random.default_rng(seed)
    ca, cb, ct = adjoint_array(a.data), adjoint_array(b.data), adjoint_array(target.data)

    def dist(cg):
        # |chi(M)|_F^2 = 2 |M|_F^2
        return np.linalg.norm(cg - ct, axis=(-2, -1)) / math.sqrt(2.0)

    def fresh(m, n_seg):
        return (_log_uniform(rng, 0.01, 1.0, (m, n_seg)),
                np.clip(rng.standard_cauchy((m, n_seg)), -u_clip, u_clip))

    history = np.empty(budget)
    best_dist = float(dist(np.eye(2 * a.n)))
    best_d = np.zeros(0)
    best_u = np.zeros(0)
    history[0] = best_dist
    k = 1
    sigmas = (0.3, 0.1, 0.03, 0.01)
    batch_index = 0
    quarter = batch // 4
    while k < budget:
        n_seg = min(1 + int(math.log2(1 + k / batch)), 8)
        groups = [fresh(quarter, n_seg)]
        if best_d.size and best_d.size < max_segments:
            ed, eu = fresh(quarter, 1)
            groups.append((np.hstack([np.broadcast_to(best_d, (quarter, best_d.size)), ed]),
                           np.hstack([np.broadcast_to(best_u, (quarter, best_u.size)), eu])))
        else:
            groups.append(fresh(quarter, 1))
        m = batch - 2 * quarter
        if best_d.size:
            sigma = sigmas[batch_index % len(sigmas)]
            pd = best_d[None, :] * np.exp(sigma * rng.standard_normal((m, best_d.size)))
            pu = best_u[None, :] + sigma * (1.0 + np.abs(best_u[None, :])) * rng.standard_normal((m, best_u.size))
            groups.append((pd, np.clip(pu, -u_clip, u_clip)))
        else:
            groups.append(fresh(m, n_seg))
        batch_index += 1

        take = budget - k
        for durations, controls in groups:
            if take <= 0:
                break
            durations, controls = durations[:take], controls[:take]
            with np.errstate(over="ignore", invalid="ignore"):
                ds = dist(_batched_flow(ca, cb, durations, controls))
            ds = np.where(np.isfinite(ds), ds, np.inf)
            history[k:k + len(ds)] = np.minimum.accumulate(np.concatenate([[best_dist], ds]))[1:]
            j = int(np.argmin(ds))
            if ds[j] < best_dist:
                best_dist = float(ds[j])
                best_d, best_u = durations[j].copy(), controls[j].copy()
            k += len(ds)
            take -= len(ds)
    signal = ControlSignal(tuple(zip(best_d.tolist(), best_u.tolist())))
    return ReachTrace(best_dist=best_dist, best_signal=signal, history=history)


def reach_probe(a: HMatrix, b: HMatrix, target: HMatrix, budget: int, seed=None):
    """Return (best_dist, best_signal) after ``budget`` candidate signals."""
    trace = reach_probe_trace(a, b, target, budget, seed)
    return trace.best_dist, trace.best_signal
