"""Bracket closure of generator sets, root components and the Ad-flow."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hmat import HMatrix, bracket, hexp, qmatmul, sl_dim, vectorize
from .quaternion import Quaternion, qmul_array

RANK_RTOL = 1e-8


class ClosureUnstable(RuntimeError):
    """Bracket closure was still growing when the depth budget ran out."""


@dataclass
class Subalgebra:
    """Real span of an orthonormal basis of sl(n, H) elements.

    ``margin`` is the ratio of smallest to largest singular value of the
    accepted (normalized) directions; values near ``RANK_RTOL`` mean the
    reported rank is borderline.
    """

    ambient_n: int
    basis: list = field(repr=False)
    span_rank: int
    closure_depth: int
    status: str = "closed"
    margin: float = 1.0

    def basis_matrix(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((0, 4 * self.ambient_n**2))
        return np.stack([vectorize(b) for b in self.basis])

    def residual(self, x: HMatrix) -> float:
        """Norm of the part of x outside the span, relative to |x|."""
        v = vectorize(x)
        size = np.linalg.norm(v)
        if size == 0.0:
            return 0.0
        q = self.basis_matrix()
        return float(np.linalg.norm(v - q.T @ (q @ v)) / size)

    def contains(self, x: HMatrix, rtol: float = RANK_RTOL) -> bool:
        return self.residual(x) <= rtol

    def closure_residual(self) -> float:
        """Largest relative residual of a basis bracket outside the span."""
        worst = 0.0
        for a, x in enumerate(self.basis):
            for y in self.basis[a + 1:]:
                c = bracket(x, y)
                if c.norm() > RANK_RTOL:
                    worst = max(worst, self.residual(c))
        return worst

    @property
    def is_full(self) -> bool:
        return self.span_rank == sl_dim(self.ambient_n)

    def to_json(self) -> dict:
        return {
            "ambient_n": self.ambient_n,
            "span_rank": self.span_rank,
            "closure_depth": self.closure_depth,
            "status": self.status,
            "margin": self.margin,
            "basis": [b.to_json() for b in self.basis],
        }


class _Span:
    """Incrementally orthonormalized span (modified Gram-Schmidt, two passes)."""

    def __init__(self, dim: int, rtol: float):
        self.q = np.zeros((0, dim))
        self.raw = []
        self.rtol = rtol

    def add(self, v: np.ndarray, floor: float) -> np.ndarray | None:
        size = np.linalg.norm(v)
        if size <= floor:
            return None
        r = v.copy()
        for _ in range(2):
            for row in self.q:
                r -= row * (row @ r)
        rn = np.linalg.norm(r)
        if rn <= self.rtol * size:
            return None
        r /= rn
        self.q = np.vstack([self.q, r])
        self.raw.append(v / size)
        return r

    def margin(self) -> float:
        if not self.raw:
            return 0.0
        sv = np.linalg.svd(np.stack(self.raw), compute_uv=False)
        return float(sv[-1] / sv[0])


def generated_subalgebra(generators, max_depth: int | None = None,
                         rtol: float = RANK_RTOL) -> Subalgebra:
    """Lie subalgebra generated by ``generators``.

    Each generation brackets the generator span against the directions
    adjoined in the previous generation, which reaches every iterated bracket.
    If the span is still growing after ``max_depth`` generations (default
    ``2 * (4n^2 - 1)``) the result carries ``status == "unstable"``.
    """
    generators = list(generators)
    if not generators:
        raise ValueError("need at least one generator")
    n = generators[0].n
    if any(g.n != n for g in generators):
        raise ValueError("generators must all have the same size")
    for g in generators:
        if not g.is_algebra_element(1e-10):
            raise ValueError("generators must have trace with zero real part")
    dim = sl_dim(n)
    if max_depth is None:
        max_depth = 2 * dim

    span = _Span(4 * n * n, rtol)
    scale = max(g.norm() for g in generators)
    for g in generators:
        span.add(vectorize(g), rtol * scale)
    gens = [HMatrix(row.reshape(n, n, 4)) for row in span.q]
    frontier = list(gens)

    depth = 0
    status = "closed"
    while frontier and len(span.q) < dim:
        if depth >= max_depth:
            status = "unstable"
            break
        added = []
        for g in gens:
            for f in frontier:
                r = span.add(vectorize(bracket(g, f)), rtol)
                if r is not None:
                    added.append(HMatrix(r.reshape(n, n, 4)))
        if added:
            depth += 1
        frontier = added

    basis = [HMatrix(row.reshape(n, n, 4)) for row in span.q]
    return Subalgebra(
        ambient_n=n,
        basis=basis,
        span_rank=len(basis),
        closure_depth=depth,
        status=status,
        margin=span.margin(),
    )


def larc(a: HMatrix, b: HMatrix, max_depth: int | None = None) -> tuple[bool, int]:
    """Lie algebra rank condition: does {a, b} generate sl(n, H)?"""
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    sub = generated_subalgebra([a, b], max_depth=max_depth)
    if sub.status != "closed":
        raise ClosureUnstable(
            f"closure still growing after {sub.closure_depth} generations (rank {sub.span_rank})"
        )
    return sub.is_full, sub.span_rank


@dataclass(frozen=True)
class RootComponent:
    """Entry of a matrix at 1-based position (r, s).

    Off-diagonal positions lie in the root space of a_r - a_s; r < s are the
    positive roots. r == s marks the diagonal (Cartan) part.
    """

    r: int
    s: int
    entry: Quaternion

    @property
    def is_diagonal(self) -> bool:
        return self.r == self.s

    @property
    def is_positive(self) -> bool:
        return self.r < self.s

    def root_value(self, a) -> float:
        """Value a_r - a_s of the root on the real diagonal (a_1, ..., a_n)."""
        return float(a[self.r - 1] - a[self.s - 1])


def root_decompose(x: HMatrix) -> list[RootComponent]:
    out = []
    for r in range(x.n):
        for s in range(x.n):
            if np.any(x.data[r, s] != 0.0):
                out.append(RootComponent(r + 1, s + 1, x[r, s]))
    return out


def reassemble(components, n: int) -> HMatrix:
    data = np.zeros((n, n, 4))
    for c in components:
        data[c.r - 1, c.s - 1] += c.entry.to_array()
    return HMatrix(data)


def complex_diagonal(b: HMatrix, tol: float = 1e-12):
    """Return (a, b) real/imaginary parts if ``b`` is diagonal with complex entries, else None."""
    scale = max(b.norm(), 1.0)
    if not b.is_diagonal(tol):
        return None
    d = b.data[np.arange(b.n), np.arange(b.n)]
    if np.abs(d[:, 2:]).max(initial=0.0) > tol * scale:
        return None
    return d[:, 0].copy(), d[:, 1].copy()


def ad_flow(b: HMatrix, a: HMatrix, t: float, damping: float = 0.0) -> HMatrix:
    """e^{t ad(b)} a, multiplied by e^{-t * damping}.

    For b = diag(a_r + i b_r) the entry (r, s) is
    e^{t(a_r - a_s - damping)} e^{i t b_r} a_rs e^{-i t b_s}, evaluated directly
    so that large t does not overflow when ``damping`` offsets the growth.
    Other b use Ad(hexp(t b)) a = e^{tb} a e^{-tb}, which is exact.
    """
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    parts = complex_diagonal(b)
    if parts is None:
        g = hexp(b * t)
        ginv = hexp(b * (-t))
        out = qmatmul(qmatmul(g.data, a.data), ginv.data)
        return HMatrix(out * np.exp(-t * damping))
    re, im = parts
    rot = np.stack([np.cos(t * im), np.sin(t * im), np.zeros_like(im), np.zeros_like(im)], axis=-1)
    rot_inv = rot * np.array([1.0, -1.0, 0.0, 0.0])
    out = qmul_array(qmul_array(rot[:, None, :], a.data), rot_inv[None, :, :])
    scale = np.exp(t * (re[:, None] - re[None, :] - damping))
    return HMatrix(out * scale[:, :, None])
