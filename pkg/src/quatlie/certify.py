"""Sufficient conditions for controllability of g' = (A + uB) g on Sl(n, H).

H1 is the Lie algebra rank condition. H2 asks that B be complex diagonal,
diag(a_r + i b_r), with a_1 > a_2 >= ... >= a_{n-1} > a_n, b_1 b_n != 0 and
b_1 / b_n irrational. H3 asks that the corner entries A[0, n-1] and A[n-1, 0]
avoid span{1, i} and span{j, k}. A general B is first conjugated into the
complex diagonal Cartan subalgebra; A is transported along with it.

The conditions are sufficient only, so a failed H2 or H3 yields
``Inconclusive``, never a negative verdict.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from joblib import Parallel, delayed

from .hmat import (
    HMatrix,
    bracket,
    complex_adjoint,
    random_algebra_element,
    random_group_element,
    renormalize,
    sl_dim,
    study_det_abs,
)
from .lie import complex_diagonal, generated_subalgebra
from .quaternion import DEFAULT_TOL, Quaternion, in_forbidden_union

DEFAULT_Q = 10_000
GAP_RTOL = 1e-6
DEFECTIVE_COND = 1e8


class Verdict(str, enum.Enum):
    CONTROLLABLE = "Controllable"
    NOT_ACCESSIBLE = "NotAccessible"
    INCONCLUSIVE = "Inconclusive"


class CartanFrameError(ValueError):
    """B could not be brought into the Cartan subalgebra.

    ``reason`` is ``"near-degenerate"`` (eigenvalue classes closer than the
    gap tolerance) or ``"defective"`` (B is not semisimple).
    """

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


# ----------------------------------------------------------------------------
# rational approximation


def convergents(x):
    """Continued-fraction convergents of x as exact Fractions."""
    x = Fraction(x)
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    while True:
        a = math.floor(x)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)
        frac = x - a
        if frac == 0:
            return
        x = 1 / frac


def irrational_at_resolution(x: float, q_max: int = DEFAULT_Q) -> bool:
    """True if no p/q with q <= q_max lies within 1/(2 q_max^2) of x.

    Any such fraction would be a convergent of x (Legendre), so scanning the
    convergents with denominator <= q_max is exhaustive. x is taken as the
    exact rational value of the float.
    """
    if q_max < 1:
        raise ValueError("q_max must be positive")
    if not math.isfinite(x):
        return False
    xf = Fraction(abs(x))
    bound = Fraction(1, 2 * q_max * q_max)
    for c in convergents(xf):
        if c.denominator > q_max:
            break
        if abs(xf - c) < bound:
            return False
    return True


# ----------------------------------------------------------------------------
# reports


@dataclass
class H1Report:
    holds: bool
    rank: int
    margin: float
    depth: int = 0
    status: str = "closed"

    def to_json(self) -> dict:
        return {"holds": self.holds, "rank": self.rank, "margin": self.margin,
                "depth": self.depth, "status": self.status}


@dataclass
class H2Report:
    is_diagonal_frame: bool
    a: list
    b: list
    ordering_ok: bool
    b_ends_nonzero: bool
    ratio_irrational_at_resolution: bool
    resolution_Q: int

    @property
    def holds(self) -> bool:
        return (self.is_diagonal_frame and self.ordering_ok and self.b_ends_nonzero
                and self.ratio_irrational_at_resolution)

    def to_json(self) -> dict:
        return {
            "is_diagonal_frame": self.is_diagonal_frame,
            "a": list(self.a),
            "b": list(self.b),
            "ordering_ok": self.ordering_ok,
            "b_ends_nonzero": self.b_ends_nonzero,
            "ratio_irrational_at_resolution": self.ratio_irrational_at_resolution,
            "resolution_Q": self.resolution_Q,
        }


@dataclass
class H3Report:
    p: Quaternion
    q: Quaternion
    p_ok: bool
    q_ok: bool

    @property
    def holds(self) -> bool:
        return self.p_ok and self.q_ok

    def to_json(self) -> dict:
        return {"p": self.p.to_json(), "q": self.q.to_json(), "p_ok": self.p_ok, "q_ok": self.q_ok}


@dataclass
class CartanFrame:
    """Conjugator g with g B g^-1 = B_diag = diag(a_r + i b_r), b_r >= 0."""

    g: HMatrix
    B_diag: HMatrix
    residual: float

    @property
    def eigenvalues(self) -> np.ndarray:
        d = self.B_diag.data[np.arange(self.B_diag.n), np.arange(self.B_diag.n)]
        return d[:, 0] + 1j * d[:, 1]

    def to_json(self) -> dict:
        return {"g": self.g.to_json(), "B_diag": self.B_diag.to_json(), "residual": self.residual}


@dataclass
class Certificate:
    verdict: Verdict
    h1: H1Report
    h2: H2Report | None = None
    h3: H3Report | None = None
    frame: CartanFrame | None = None
    reason: str | None = None
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "reason": self.reason,
            "h1": self.h1.to_json(),
            "h2": None if self.h2 is None else self.h2.to_json(),
            "h3": None if self.h3 is None else self.h3.to_json(),
            "frame": None if self.frame is None else self.frame.to_json(),
            "config": dict(self.config),
        }


# ----------------------------------------------------------------------------
# condition checks


def check_h2(b_diag: HMatrix, Q: int = DEFAULT_Q, tol: float = DEFAULT_TOL) -> H2Report:
    if b_diag.n < 2:
        raise ValueError("H2 needs n >= 2")
    scale = max(float(np.abs(b_diag.data).max()), np.finfo(float).tiny)
    parts = complex_diagonal(b_diag, tol)
    if parts is None:
        raise ValueError("B must be diagonal with complex entries (no j, k parts)")
    a, b = parts
    n = b_diag.n
    gap = tol * scale
    ordering_ok = bool(
        a[0] - a[1] > gap
        and a[n - 2] - a[n - 1] > gap
        and all(a[r] - a[r + 1] >= -gap for r in range(n - 1))
    )
    ends = bool(abs(b[0]) > gap and abs(b[-1]) > gap)
    irrational = ends and irrational_at_resolution(b[0] / b[-1], Q)
    return H2Report(
        is_diagonal_frame=True,
        a=[float(v) for v in a],
        b=[float(v) for v in b],
        ordering_ok=ordering_ok,
        b_ends_nonzero=ends,
        ratio_irrational_at_resolution=bool(irrational),
        resolution_Q=int(Q),
    )


def check_h3(a: HMatrix, tol: float = DEFAULT_TOL) -> H3Report:
    if a.n < 2:
        raise ValueError("H3 needs n >= 2")
    p, q = a[0, a.n - 1], a[a.n - 1, 0]
    return H3Report(p=p, q=q, p_ok=not in_forbidden_union(p, tol), q_ok=not in_forbidden_union(q, tol))


# ----------------------------------------------------------------------------
# Cartan frame


def _pair_conjugates(w: np.ndarray) -> list[int]:
    """Pick one eigenvalue (the one with Im >= 0) from each conjugate pair."""
    remaining = list(range(len(w)))
    reps = []
    while remaining:
        i = max(remaining, key=lambda k: (w[k].imag, w[k].real))
        remaining.remove(i)
        j = min(remaining, key=lambda k: abs(w[k] - np.conj(w[i])))
        remaining.remove(j)
        reps.append(i)
    return reps


def _canonical_order(lams: np.ndarray, scale: float) -> np.ndarray:
    """Indices sorting by decreasing real part, ties by decreasing imaginary part."""
    quantum = 1e-9 * scale
    keys = [(-round(lam.real / quantum), -lam.imag) for lam in lams]
    return np.array(sorted(range(len(lams)), key=lambda k: keys[k]))


def diagonalize_cartan(b: HMatrix, gap_rtol: float = GAP_RTOL) -> CartanFrame:
    """Conjugate a regular semisimple B into the complex diagonal subalgebra.

    Eigenvalues of the complex adjoint come in pairs (lam, conj(lam)); an
    eigenvector c for lam gives the quaternionic vector x with B x = x lam via
    u_r = c[2r], v_r = -conj(c[2r+1]), x = u + v j. The columns x_r form X and
    g = X^-1 (rescaled to |det| = 1).
    """
    n = b.n
    c = complex_adjoint(b)
    scale = max(b.norm(), np.finfo(float).tiny)
    w, v = np.linalg.eig(c)
    cond = np.linalg.cond(v)
    if not np.isfinite(cond) or cond > DEFECTIVE_COND:
        raise CartanFrameError("defective", f"eigenvector condition number {cond:.3g}")
    reps = _pair_conjugates(w)
    lams = w[reps]
    order = _canonical_order(lams, scale)
    reps = [reps[k] for k in order]
    lams = w[reps]
    for r in range(n):
        for s in range(r + 1, n):
            sep = min(abs(lams[r] - lams[s]), abs(lams[r] - np.conj(lams[s])))
            if sep < gap_rtol * scale:
                raise CartanFrameError(
                    "near-degenerate", f"eigenvalue classes {lams[r]:.6g} and {lams[s]:.6g}"
                )
    cols = v[:, reps]
    x = np.stack([cols[0::2].real, cols[0::2].imag, -cols[1::2].real, cols[1::2].imag], axis=-1)
    x /= np.linalg.norm(x, axis=(0, 2))[None, :, None]
    g = renormalize(HMatrix(x).inv())
    lams = np.where(np.abs(lams.imag) <= 1e-14 * scale, lams.real + 0j, lams)
    b_diag = HMatrix.from_complex(np.diag(lams))
    residual = (g @ b @ g.inv() - b_diag).norm() / scale
    return CartanFrame(g=g, B_diag=b_diag, residual=float(residual))


def conjugate_system(a: HMatrix, b: HMatrix, g: HMatrix, det_tol: float = 1e-8):
    """Return (g a g^-1, g b g^-1)."""
    d = study_det_abs(g)
    if d == 0.0:
        raise ValueError("conjugator is singular")
    if abs(d - 1.0) > det_tol:
        raise ValueError(f"conjugator has |det| = {d}, expected 1")
    ginv = g.inv()
    return g @ a @ ginv, g @ b @ ginv


def permutation_matrix(n: int, r: int, s: int) -> HMatrix:
    """Permutation P with P e_r = e_0 and P e_s = e_{n-1} (0-based).

    Conjugation by P carries the sl(2, H) block on {r, s} onto the block on
    {0, n - 1}.
    """
    if r == s or not (0 <= r < n and 0 <= s < n):
        raise ValueError("need distinct indices in range")
    target = {r: 0, s: n - 1}
    free_src = [k for k in range(n) if k not in target]
    free_dst = [k for k in range(n) if k not in (0, n - 1)]
    target.update(zip(free_src, free_dst))
    data = np.zeros((n, n, 4))
    for src, dst in target.items():
        data[dst, src, 0] = 1.0
    return HMatrix(data)


# ----------------------------------------------------------------------------
# certificate


def certify(a: HMatrix, b: HMatrix, Q: int = DEFAULT_Q, tol: float = DEFAULT_TOL,
            max_depth: int | None = None, seed=None) -> Certificate:
    """Check H1-H3 for the pair (A, B), moving B into its Cartan frame first."""
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    if a.n < 2:
        raise ValueError("certification needs n >= 2")
    config = {"Q": int(Q), "tol": float(tol), "seed": seed}

    sub = generated_subalgebra([a, b], max_depth=max_depth)
    h1 = H1Report(holds=sub.is_full, rank=sub.span_rank, margin=sub.margin,
                  depth=sub.closure_depth, status=sub.status)
    if sub.status != "closed":
        return Certificate(Verdict.INCONCLUSIVE, h1, reason="bracket closure unstable", config=config)
    if not h1.holds:
        return Certificate(Verdict.NOT_ACCESSIBLE, h1,
                           reason=f"generated subalgebra has dimension {h1.rank} < {sl_dim(a.n)}",
                           config=config)
    try:
        frame = diagonalize_cartan(b)
    except (CartanFrameError, np.linalg.LinAlgError) as exc:
        return Certificate(Verdict.INCONCLUSIVE, h1, reason=f"no Cartan frame ({exc})", config=config)

    a_frame, _ = conjugate_system(a, b, frame.g, det_tol=1e-6)
    h2 = check_h2(frame.B_diag, Q=Q, tol=tol)
    h3 = check_h3(a_frame, tol=tol)
    if h2.holds and h3.holds:
        return Certificate(Verdict.CONTROLLABLE, h1, h2, h3, frame, config=config)
    failed = [name for name, ok in (("H2", h2.holds), ("H3", h3.holds)) if not ok]
    return Certificate(Verdict.INCONCLUSIVE, h1, h2, h3, frame,
                       reason=f"{' and '.join(failed)} not satisfied", config=config)


def canonical_pair(n: int) -> tuple[HMatrix, HMatrix]:
    """A reference pair satisfying H1-H3.

    B = diag(a_r + i b_r) with a_r = n + 1 - 2r and b running from 1 to sqrt(2);
    A has 1 + j on the superdiagonal and at (0, n-1), i + k on the subdiagonal
    and at (n-1, 0). For n = 2 this is A = E12(1+j) + E21(i+k),
    B = diag(1 + i, -1 + i sqrt 2).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    p, q = Quaternion(1, 0, 1, 0), Quaternion(0, 1, 0, 1)
    bs = [1.0 + (math.sqrt(2) - 1.0) * r / (n - 1) for r in range(n)]
    bs[-1] = math.sqrt(2)
    b = HMatrix.diag([Quaternion(n - 1 - 2 * r, bs[r]) for r in range(n)])
    a = HMatrix.zeros(n)
    for r in range(n - 1):
        a = a.with_entry(r, r + 1, p).with_entry(r + 1, r, q)
    a = a.with_entry(0, n - 1, p).with_entry(n - 1, 0, q)
    return a, b


@dataclass
class GenericStats:
    n: int
    trials: int
    h1_fraction: float
    controllable_fraction: float
    verdict_counts: dict
    conjugations: int
    conjugations_controllable: int
    seed: int | None
    note: str = ("H2 irrationality is checked at a finite resolution Q, so the "
                 "controllable fraction is a proxy and carries no threshold.")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "h1_fraction": self.h1_fraction,
            "controllable_fraction": self.controllable_fraction,
            "verdict_counts": dict(self.verdict_counts),
            "conjugations": self.conjugations,
            "conjugations_controllable": self.conjugations_controllable,
            "seed": self.seed,
            "note": self.note,
        }


def _trial(n, seed_seq, Q, tol):
    rng = np.random.default_rng(seed_seq)
    a = random_algebra_element(n, rng)
    b = random_algebra_element(n, rng)
    cert = certify(a, b, Q=Q, tol=tol)
    return cert.h1.holds, cert.verdict


def sample_generic(n: int, trials: int, seed=None, Q: int = DEFAULT_Q, tol: float = DEFAULT_TOL,
                   conjugations: int = 100, n_jobs: int = 1) -> GenericStats:
    """Empirical frequency of H1 and of a Controllable verdict on Gaussian pairs.

    Also conjugates the reference controllable pair by ``conjugations`` random
    group elements and counts how many still certify. Trial k draws from the
    k-th child of ``SeedSequence(seed)``; the last child drives conjugations.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    children = np.random.SeedSequence(seed).spawn(trials + 1)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_trial)(n, children[k], Q, tol) for k in range(trials)
    )
    h1 = sum(1 for holds, _ in results if holds)
    counts = {v.value: 0 for v in Verdict}
    for _, verdict in results:
        counts[verdict.value] += 1

    a0, b0 = canonical_pair(n)
    rng = np.random.default_rng(children[-1])
    ok = 0
    for _ in range(conjugations):
        g = random_group_element(n, rng)
        a1, b1 = conjugate_system(a0, b0, g)
        if certify(a1, b1, Q=Q, tol=tol).verdict is Verdict.CONTROLLABLE:
            ok += 1
    return GenericStats(
        n=n,
        trials=trials,
        h1_fraction=h1 / trials,
        controllable_fraction=counts[Verdict.CONTROLLABLE.value] / trials,
        verdict_counts=counts,
        conjugations=conjugations,
        conjugations_controllable=ok,
        seed=seed,
    )


def bracket_transport_residual(a: HMatrix, b: HMatrix, g: HMatrix) -> float:
    """Relative mismatch between [gAg^-1, gBg^-1] and g[A, B]g^-1."""
    a1, b1 = conjugate_system(a, b, g)
    lhs = bracket(a1, b1)
    rhs = g @ bracket(a, b) @ g.inv()
    return (lhs - rhs).norm() / max(rhs.norm(), 1.0)
