"""Pass/fail batteries over the numerical checks, with deterministic JSON reports.

Each check records its name, a short anchor naming the claim it exercises, a
hash of its inputs, the measured value, the threshold, the relation the value
must satisfy and whether it passed. All randomness derives from
``RunConfig.seed``: suite k uses child k of ``SeedSequence(seed)`` in the
order of ``SUITES``, so a suite's draws do not depend on which other suites ran.
"""

from __future__ import annotations

import hashlib
import json
import math
import operator
from dataclasses import dataclass, field

import numpy as np

from .certify import (
    DEFAULT_Q,
    Verdict,
    canonical_pair,
    certify,
    conjugate_system,
    diagonalize_cartan,
    permutation_matrix,
    sample_generic,
)
from .hmat import HMatrix, random_group_element, sl2_block_basis, sl_basis, vectorize
from .quaternion import DEFAULT_TOL, Quaternion, in_forbidden_union
from .wedge import (
    corner_closure,
    homotopy_path,
    orbit_tangent_rank,
    orbit_tangent_singular_values,
    predicted_decay_rate,
    scaled_limit_trace,
    torus_cone_full,
    verify_conjugation_homotopy,
)

SUITES = ("limits", "cone", "orbits", "homotopy", "cartan", "generic")

_RELATIONS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge, "==": operator.eq}


@dataclass
class RunConfig:
    tol: float = DEFAULT_TOL
    Q: int = DEFAULT_Q
    seed: int = 0
    max_depth: int | None = None
    output_path: str | None = None
    generic_trials: int = 1000
    cone_trials: int = 500

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.Q < 2:
            raise ValueError("Q must be at least 2")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive")

    def to_json(self) -> dict:
        return {"tol": self.tol, "Q": self.Q, "seed": self.seed, "max_depth": self.max_depth}


def inputs_hash(inputs) -> str:
    blob = json.dumps(inputs, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, (np.floating, np.integer)):
        return _clean(x.item())
    return x


@dataclass
class CheckRecord:
    name: str
    anchor: str
    inputs: dict
    residual: float
    threshold: float
    relation: str = "<="
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.threshold is None:
            return True
        return bool(_RELATIONS[self.relation](self.residual, self.threshold))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "inputs_hash": inputs_hash(self.inputs),
            "inputs": self.inputs,
            "residual": _clean(self.residual),
            "threshold": _clean(self.threshold),
            "relation": self.relation,
            "passed": self.passed,
            "detail": {k: _clean(v) for k, v in self.detail.items()},
        }


@dataclass
class Report:
    suite: str
    config: RunConfig
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "config": self.config.to_json(),
            "passed": self.passed,
            "n_checks": len(self.checks),
            "n_failed": sum(not c.passed for c in self.checks),
            "checks": [c.to_json() for c in self.checks],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


# ----------------------------------------------------------------------------
# suites


def suite_limits(cfg: RunConfig, rng) -> list:
    out = []
    t_grid = np.linspace(0.0, 8.0, 33)
    for n in (2, 3, 4):
        a, b = canonical_pair(n)
        p_norm = a[0, n - 1].norm()
        for lower in (False, True):
            corner = "lower" if lower else "upper"
            tr = scaled_limit_trace(a, b, t_grid, lower=lower)
            pred = predicted_decay_rate(a, b, lower=lower)
            ref = a[n - 1, 0].norm() if lower else p_norm
            inputs = {"pair": "canonical", "n": n, "corner": corner, "t": [0.0, 8.0, 33]}
            out.append(CheckRecord(
                f"corner entry norm constant (n={n}, {corner})", "corner-root limit",
                inputs, float(np.max(np.abs(np.array(tr.target_entry_norms) - ref))), 1e-10))
            out.append(CheckRecord(
                f"off-corner decay rate matches root gaps (n={n}, {corner})", "corner-root limit",
                inputs, abs(tr.fitted_rate - pred) / abs(pred), 0.05,
                detail={"fitted_rate": tr.fitted_rate, "predicted_rate": pred}))
    a, b = canonical_pair(3)
    only = HMatrix.unit(3, 0, 2, a[0, 2])
    tr = scaled_limit_trace(only, b, t_grid)
    out.append(CheckRecord("pure corner input has no off-corner part", "corner-root limit",
                           {"n": 3, "entry": a[0, 2].to_json()}, max(tr.off_target_norms), 0.0, "=="))
    for n in (2, 3, 4):
        sub = corner_closure(Quaternion(1, 0, 1, 0), Quaternion(0, 1, 0, 1), n)
        out.append(CheckRecord(f"corner lines generate the sl(2,H) corner block (n={n})",
                               "corner-root wedge closure", {"n": n, "p": "1+j", "q": "i+k"},
                               sub.span_rank, 15, "==", detail={"margin": sub.margin}))
    return out


def suite_cone(cfg: RunConfig, rng) -> list:
    c1, c2 = 1.0, math.sqrt(2.0)
    out = []
    witnesses = [("1+j", Quaternion(1, 0, 1, 0), True), ("1+i", Quaternion(1, 1, 0, 0), False),
                 ("j", Quaternion(0, 0, 1, 0), False), ("2j-3k", Quaternion(0, 0, 2, -3), False)]
    for label, q, expect in witnesses:
        full, margin = torus_cone_full(q, c1, c2, 400, Q=cfg.Q)
        inputs = {"q": label, "c1": c1, "c2": "sqrt2", "samples": 400}
        if expect:
            out.append(CheckRecord(f"torus curve of {label} spans H", "torus cone", inputs, margin, 1e-9, ">"))
        else:
            out.append(CheckRecord(f"torus curve of {label} stays in a plane", "torus cone", inputs,
                                   margin, 0.0, "==", detail={"full": full}))
    qs = rng.standard_normal((cfg.cone_trials, 4))
    # two draws in three are pushed into one of the two planes
    plane = rng.integers(0, 3, cfg.cone_trials)
    qs[plane == 1, 2:] = 0.0
    qs[plane == 2, :2] = 0.0
    disagree = 0
    min_margin = math.inf
    for row in qs:
        q = Quaternion.from_array(row)
        full, margin = torus_cone_full(q, c1, c2, 400, Q=cfg.Q)
        if full == in_forbidden_union(q, cfg.tol):
            disagree += 1
        if full:
            min_margin = min(min_margin, margin)
    out.append(CheckRecord("cone fullness agrees with the plane test", "torus cone",
                           {"trials": cfg.cone_trials, "seed": cfg.seed}, disagree, 0, "==",
                           detail={"in_planes": int(np.sum(plane > 0)), "min_full_margin": min_margin}))
    return out


def suite_orbits(cfg: RunConfig, rng) -> list:
    out = []
    for n in (2, 3, 4):
        for d in range(1, n):
            sv = orbit_tangent_singular_values(n, d)
            gap = sv[3] / sv[4] if sv[4] > 0 else math.inf
            inputs = {"n": n, "d": d}
            out.append(CheckRecord(f"corner-block orbit through V_d has dimension 4 (n={n}, d={d})",
                                   "4-sphere orbit", inputs, orbit_tangent_rank(n, d), 4, "=="))
            out.append(CheckRecord(f"tangent singular-value gap (n={n}, d={d})", "4-sphere orbit",
                                   inputs, gap, 1e6, ">"))
            if n > 2:
                p = homotopy_path(n, d, math.pi / 2)
                pinv = p.inv()
                moved = [p @ x @ pinv for x in sl2_block_basis(n, d - 1, d)]
                out.append(CheckRecord(f"rank unchanged after conjugating by the homotopy (n={n}, d={d})",
                                       "4-sphere orbit / homotopy", inputs,
                                       orbit_tangent_rank(n, d, moved), 4, "=="))
    out.append(CheckRecord("full algebra is transitive on Gr_1(H^2)", "4-sphere orbit",
                           {"n": 2, "d": 1, "basis": "sl(2,H)"},
                           orbit_tangent_rank(2, 1, sl_basis(2)), 4, "=="))
    return out


def suite_homotopy(cfg: RunConfig, rng) -> list:
    out = []
    for n in (2, 3, 4, 5):
        for d in range(1, n):
            rep = verify_conjugation_homotopy(n, d)
            inputs = {"n": n, "d": d}
            out.append(CheckRecord(f"homotopy carries block (d-1,d) to the corner (n={n}, d={d})",
                                   "block homotopy", inputs, rep.ad_residual, 1e-10,
                                   detail={"image_rank": rep.image_rank}))
            out.append(CheckRecord(f"homotopy fixes V_d (n={n}, d={d})", "block homotopy",
                                   inputs, rep.fixes_Vd_residual, 1e-10))
    return out


def _permutation_residual(n: int, r: int, s: int) -> float:
    p = permutation_matrix(n, r, s)
    pinv = p.inv()
    target = np.stack([vectorize(x) for x in sl2_block_basis(n, 0, n - 1)])
    q, _ = np.linalg.qr(target.T)
    worst = 0.0
    for x in sl2_block_basis(n, r, s):
        v = vectorize(p @ x @ pinv)
        worst = max(worst, float(np.linalg.norm(v - q @ (q.T @ v)) / np.linalg.norm(v)))
    return worst


def suite_cartan(cfg: RunConfig, rng) -> list:
    out = []
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 5))
        re = np.sort(rng.uniform(-3, 3, n))[::-1]
        re -= re.mean()
        im = rng.uniform(0.2, 3.0, n)
        d = HMatrix.from_complex(np.diag(re + 1j * im))
        h = random_group_element(n, rng)
        frame = diagonalize_cartan(h @ d @ h.inv())
        worst = max(worst, float(np.max(np.abs(frame.eigenvalues - (re + 1j * im)))))
    out.append(CheckRecord("diagonalization recovers a conjugated spectrum", "Cartan conjugacy",
                           {"trials": 100, "seed": cfg.seed}, worst, 1e-8))
    worst = 0.0
    for n in (3, 4):
        for r in range(n):
            for s in range(n):
                if r != s:
                    worst = max(worst, _permutation_residual(n, r, s))
    out.append(CheckRecord("permutations carry block (r,s) to the corner block", "Cartan conjugacy / corner block",
                           {"n": [3, 4]}, worst, 1e-10))
    a, b = canonical_pair(2)
    cert = certify(a, b, Q=cfg.Q, tol=cfg.tol, max_depth=cfg.max_depth)
    base = cert.verdict
    flips = 0
    for _ in range(50):
        g = random_group_element(2, rng)
        a1, b1 = conjugate_system(a, b, g)
        if certify(a1, b1, Q=cfg.Q, tol=cfg.tol, max_depth=cfg.max_depth).verdict is not base:
            flips += 1
    out.append(CheckRecord("reference pair certifies Controllable", "sufficient conditions",
                           {"pair": "canonical", "n": 2}, int(base is Verdict.CONTROLLABLE), 1, "=="))
    out.append(CheckRecord("verdict survives random conjugation", "Cartan conjugacy",
                           {"pair": "canonical", "n": 2, "trials": 50}, flips, 0, "=="))
    return out


def suite_generic(cfg: RunConfig, rng) -> list:
    seed = int(rng.integers(0, 2**31))
    stats = sample_generic(2, cfg.generic_trials, seed=seed, Q=cfg.Q, tol=cfg.tol)
    inputs = {"n": 2, "trials": cfg.generic_trials, "seed": seed}
    return [
        CheckRecord("Gaussian pairs satisfy the rank condition", "genericity", inputs,
                    stats.h1_fraction, 0.999, ">="),
        CheckRecord("Controllable fraction after frame transport (reported only)", "genericity",
                    inputs, stats.controllable_fraction, None, "<=",
                    detail={"note": stats.note, **{f"count_{k}": v for k, v in stats.verdict_counts.items()}}),
        CheckRecord("reference pair stays Controllable under conjugation", "genericity",
                    inputs, stats.conjugations_controllable, stats.conjugations, "=="),
    ]


_RUNNERS = {
    "limits": suite_limits,
    "cone": suite_cone,
    "orbits": suite_orbits,
    "homotopy": suite_homotopy,
    "cartan": suite_cartan,
    "generic": suite_generic,
}


def run_suite(name: str, cfg: RunConfig | None = None) -> Report:
    cfg = cfg or RunConfig()
    if name != "all" and name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    children = np.random.SeedSequence(cfg.seed).spawn(len(SUITES))
    names = SUITES if name == "all" else (name,)
    checks = []
    for s in names:
        rng = np.random.default_rng(children[SUITES.index(s)])
        checks.extend(_RUNNERS[s](cfg, rng))
    return Report(name, cfg, checks)
