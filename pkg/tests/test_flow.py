import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quatlie.flow import (
    ControlSignal,
    GrassmannPoint,
    flow,
    grassmann_act,
    grassmann_dist,
    grassmann_transport,
    orthonormalize,
    reach_probe,
    reach_probe_trace,
    simulate,
)
from quatlie.hmat import HMatrix, complex_adjoint, hexp, qmatmul, random_algebra_element, random_group_element, study_det_abs
from quatlie.quaternion import I

from conftest import a_star, b_star, seeds


def random_signal(rng, k, u_scale=1.0, max_dur=0.1):
    return ControlSignal(tuple(zip(rng.uniform(0.01, max_dur, k), u_scale * rng.standard_normal(k))))


def random_unitary(d, rng):
    return GrassmannPoint.from_frame(rng.standard_normal((d, d, 4))).frame


# --- signals -------------------------------------------------------------------


def test_signal_validation_and_json():
    s = ControlSignal(((0.5, 1.0), (0.25, -2.0)))
    assert s.duration == 0.75 and len(s) == 2
    assert ControlSignal.from_json(s.to_json()) == s
    assert s.to_json() == {"segments": [[0.5, 1.0], [0.25, -2.0]]}
    for bad in (((0.0, 1.0),), ((-1.0, 0.0),), ((math.inf, 0.0),), ((1.0, math.nan),)):
        with pytest.raises(ValueError):
            ControlSignal(bad)
    with pytest.raises(ValueError):
        ControlSignal.from_json({"segs": []})
    with pytest.raises(ValueError):
        ControlSignal.from_json({"segments": [[1.0]]})


# --- flow ----------------------------------------------------------------------


def test_flow_examples():
    z = HMatrix.zeros(2)
    g0 = random_group_element(2, 1)
    assert flow(z, z, ControlSignal(((1.0, 0.0),)), g0).allclose(g0, atol=1e-14)
    g = flow(z, HMatrix.diag([1, -1]), ControlSignal(((1.0, 1.0),)))
    assert g.allclose(HMatrix.diag([math.e, 1 / math.e]), atol=1e-12)
    assert flow(a_star(), b_star(), ControlSignal()) == HMatrix.identity(2)


def test_flow_rejects_bad_initial_condition():
    with pytest.raises(ValueError):
        flow(a_star(), b_star(), ControlSignal(((1.0, 0.0),)), HMatrix.identity(2) * 2.0)
    with pytest.raises(TypeError):
        flow(a_star(), b_star(), [(1.0, 0.0)])
    with pytest.raises(ValueError):
        flow(a_star(), HMatrix.zeros(3), ControlSignal())


def test_flow_equals_product_of_exponentials(rng):
    a, b = random_algebra_element(3, rng), random_algebra_element(3, rng)
    s = random_signal(rng, 5)
    g = HMatrix.identity(3)
    for d, u in s.segments:
        g = hexp((a + b * u) * d) @ g
    assert flow(a, b, s, renorm=False).allclose(g, atol=1e-12)


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_flow_concatenation_is_composition(seed):
    rng = np.random.default_rng(seed)
    a, b = random_algebra_element(2, rng), random_algebra_element(2, rng)
    s1, s2 = random_signal(rng, 6), random_signal(rng, 4)
    lhs = flow(a, b, s1 + s2)
    rhs = flow(a, b, s2, flow(a, b, s1))
    assert (lhs - rhs).norm() <= 1e-9 * lhs.norm()


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_reversed_signal_with_negated_generators_returns(seed):
    rng = np.random.default_rng(seed)
    a, b = random_algebra_element(2, rng), random_algebra_element(2, rng)
    g0 = random_group_element(2, rng)
    s = random_signal(rng, 20)
    g = flow(a, b, s, g0)
    back = flow(-a, -b, s.reversed(), g)
    assert back.allclose(g0, atol=1e-9)


def test_det_drift_over_100_segments(rng):
    # round-off in |det| scales like eps * cond(g), so the bound is checked on
    # trajectories that stay moderately conditioned
    for _ in range(5):
        a, b = random_algebra_element(3, rng) * 0.3, random_algebra_element(3, rng) * 0.3
        res = simulate(a, b, random_signal(rng, 100))
        assert res.g.norm() < 1e3
        assert res.det_drift <= 1e-8
        res = simulate(a_star(), b_star(), random_signal(rng, 100, u_scale=1.0, max_dur=0.05), keep_snapshots=True)
        assert res.det_drift <= 1e-8 and len(res.snapshots) == 101


def test_det_drift_tracks_conditioning(rng):
    # a strongly expanding trajectory loses |det| accuracy roughly with cond(g)
    a, b = random_algebra_element(3, 11) * 2.0, random_algebra_element(3, 12) * 2.0
    res = simulate(a, b, random_signal(rng, 100))
    cond = np.linalg.cond(complex_adjoint(res.g))
    assert res.det_drift <= 64 * 6 * np.finfo(float).eps * cond


# --- Grassmannian --------------------------------------------------------------


def test_frames_are_orthonormal(rng):
    p = GrassmannPoint.random(4, 2, rng)
    assert np.allclose(p.gram(), HMatrix.identity(2).data, atol=1e-10)
    with pytest.raises(np.linalg.LinAlgError):
        orthonormalize(np.stack([np.ones((3, 4)), np.ones((3, 4))], axis=1))
    with pytest.raises(ValueError):
        GrassmannPoint.standard(2, 3)


def test_act_examples():
    v1 = GrassmannPoint.standard(2, 1)
    assert grassmann_dist(grassmann_act(HMatrix.identity(2), v1), v1) == 0.0
    assert grassmann_dist(grassmann_act(HMatrix.diag([2.0, 0.5]), v1), v1) < 1e-15
    with pytest.raises(ValueError):
        grassmann_act(HMatrix.identity(3), v1)
    with pytest.raises(np.linalg.LinAlgError):
        grassmann_act(HMatrix.diag([0.0, 1.0]), v1)


def test_dist_examples(rng):
    v1 = GrassmannPoint.standard(2, 1)
    e2 = GrassmannPoint(2, 1, np.array([[[0, 0, 0, 0]], [[1.0, 0, 0, 0]]]))
    assert math.isclose(grassmann_dist(v1, e2), math.sqrt(2), rel_tol=1e-15)
    p = GrassmannPoint.random(4, 2, rng)
    assert grassmann_dist(p, p.gauge(random_unitary(2, rng))) < 1e-12
    with pytest.raises(ValueError):
        grassmann_dist(v1, GrassmannPoint.standard(3, 1))


def test_dist_is_a_metric(rng):
    for _ in range(20):
        p, q, r = (GrassmannPoint.random(3, 1, rng) for _ in range(3))
        assert math.isclose(grassmann_dist(p, q), grassmann_dist(q, p))
        assert grassmann_dist(p, r) <= grassmann_dist(p, q) + grassmann_dist(q, r) + 1e-12


def test_right_scalars_do_not_change_the_subspace(rng):
    p = GrassmannPoint.random(3, 1, rng)
    scaled = GrassmannPoint.from_frame(qmatmul(p.frame, np.array([[[0.3, 1.0, -2.0, 0.5]]])))
    assert grassmann_dist(p, scaled) < 1e-12


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_action_property(seed):
    rng = np.random.default_rng(seed)
    g, h = random_group_element(3, rng), random_group_element(3, rng)
    p = GrassmannPoint.random(3, 2, rng)
    lhs = grassmann_act(g @ h, p)
    rhs = grassmann_act(g, grassmann_act(h, p))
    assert grassmann_dist(lhs, rhs) < 1e-9


@pytest.mark.parametrize("n,d", [(2, 1), (3, 1), (4, 2)])
def test_transitivity_witness(n, d, rng):
    for _ in range(10):
        p, q = GrassmannPoint.random(n, d, rng), GrassmannPoint.random(n, d, rng)
        g = grassmann_transport(p, q)
        assert abs(study_det_abs(g) - 1.0) < 1e-10
        assert grassmann_dist(grassmann_act(g, p), q) < 1e-10


def test_conjugation_limit_reaches_fixed_point(rng):
    # h^l g h^-l -> g1 for lower unipotent g and h = diag(lam, 1, ..., 1, 1/lam)
    n, d, lam = 4, 2, 1.5
    data = np.zeros((n, n, 4))
    data[np.arange(n), np.arange(n), 0] = 1.0
    low = np.tril_indices(n, -1)
    data[low] = rng.standard_normal((len(low[0]), 4))
    g = HMatrix(data)
    g1 = data.copy()
    g1[1:, 0] = 0.0
    g1[n - 1, :n - 1] = 0.0
    g1 = HMatrix(g1)
    vd = GrassmannPoint.standard(n, d)
    w = grassmann_act(g1, vd)
    dists = []
    for l in (5, 20, 40, 80):
        hl = HMatrix.diag([lam**l] + [1.0] * (n - 2) + [lam**-l])
        hinv = HMatrix.diag([lam**-l] + [1.0] * (n - 2) + [lam**l])
        gl = hl @ g @ hinv
        dists.append(grassmann_dist(grassmann_act(gl, vd), w))
        assert (gl - g1).norm() <= 3 * lam ** (-l) * HMatrix(data).norm()
    assert dists[-1] < 1e-10
    assert all(x >= y for x, y in zip(dists, dists[1:]))


# --- reachability --------------------------------------------------------------


def test_reach_identity_target_is_free():
    dist, sig = reach_probe(a_star(), b_star(), HMatrix.identity(2), budget=5, seed=0)
    assert dist == 0.0 and len(sig) == 0


def test_reach_is_deterministic_and_prefix_monotone():
    target = random_group_element(2, 9, scale=0.5)
    long = reach_probe_trace(a_star(), b_star(), target, 600, seed=4)
    short = reach_probe_trace(a_star(), b_star(), target, 250, seed=4)
    assert np.array_equal(short.history, long.history[:250])
    assert np.all(np.diff(long.history) <= 0)
    again = reach_probe(a_star(), b_star(), target, 600, seed=4)
    assert again[0] == long.best_dist and again[1] == long.best_signal
    # the reported signal really attains the reported distance
    g = flow(a_star(), b_star(), long.best_signal, renorm=False)
    assert math.isclose((g - target).norm(), long.best_dist, rel_tol=1e-8)


def test_reach_not_accessible_pair_stays_away():
    a, b = HMatrix.diag([1.0, -1.0]), HMatrix.diag([I, I])
    target = random_group_element(2, 3, scale=0.5)
    off = np.linalg.norm(target.data[[0, 1], [1, 0]])
    dist, _ = reach_probe(a, b, target, 500, seed=1)
    assert dist >= off > 0.1


@given(st.integers(min_value=-3, max_value=0))
def test_reach_budget_must_be_positive(budget):
    with pytest.raises(ValueError):
        reach_probe(a_star(), b_star(), HMatrix.identity(2), budget, seed=0)
