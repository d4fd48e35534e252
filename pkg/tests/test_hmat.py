import itertools
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given

from quatlie.hmat import (
    HMatrix,
    adjoint_symmetry_residual,
    bracket,
    complex_adjoint,
    from_complex_adjoint,
    hexp,
    random_algebra_element,
    random_group_element,
    renormalize,
    sl2_block_basis,
    sl_basis,
    sl_dim,
    study_det_abs,
    unvectorize,
    vectorize,
)
from quatlie.quaternion import I, J, K, Quaternion

from conftest import quaternions, seeds


def rand_hmat(n, rng, scale=1.0):
    return HMatrix(scale * rng.standard_normal((n, n, 4)))


def leibniz_det(m):
    """Determinant by permutation expansion (small matrices only)."""
    n = m.shape[0]
    total = 0j
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        term = (-1) ** inversions
        for r in range(n):
            term = term * m[r, perm[r]]
        total += term
    return total


# --- construction and arithmetic -----------------------------------------------


def test_identity_and_units():
    e = HMatrix.identity(3)
    assert e[1, 1] == Quaternion(1) and e[0, 1] == Quaternion()
    u = HMatrix.unit(2, 0, 1, J)
    assert u[0, 1] == J and u.norm() == 1.0


def test_bracket_examples():
    x = HMatrix.unit(2, 0, 1, I)
    y = HMatrix.unit(2, 1, 0, J)
    assert bracket(x, y) == HMatrix.diag([K, K])
    assert bracket(x, x) == HMatrix.zeros(2)
    q = Quaternion(0.5, -1, 2, 3)
    got = bracket(HMatrix.diag([1, -1]), HMatrix.unit(2, 0, 1, q))
    assert got.allclose(HMatrix.unit(2, 0, 1, q * 2.0))


def test_bracket_size_mismatch():
    with pytest.raises(ValueError):
        bracket(HMatrix.zeros(2), HMatrix.zeros(3))


@given(seeds)
def test_bracket_is_trace_free(seed):
    rng = np.random.default_rng(seed)
    for n in (1, 2, 3):
        x, y = rand_hmat(n, rng), rand_hmat(n, rng)
        c = bracket(x, y)
        assert abs(c.trace().w) <= 1e-12 * max(1.0, x.norm() * y.norm())


@given(seeds)
def test_product_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rand_hmat(3, rng) for _ in range(3))
    lhs, rhs = (a @ b) @ c, a @ (b @ c)
    assert (lhs - rhs).norm() <= 1e-10 * lhs.norm()


def test_quaternion_scalars_act_on_correct_side():
    m = HMatrix.unit(1, 0, 0, I)
    assert (m * J)[0, 0] == K
    assert (J * m)[0, 0] == -K


def test_inverse_and_singular():
    rng = np.random.default_rng(3)
    g = rand_hmat(3, rng)
    assert (g @ g.inv()).allclose(HMatrix.identity(3), atol=1e-10)
    with pytest.raises(np.linalg.LinAlgError):
        HMatrix.zeros(2).inv()


def test_json_round_trip_and_errors():
    rng = np.random.default_rng(0)
    m = rand_hmat(2, rng)
    assert HMatrix.from_json(m.to_json()) == m
    with pytest.raises(ValueError):
        HMatrix.from_json({"n": 3, "entries": m.to_json()["entries"]})
    with pytest.raises(ValueError):
        HMatrix.from_json({"entries": []})


# --- complex adjoint -----------------------------------------------------------


def test_adjoint_examples():
    assert np.array_equal(complex_adjoint(HMatrix.identity(1)), np.eye(2))
    assert np.array_equal(complex_adjoint(HMatrix.diag([J])), [[0, 1], [-1, 0]])
    assert np.array_equal(complex_adjoint(HMatrix.diag([I])), [[1j, 0], [0, -1j]])


@given(seeds)
def test_adjoint_is_multiplicative(seed):
    rng = np.random.default_rng(seed)
    m, n = rand_hmat(3, rng), rand_hmat(3, rng)
    lhs = complex_adjoint(m @ n)
    rhs = complex_adjoint(m) @ complex_adjoint(n)
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(lhs)


@given(seeds)
def test_adjoint_intertwines_bracket(seed):
    rng = np.random.default_rng(seed)
    x, y = rand_hmat(2, rng), rand_hmat(2, rng)
    cx, cy = complex_adjoint(x), complex_adjoint(y)
    lhs = complex_adjoint(bracket(x, y))
    assert np.linalg.norm(lhs - (cx @ cy - cy @ cx)) <= 1e-10 * max(1.0, np.linalg.norm(lhs))


def test_adjoint_image_symmetry_and_pullback():
    rng = np.random.default_rng(1)
    m = rand_hmat(3, rng)
    c = complex_adjoint(m)
    jmat = np.kron(np.eye(3), np.array([[0, 1], [-1, 0]]))
    assert np.allclose(jmat @ c.conj() @ np.linalg.inv(jmat), c)
    assert adjoint_symmetry_residual(c) < 1e-15
    assert from_complex_adjoint(c) == m
    with pytest.raises(ValueError):
        from_complex_adjoint(np.eye(2) * 1j + np.array([[0, 0], [0, 2j]]))


# --- Study determinant ---------------------------------------------------------


@given(quaternions)
def test_det_of_single_quaternion_is_modulus(q):
    # rescale first so the squares in the oracle cannot underflow
    s = max(abs(c) for c in q.to_array()) or 1.0
    z1, z2 = complex(q.w, q.x) / s, complex(q.y, q.z) / s
    brute = s * math.sqrt(abs(z1) ** 2 + abs(z2) ** 2)
    assert math.isclose(study_det_abs(HMatrix.diag([q])), brute, rel_tol=1e-12, abs_tol=1e-300)


def test_det_matches_leibniz_expansion(rng):
    for _ in range(100):
        g = rand_hmat(2, rng)
        d = leibniz_det(complex_adjoint(g))
        assert abs(d.imag) <= 1e-10 * abs(d) and d.real >= 0
        assert math.isclose(study_det_abs(g), math.sqrt(d.real), rel_tol=1e-10)


@given(seeds)
def test_det_multiplicative(seed):
    rng = np.random.default_rng(seed)
    g, h = rand_hmat(3, rng), rand_hmat(3, rng)
    assert math.isclose(study_det_abs(g @ h), study_det_abs(g) * study_det_abs(h), rel_tol=1e-10)


@given(seeds)
def test_exp_of_algebra_element_has_unit_det(seed):
    x = random_algebra_element(3, seed)
    assert abs(study_det_abs(hexp(x)) - 1.0) < 1e-10


def test_renormalize():
    rng = np.random.default_rng(2)
    g = rand_hmat(3, rng)
    assert abs(study_det_abs(renormalize(g)) - 1.0) < 1e-12
    with pytest.raises(np.linalg.LinAlgError):
        renormalize(HMatrix.zeros(2))


# --- exponential ---------------------------------------------------------------


def test_exp_examples():
    assert hexp(HMatrix.zeros(3)).allclose(HMatrix.identity(3), atol=0)
    g = hexp(HMatrix.diag([Quaternion(0, math.pi / 2), 0, 0]))
    assert g[0, 0].isclose(I) and g[1, 1].isclose(Quaternion(1))
    t = 0.7
    g = hexp(HMatrix.diag([t, -t]))
    assert g.allclose(HMatrix.diag([math.exp(t), math.exp(-t)]), atol=1e-14)


@given(seeds)
def test_exp_matches_complex_expm_and_inverts(seed):
    x = random_algebra_element(3, seed)
    ref = scipy.linalg.expm(complex_adjoint(x))
    g = hexp(x)
    assert np.linalg.norm(complex_adjoint(g) - ref) <= 1e-12 * np.linalg.norm(ref)
    assert (g @ hexp(-x)).allclose(HMatrix.identity(3), atol=1e-10)


def test_exp_on_cartan_is_entrywise(rng):
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    z -= z.real.mean()
    g = hexp(HMatrix.from_complex(np.diag(z)))
    assert g.allclose(HMatrix.from_complex(np.diag(np.exp(z))), atol=1e-12)


# --- coordinates and bases -----------------------------------------------------


def test_vectorize_examples():
    assert not vectorize(HMatrix.zeros(2)).any()
    assert list(vectorize(HMatrix.identity(1))) == [1, 0, 0, 0]
    v = vectorize(HMatrix.unit(2, 0, 1, J))
    assert v.shape == (16,) and v[6] == 1 and v.sum() == 1


@given(seeds)
def test_vectorize_round_trip(seed):
    rng = np.random.default_rng(seed)
    m = rand_hmat(3, rng)
    assert unvectorize(vectorize(m), 3) == m


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_algebra_dimension(n):
    # the trace-free constraint Re tr = 0 has rank exactly 1
    constraint = vectorize(HMatrix.identity(n))[None, :]
    assert np.linalg.matrix_rank(constraint) == 1
    assert sl_dim(n) == 4 * n * n - 1
    basis = np.stack([vectorize(b) for b in sl_basis(n)])
    assert np.linalg.matrix_rank(basis) == sl_dim(n)
    assert np.allclose(basis @ constraint[0], 0)
    ortho = np.stack([vectorize(b) for b in sl_basis(n, orthonormal=True)])
    assert np.allclose(ortho @ ortho.T, np.eye(sl_dim(n)))


def test_block_basis():
    blk = sl2_block_basis(4, 1, 3)
    assert len(blk) == 15
    v = np.stack([vectorize(b) for b in blk])
    assert np.linalg.matrix_rank(v) == 15
    assert all(b.is_algebra_element() for b in blk)
    with pytest.raises(ValueError):
        sl2_block_basis(3, 1, 1)


def test_random_algebra_element():
    x = random_algebra_element(3, 5)
    assert abs(x.trace().w) < 1e-12
    assert random_algebra_element(3, 5) == x
    with pytest.raises(ValueError):
        random_algebra_element(0, 1)


def test_random_algebra_element_coordinate_variance():
    rng = np.random.default_rng(11)
    basis = np.stack([vectorize(b) for b in sl_basis(2, orthonormal=True)])
    coords = np.stack([basis @ vectorize(random_algebra_element(2, rng)) for _ in range(10_000)])
    var = coords.var(axis=0)
    assert np.all((var > 0.9) & (var < 1.1))


def test_random_group_element_is_in_group():
    g = random_group_element(3, 4)
    assert abs(study_det_abs(g) - 1.0) < 1e-12
