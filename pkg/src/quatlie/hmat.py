"""Quaternionic matrices, the complex adjoint representation and exp.

An ``HMatrix`` wraps an ``(n, n, 4)`` float array; entry ``[r, s]`` holds the
coordinates (w, x, y, z) of a quaternion. The complex adjoint sends the entry
q = z1 + z2 j (z1 = w + xi, z2 = y + zi) to the 2x2 block
``[[z1, z2], [-conj(z2), conj(z1)]]``; it is an injective real-algebra
homomorphism into 2n x 2n complex matrices and carries the determinant,
inverse and exponential.

Positional arguments that name matrix entries are 0-based.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .quaternion import MULT_TABLE, Quaternion, _coerce, qconj_array, qmul_array

# Allowed relative deviation of a complex matrix from the adjoint image
# before a pull-back is refused.
ADJOINT_SYMMETRY_TOL = 1e-8


def qmatmul(a, b):
    """Product of quaternionic arrays of shape (..., m, k, 4) and (..., k, l, 4)."""
    return np.einsum("...ija,...jkb,abc->...ikc", a, b, MULT_TABLE, optimize=True)


def adjoint_array(a):
    """Complex adjoint of a (..., m, k, 4) array, shape (..., 2m, 2k)."""
    a = np.asarray(a, dtype=float)
    *lead, m, k, _ = a.shape
    z1 = a[..., 0] + 1j * a[..., 1]
    z2 = a[..., 2] + 1j * a[..., 3]
    out = np.empty((*lead, 2 * m, 2 * k), dtype=complex)
    out[..., 0::2, 0::2] = z1
    out[..., 0::2, 1::2] = z2
    out[..., 1::2, 0::2] = -np.conj(z2)
    out[..., 1::2, 1::2] = np.conj(z1)
    return out


def adjoint_symmetry_residual(c):
    """Relative distance of ``c`` from the image of the complex adjoint."""
    c = np.asarray(c)
    a = c[..., 0::2, 0::2] - np.conj(c[..., 1::2, 1::2])
    b = c[..., 0::2, 1::2] + np.conj(c[..., 1::2, 0::2])
    scale = max(float(np.linalg.norm(c)), np.finfo(float).tiny)
    return float(np.sqrt(np.linalg.norm(a) ** 2 + np.linalg.norm(b) ** 2)) / scale


def pullback_array(c):
    """Inverse of :func:`adjoint_array` (orthogonal projection onto its image)."""
    c = np.asarray(c)
    z1 = 0.5 * (c[..., 0::2, 0::2] + np.conj(c[..., 1::2, 1::2]))
    z2 = 0.5 * (c[..., 0::2, 1::2] - np.conj(c[..., 1::2, 0::2]))
    return np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1)


def hconj_transpose_array(a):
    return qconj_array(np.swapaxes(np.asarray(a, dtype=float), -3, -2))


class HMatrix:
    """Square quaternionic matrix."""

    __slots__ = ("data",)

    def __init__(self, data):
        data = np.array(data, dtype=float)
        if data.ndim != 3 or data.shape[0] != data.shape[1] or data.shape[2] != 4:
            raise ValueError(f"expected an (n, n, 4) array, got shape {data.shape}")
        if data.shape[0] < 1:
            raise ValueError("matrix size must be at least 1")
        self.data = data

    @property
    def n(self) -> int:
        return self.data.shape[0]

    # construction
    @classmethod
    def zeros(cls, n: int) -> "HMatrix":
        return cls(np.zeros((n, n, 4)))

    @classmethod
    def identity(cls, n: int) -> "HMatrix":
        data = np.zeros((n, n, 4))
        data[np.arange(n), np.arange(n), 0] = 1.0
        return cls(data)

    @classmethod
    def unit(cls, n: int, r: int, s: int, q=1.0) -> "HMatrix":
        """Matrix with the single entry q at (r, s)."""
        data = np.zeros((n, n, 4))
        data[r, s] = _coerce(q).to_array()
        return cls(data)

    @classmethod
    def diag(cls, entries) -> "HMatrix":
        entries = [_coerce(e) for e in entries]
        data = np.zeros((len(entries), len(entries), 4))
        for r, e in enumerate(entries):
            data[r, r] = e.to_array()
        return cls(data)

    @classmethod
    def from_complex(cls, z1, z2=None) -> "HMatrix":
        """Build Z1 + Z2 j from complex n x n matrices."""
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.zeros_like(z1) if z2 is None else np.asarray(z2, dtype=complex)
        return cls(np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1))

    @classmethod
    def from_entries(cls, rows) -> "HMatrix":
        return cls(np.array([[_coerce(q).to_array() for q in row] for row in rows]))

    # element access
    def __getitem__(self, idx) -> Quaternion:
        r, s = idx
        return Quaternion.from_array(self.data[r, s])

    def with_entry(self, r: int, s: int, q) -> "HMatrix":
        data = self.data.copy()
        data[r, s] = _coerce(q).to_array()
        return HMatrix(data)

    # arithmetic
    def __add__(self, other):
        return HMatrix(self.data + _as_data(other))

    def __sub__(self, other):
        return HMatrix(self.data - _as_data(other))

    def __neg__(self):
        return HMatrix(-self.data)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return HMatrix(self.data * float(other))
        if isinstance(other, (Quaternion, complex)):
            return HMatrix(qmul_array(self.data, _coerce(other).to_array()))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return HMatrix(self.data * float(other))
        if isinstance(other, (Quaternion, complex)):
            return HMatrix(qmul_array(_coerce(other).to_array(), self.data))
        return NotImplemented

    def __truediv__(self, other):
        return self * (1.0 / float(other))

    def __matmul__(self, other):
        other = _as_data(other)
        if other.shape[0] != self.n:
            raise ValueError(f"size mismatch: {self.n} vs {other.shape[0]}")
        if other.shape[:2] == (self.n, self.n):
            return HMatrix(qmatmul(self.data, other))
        return qmatmul(self.data, other)

    def __eq__(self, other):
        return isinstance(other, HMatrix) and np.array_equal(self.data, other.data)

    __hash__ = None

    def __repr__(self):
        return f"HMatrix(n={self.n}, data={self.data.tolist()!r})"

    # structure
    def conj_transpose(self) -> "HMatrix":
        return HMatrix(hconj_transpose_array(self.data))

    def trace(self) -> Quaternion:
        return Quaternion.from_array(np.einsum("iic->c", self.data))

    def norm(self) -> float:
        """Frobenius norm, sum of squared entry moduli."""
        return float(np.linalg.norm(self.data))

    def is_diagonal(self, tol: float = 0.0) -> bool:
        off = self.data.copy()
        off[np.arange(self.n), np.arange(self.n)] = 0.0
        return float(np.abs(off).max(initial=0.0)) <= tol * max(self.norm(), 1.0)

    def is_algebra_element(self, tol: float = 1e-12) -> bool:
        return abs(self.trace().w) <= tol * max(self.norm(), 1.0)

    def inv(self) -> "HMatrix":
        c = complex_adjoint(self)
        if np.linalg.cond(c) > 1e14:
            raise np.linalg.LinAlgError("matrix is numerically singular")
        return from_complex_adjoint(np.linalg.inv(c))

    def allclose(self, other, atol: float = 1e-10) -> bool:
        return bool(np.allclose(self.data, _as_data(other), rtol=0.0, atol=atol))

    # serialization
    def to_json(self) -> dict:
        return {"n": self.n, "entries": self.data.tolist()}

    @classmethod
    def from_json(cls, obj) -> "HMatrix":
        try:
            n = int(obj["n"])
            entries = obj["entries"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"HMatrix JSON needs 'n' and 'entries': {exc}") from None
        data = np.array(entries, dtype=float)
        if data.shape != (n, n, 4):
            raise ValueError(f"entries have shape {data.shape}, expected {(n, n, 4)}")
        return cls(data)


def _as_data(x) -> np.ndarray:
    if isinstance(x, HMatrix):
        return x.data
    return np.asarray(x, dtype=float)


def bracket(x: HMatrix, y: HMatrix) -> HMatrix:
    if x.n != y.n:
        raise ValueError(f"size mismatch: {x.n} vs {y.n}")
    return HMatrix(qmatmul(x.data, y.data) - qmatmul(y.data, x.data))


def complex_adjoint(m: HMatrix) -> np.ndarray:
    return adjoint_array(m.data)


def from_complex_adjoint(c, tol: float = ADJOINT_SYMMETRY_TOL) -> HMatrix:
    """Recover the quaternionic matrix whose complex adjoint is ``c``."""
    residual = adjoint_symmetry_residual(c)
    if residual > tol:
        raise ValueError(f"matrix is not a complex adjoint image (residual {residual:.2e})")
    return HMatrix(pullback_array(c))


def study_det_abs(g: HMatrix) -> float:
    """|det g|: square root of the (real, nonnegative) determinant of the adjoint."""
    c = complex_adjoint(g)
    sign, logabs = np.linalg.slogdet(c)
    if sign == 0:
        return 0.0
    err = abs(sign.imag)
    if err > 1e-10 or sign.real < 0:
        # LU rounding moves the phase by roughly dim * eps * cond; allow that much
        cond = np.linalg.cond(c)
        allowed = max(1e-10, 64 * c.shape[0] * np.finfo(float).eps * cond)
        if err > allowed or sign.real < 0:
            raise ArithmeticError(
                f"adjoint determinant has phase {sign}, expected 1 (condition number {cond:.3g})"
            )
    return float(np.exp(0.5 * logabs))


def renormalize(g: HMatrix) -> HMatrix:
    """Rescale g so that |det g| = 1."""
    d = study_det_abs(g)
    if d == 0.0:
        raise np.linalg.LinAlgError("cannot renormalize a singular matrix")
    return g * d ** (-1.0 / g.n)


def hexp(x: HMatrix) -> HMatrix:
    """Group exponential, via scaling and squaring on the complex adjoint."""
    c = scipy.linalg.expm(complex_adjoint(x))
    if not np.all(np.isfinite(c)):
        raise OverflowError("matrix exponential overflowed")
    return from_complex_adjoint(c)


def vectorize(x: HMatrix) -> np.ndarray:
    """Real coordinates, row-major over entries then (1, i, j, k)."""
    return x.data.reshape(-1).copy()


def unvectorize(v, n: int) -> HMatrix:
    v = np.asarray(v, dtype=float)
    if v.shape != (4 * n * n,):
        raise ValueError(f"expected a vector of length {4 * n * n}, got shape {v.shape}")
    return HMatrix(v.reshape(n, n, 4))


def sl_dim(n: int) -> int:
    return 4 * n * n - 1


def _trace_free_real_diagonals(n: int, orthonormal: bool) -> list[np.ndarray]:
    out = []
    for k in range(1, n):
        d = np.zeros(n)
        if orthonormal:
            # Helmert contrasts
            d[:k] = 1.0
            d[k] = -k
            d /= np.sqrt(k * (k + 1))
        else:
            d[k - 1], d[k] = 1.0, -1.0
        out.append(d)
    return out


def sl_basis(n: int, orthonormal: bool = False) -> list[HMatrix]:
    """Basis of sl(n, H).

    Unit quaternions at every off-diagonal entry, the imaginary units on the
    diagonal, then n - 1 real trace-free diagonals (E_rr - E_{r+1,r+1}, or an
    orthonormal Helmert basis when ``orthonormal``).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    basis = []
    for r in range(n):
        for s in range(n):
            for c in range(1 if r == s else 0, 4):
                data = np.zeros((n, n, 4))
                data[r, s, c] = 1.0
                basis.append(HMatrix(data))
    for d in _trace_free_real_diagonals(n, orthonormal):
        data = np.zeros((n, n, 4))
        data[np.arange(n), np.arange(n), 0] = d
        basis.append(HMatrix(data))
    return basis


def sl2_block_basis(n: int, r: int, s: int) -> list[HMatrix]:
    """The 15 basis elements of the copy of sl(2, H) on rows/columns {r, s}."""
    if r == s or not (0 <= r < n and 0 <= s < n):
        raise ValueError(f"need distinct indices in [0, {n}), got {r}, {s}")
    basis = []
    for a in (r, s):
        for b in (r, s):
            for c in range(1 if a == b else 0, 4):
                data = np.zeros((n, n, 4))
                data[a, b, c] = 1.0
                basis.append(HMatrix(data))
    data = np.zeros((n, n, 4))
    data[r, r, 0], data[s, s, 0] = 1.0, -1.0
    basis.append(HMatrix(data))
    return basis


def random_algebra_element(n: int, seed=None) -> HMatrix:
    """Standard Gaussian element of sl(n, H) in orthonormal coordinates."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    basis = np.stack([b.data for b in sl_basis(n, orthonormal=True)])
    coeffs = rng.standard_normal(len(basis))
    return HMatrix(np.tensordot(coeffs, basis, axes=1))


def random_group_element(n: int, seed=None, scale: float = 0.3) -> HMatrix:
    """hexp of a scaled Gaussian algebra element; lies in Sl(n, H)."""
    return hexp(random_algebra_element(n, seed) * scale)
