"""Quaternion arithmetic and the {1,i} / {j,k} splitting of H.

Quaternions are stored as (w, x, y, z), the coefficients of 1, i, j, k.
Array helpers operate on the trailing axis of length 4 so that matrices of
quaternions can be handled as ``(..., 4)`` float arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-9

# MULT_TABLE[a, b, c]: coefficient of basis element c in e_a * e_b, basis (1, i, j, k)
MULT_TABLE = np.zeros((4, 4, 4))
for _a, _b, _c, _s in [
    (0, 0, 0, 1), (0, 1, 1, 1), (0, 2, 2, 1), (0, 3, 3, 1),
    (1, 0, 1, 1), (1, 1, 0, -1), (1, 2, 3, 1), (1, 3, 2, -1),
    (2, 0, 2, 1), (2, 1, 3, -1), (2, 2, 0, -1), (2, 3, 1, 1),
    (3, 0, 3, 1), (3, 1, 2, 1), (3, 2, 1, -1), (3, 3, 0, -1),
]:
    MULT_TABLE[_a, _b, _c] = _s

_CONJ_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])


def qmul_array(p, q):
    """Hamilton product of broadcastable ``(..., 4)`` arrays."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def qconj_array(q):
    return np.asarray(q, dtype=float) * _CONJ_SIGNS


@dataclass(frozen=True)
class Quaternion:
    """An element w + xi + yj + zk of H."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        w, x, y, z = (float(c) for c in np.asarray(arr, dtype=float).reshape(4))
        return cls(w, x, y, z)

    @classmethod
    def from_complex(cls, z1: complex, z2: complex = 0.0) -> "Quaternion":
        """Build z1 + z2*j from two complex numbers."""
        z1, z2 = complex(z1), complex(z2)
        return cls(z1.real, z1.imag, z2.real, z2.imag)

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def to_json(self) -> list:
        return [self.w, self.x, self.y, self.z]

    @classmethod
    def from_json(cls, data) -> "Quaternion":
        if len(data) != 4:
            raise ValueError(f"quaternion needs 4 coordinates, got {len(data)}")
        return cls.from_array(data)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return self.w**2 + self.x**2 + self.y**2 + self.z**2

    def norm(self) -> float:
        # hypot avoids underflow of the squares for tiny coordinates
        return math.hypot(self.w, self.x, self.y, self.z)

    def inverse(self) -> "Quaternion":
        n2 = self.norm2()
        if n2 == 0.0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return self.conj() * (1.0 / n2)

    def __add__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        other = _coerce(other)
        return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __sub__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return self + (-_coerce(other))

    def __rsub__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            other = float(other)
            return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)
        if not _is_scalar(other):
            return NotImplemented
        return qmul(self, _coerce(other))

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * other
        if not _is_scalar(other):
            return NotImplemented
        return qmul(_coerce(other), self)

    def __truediv__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * (1.0 / other)
        return self * _coerce(other).inverse()

    def __abs__(self):
        return self.norm()

    def isclose(self, other, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.to_array(), _coerce(other).to_array(), rtol=0.0, atol=atol))

    def __repr__(self):
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


def _is_scalar(value) -> bool:
    """Values that arithmetic treats as quaternions (numbers or quaternions)."""
    return isinstance(value, (Quaternion, complex, int, float, np.floating, np.integer))


def _coerce(value) -> Quaternion:
    if isinstance(value, Quaternion):
        return value
    if isinstance(value, complex):
        return Quaternion(value.real, value.imag, 0.0, 0.0)
    if isinstance(value, (int, float, np.floating, np.integer)):
        return Quaternion(float(value))
    return Quaternion.from_array(value)


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def qmul(p: Quaternion, q: Quaternion) -> Quaternion:
    return Quaternion.from_array(qmul_array(p.to_array(), q.to_array()))


def split(q: Quaternion) -> tuple[Quaternion, Quaternion]:
    """Project q onto span{1, i} and span{j, k}."""
    return Quaternion(q.w, q.x, 0.0, 0.0), Quaternion(0.0, 0.0, q.y, q.z)


def in_forbidden_union(q: Quaternion, tol: float = DEFAULT_TOL) -> bool:
    """True if q lies (to relative tolerance) in span{1,i} or in span{j,k}.

    The zero quaternion counts as a member.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    q = _coerce(q)
    size = q.norm()
    if size == 0.0:
        return True
    part_1i, part_jk = split(q)
    return part_1i.norm() <= tol * size or part_jk.norm() <= tol * size


def exp_i(t: float) -> Quaternion:
    return Quaternion(math.cos(t), math.sin(t))


def circle_conjugate(t: float, s: float, q: Quaternion) -> Quaternion:
    """Return e^{it} q e^{-is}."""
    return exp_i(t) * _coerce(q) * exp_i(-s)


def tangent_pair(q: Quaternion, rtol: float = DEFAULT_TOL) -> tuple[Quaternion, Quaternion, bool]:
    """Tangent vectors iq and -qi of the torus orbit through q.

    ``independent`` reports whether the two are linearly independent over R,
    judged by the ratio of singular values of the 2x4 coordinate matrix.
    """
    q = _coerce(q)
    v1 = I * q
    v2 = -(q * I)
    sv = np.linalg.svd(np.vstack([v1.to_array(), v2.to_array()]), compute_uv=False)
    independent = bool(sv[0] > 0 and sv[1] > rtol * sv[0])
    return v1, v2, independent
