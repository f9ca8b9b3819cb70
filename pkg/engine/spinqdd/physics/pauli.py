"""Pauli-basis algebra of 2x2 matrix symbols.

An element a0*sigma0 + a.sigma is stored as a complex array of shape
``(4, ...)``: index 0 is the sigma0 coefficient, 1..3 the spin vector. Any
trailing axes are grid axes, so every operation here is vectorized over
x-grids, p-grids or batches of random samples alike.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

Scalar = Union[complex, float, np.ndarray]

# Below this |a| the sinh(beta|a|)/|a| factor switches to its series
SERIES_THRESHOLD = 1e-8


@dataclass(frozen=True)
class PauliCoeffs:
    """One Pauli-algebra element, or a field of them."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim == 0 or data.shape[0] != 4:
            raise ValueError(f"Pauli coefficients need a leading axis of length 4, got shape {data.shape}")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_parts(cls, s: Scalar, v) -> "PauliCoeffs":
        s = np.asarray(s, dtype=complex)
        v = np.asarray(v, dtype=complex)
        shape = np.broadcast_shapes(s.shape, v.shape[1:])
        data = np.empty((4,) + shape, dtype=complex)
        data[0] = s
        data[1:] = v
        return cls(data)

    @classmethod
    def zeros(cls, shape=()) -> "PauliCoeffs":
        return cls(np.zeros((4,) + tuple(shape), dtype=complex))

    @classmethod
    def identity(cls, shape=()) -> "PauliCoeffs":
        return cls.sigma(0, shape)

    @classmethod
    def sigma(cls, j: int, shape=()) -> "PauliCoeffs":
        data = np.zeros((4,) + tuple(shape), dtype=complex)
        data[j] = 1.0
        return cls(data)

    @property
    def s(self) -> np.ndarray:
        return self.data[0]

    @property
    def v(self) -> np.ndarray:
        return self.data[1:]

    @property
    def shape(self):
        return self.data.shape[1:]

    def __add__(self, other: "PauliCoeffs") -> "PauliCoeffs":
        return PauliCoeffs(self.data + other.data)

    def __sub__(self, other: "PauliCoeffs") -> "PauliCoeffs":
        return PauliCoeffs(self.data - other.data)

    def __neg__(self) -> "PauliCoeffs":
        return PauliCoeffs(-self.data)

    def __mul__(self, factor: Scalar) -> "PauliCoeffs":
        return PauliCoeffs(self.data * factor)

    __rmul__ = __mul__

    def to_matrix(self) -> np.ndarray:
        """Explicit matrices with the 2x2 block on the two trailing axes."""
        s, v1, v2, v3 = self.data
        m = np.empty(self.shape + (2, 2), dtype=complex)
        m[..., 0, 0] = s + v3
        m[..., 0, 1] = v1 - 1j * v2
        m[..., 1, 0] = v1 + 1j * v2
        m[..., 1, 1] = s - v3
        return m

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "PauliCoeffs":
        m = np.asarray(m, dtype=complex)
        m00, m01, m10, m11 = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
        return cls(np.stack([(m00 + m11) / 2, (m01 + m10) / 2, (m10 - m01) / 2j, (m00 - m11) / 2]))

    def is_hermitian(self, tol: float = 1e-14) -> bool:
        return bool(np.all(np.abs(self.data.imag) < tol))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0


def pauli_mul(a: PauliCoeffs, b: PauliCoeffs) -> PauliCoeffs:
    """Product (a0 b0 + a.b, a0 b + b0 a + i a x b)."""
    s = a.s * b.s + np.einsum("i...,i...->...", a.v, b.v)
    v = a.s * b.v + b.s * a.v + 1j * np.cross(a.v, b.v, axisa=0, axisb=0, axisc=0)
    return PauliCoeffs.from_parts(s, v)


def pauli_trace_inner(a: PauliCoeffs, b: PauliCoeffs) -> np.ndarray:
    """tr(AB) = 2(a0 b0 + a.b)."""
    return 2.0 * (a.s * b.s + np.einsum("i...,i...->...", a.v, b.v))


def pauli_commutator(a: PauliCoeffs, b: PauliCoeffs) -> PauliCoeffs:
    return pauli_mul(a, b) - pauli_mul(b, a)


def exp_spin(beta: float, avec) -> PauliCoeffs:
    """exp(beta a.sigma) = cosh(beta|a|) sigma0 + sinh(beta|a|) (a/|a|).sigma for real a."""
    avec = np.asarray(avec, dtype=float)
    norm = np.sqrt(np.sum(avec**2, axis=0))
    small = norm < SERIES_THRESHOLD
    safe = np.where(small, 1.0, norm)
    ratio = np.where(small, beta * (1.0 + beta**2 * norm**2 / 6.0), np.sinh(beta * safe) / safe)
    return PauliCoeffs.from_parts(np.cosh(beta * norm), ratio * avec)
