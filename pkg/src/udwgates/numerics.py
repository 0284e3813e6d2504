"""Dense complex linear algebra used throughout the package.

Everything here is a pure function of immutable values.  Matrices are carried
as :class:`Operator`, a thin wrapper that remembers the tensor-factor layout so
that partial traces do not need the dimensions passed separately.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidStateError, NotHermitianError

ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix tagged with its tensor-factor dimensions."""

    data: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionMismatchError(f"operator must be square, got shape {data.shape}")
        dims = tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != data.shape[0]:
            raise DimensionMismatchError(f"factor dims {dims} do not multiply to {data.shape[0]}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.data.conj().T, self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def is_hermitian(self, atol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T), initial=0.0) <= atol)

    def allclose(self, other, atol: float = ATOL) -> bool:
        return bool(np.allclose(self.data, _data(other), rtol=0.0, atol=atol))

    def __matmul__(self, other):
        if isinstance(other, Operator):
            if other.dim != self.dim:
                raise DimensionMismatchError("operator dimensions differ")
            return Operator(self.data @ other.data, self.dims)
        return self.data @ np.asarray(other)

    def __add__(self, other):
        return Operator(self.data + _data(other), self.dims)

    def __sub__(self, other):
        return Operator(self.data - _data(other), self.dims)

    def __mul__(self, scalar):
        return Operator(self.data * scalar, self.dims)

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(-self.data, self.dims)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    def __repr__(self):
        return f"Operator(dims={self.dims})"


def _data(x) -> np.ndarray:
    return x.data if isinstance(x, Operator) else np.asarray(x, dtype=complex)


def as_operator(x, dims: Sequence[int] | None = None) -> Operator:
    """Wrap an array (or pass an Operator through).  Kets become projectors."""
    if isinstance(x, Operator):
        return x if dims is None else Operator(x.data, tuple(dims))
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 1:
        arr = np.outer(arr, arr.conj())
    return Operator(arr, tuple(dims) if dims is not None else (arr.shape[0],))


def identity(*dims: int) -> Operator:
    n = int(np.prod(dims)) if dims else 1
    return Operator(np.eye(n, dtype=complex), dims or (1,))


def kron(*ops) -> Operator:
    """Kronecker product; the factor layouts concatenate."""
    ops = [as_operator(o) for o in ops]
    if not ops:
        raise ValueError("kron needs at least one operand")
    data = reduce(np.kron, (o.data for o in ops))
    dims = sum((o.dims for o in ops), ())
    return Operator(data, dims)


def partial_trace(m, keep: Iterable[int], dims: Sequence[int] | None = None) -> Operator:
    """Trace out every factor not listed in ``keep``.

    The surviving factors stay in their original relative order.
    """
    op = as_operator(m, dims)
    dims = op.dims
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise IndexError(f"keep={keep} out of range for {n} factors")
    drop = [i for i in range(n) if i not in keep]
    t = op.data.reshape(dims + dims)
    order = keep + drop + [n + i for i in keep] + [n + i for i in drop]
    t = t.transpose(order)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    dd = int(np.prod([dims[i] for i in drop])) if drop else 1
    t = t.reshape(dk, dd, dk, dd)
    out = np.einsum("ajbj->ab", t)
    return Operator(out, tuple(dims[i] for i in keep) or (1,))


def _require_hermitian(h: np.ndarray, atol: float) -> None:
    err = np.max(np.abs(h - h.conj().T), initial=0.0)
    if err > atol:
        raise NotHermitianError(f"matrix deviates from Hermitian by {err:.3e}")


def herm_eig(h, atol: float = 1e-8) -> tuple[np.ndarray, Operator]:
    """Eigen-decomposition of a Hermitian operator, eigenvalues ascending."""
    op = as_operator(h)
    _require_hermitian(op.data, atol)
    herm = 0.5 * (op.data + op.data.conj().T)
    vals, vecs = np.linalg.eigh(herm)
    return vals, Operator(vecs, op.dims)


def expm_hermitian(h, scale: complex = 1j, atol: float = 1e-8) -> Operator:
    """Return ``exp(scale * h)`` for Hermitian ``h`` via its eigenbasis.

    With a purely imaginary ``scale`` the result is unitary to roundoff.
    """
    vals, vecs = herm_eig(h, atol)
    v = vecs.data
    return Operator((v * np.exp(scale * vals)) @ v.conj().T, vecs.dims)


# Name kept for parity with the public contract.
mat_exp_hermitian_generator = expm_hermitian


def trace_norm(m) -> float:
    """Sum of singular values."""
    a = _data(m)
    if np.allclose(a, a.conj().T, atol=1e-13, rtol=0):
        return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (a + a.conj().T)))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def check_density(rho, atol: float = 1e-10, psd_tol: float = 1e-9) -> Operator:
    """Validate a density operator and return it as an :class:`Operator`."""
    op = as_operator(rho)
    if not op.is_hermitian(atol):
        raise InvalidStateError("density operator is not Hermitian")
    tr = op.trace()
    if abs(tr - 1.0) > atol:
        raise InvalidStateError(f"density operator has trace {tr.real:.12g}")
    lmin = np.linalg.eigvalsh(0.5 * (op.data + op.data.conj().T))[0]
    if lmin < -psd_tol:
        raise InvalidStateError(f"density operator has eigenvalue {lmin:.3e}")
    return op


def von_neumann_entropy(rho, cutoff: float = 1e-12, validate: bool = True) -> float:
    """Entropy in bits; eigenvalues below ``cutoff`` contribute nothing."""
    op = check_density(rho, atol=1e-8, psd_tol=1e-8) if validate else as_operator(rho)
    p = np.linalg.eigvalsh(0.5 * (op.data + op.data.conj().T))
    p = p[p > cutoff]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def ket(*bits: int) -> np.ndarray:
    """Computational basis ket for a bit string, factor 0 most significant."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int("".join(str(b) for b in bits), 2) if bits else 0] = 1.0
    return v


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = rank or n
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
