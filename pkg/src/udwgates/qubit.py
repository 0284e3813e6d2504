"""Projector/Pauli algebra for qubits and the ideal two-qubit composites.

Every gate is assembled from sums of basis projectors, e.g. the CNOT is
``sum_mu P^mu_z (x) X^{(1 - mu)/2}``, and only then materialized as a matrix.
The field-mediated gates in :mod:`udwgates.gates` reuse the same projectors
with field exponentials in place of the Pauli powers.

Ordering convention: the leftmost ket symbol is factor 0, the most
significant bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numerics import Operator, kron

AXES = ("x", "y", "z")
SIGNS = (+1, -1)

_S2 = 1 / np.sqrt(2)
_BASIS = {
    ("z", +1): np.array([1, 0], dtype=complex),
    ("z", -1): np.array([0, 1], dtype=complex),
    ("x", +1): np.array([_S2, _S2], dtype=complex),
    ("x", -1): np.array([_S2, -_S2], dtype=complex),
    ("y", +1): np.array([_S2, 1j * _S2], dtype=complex),
    ("y", -1): np.array([_S2, -1j * _S2], dtype=complex),
}


def _check_axis(axis: str) -> str:
    axis = axis.lower()
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}")
    return axis


def basis_ket(axis: str, sign: int) -> np.ndarray:
    """Unit-normalized eigenket of the ``axis`` Pauli with eigenvalue ``sign``."""
    return _BASIS[(_check_axis(axis), int(sign))].copy()


@dataclass(frozen=True)
class Projector:
    axis: str
    sign: int

    def __post_init__(self):
        object.__setattr__(self, "axis", _check_axis(self.axis))
        if self.sign not in SIGNS:
            raise ValueError("sign must be +1 or -1")

    @property
    def matrix(self) -> np.ndarray:
        v = _BASIS[(self.axis, self.sign)]
        return np.outer(v, v.conj())


def projector(axis: str, sign: int) -> Operator:
    return Operator(Projector(axis, sign).matrix, (2,))


def pauli(axis: str) -> Operator:
    """Pauli matrix built as ``sum_mu mu P^mu_axis``."""
    axis = _check_axis(axis)
    return Operator(sum(mu * Projector(axis, mu).matrix for mu in SIGNS), (2,))


def _power(op: np.ndarray, n: int) -> np.ndarray:
    return np.linalg.matrix_power(op, n)


@lru_cache(maxsize=None)
def _cnot(control_basis: str) -> np.ndarray:
    # z-control: sum P^mu_z (x) X^{(1-mu)/2}; x-control: sum P^mu_x (x) Z^{(1-mu)/2}
    if control_basis == "z":
        ctrl, target = "z", pauli("x").data
    elif control_basis == "x":
        ctrl, target = "x", pauli("z").data
    else:
        raise ValueError("control_basis must be 'z' or 'x'")
    return sum(np.kron(Projector(ctrl, mu).matrix, _power(target, (1 - mu) // 2)) for mu in SIGNS)


def cnot(control_basis: str = "z") -> Operator:
    """Projector-form CNOT.

    ``"z"`` gives CNOT(1,2) (control factor 0, target factor 1).  ``"x"`` gives
    the alternative projector form ``|+><+| (x) 1 + |-><-| (x) Z``, which is
    CNOT(2,1): control factor 1, target factor 0.
    """
    return Operator(_cnot(control_basis), (2, 2))


def qst_gate() -> Operator:
    """State transfer from factor 0 to factor 1.

    In time order CNOT(1,2) is applied first and CNOT(2,1) second, so the
    operator product is ``cnot('x') @ cnot('z')``.  On ``|a>|0>`` it yields
    ``|0>|a>``.
    """
    return cnot("x") @ cnot("z")


def swap_gate() -> Operator:
    """CNOT(2,1) CNOT(1,2) CNOT(2,1)."""
    cx = cnot("x")
    return cx @ cnot("z") @ cx


def single_qubit_gate(name: str) -> Operator:
    name = name.upper()
    if name == "H":
        return Operator((pauli("x").data + pauli("z").data) * _S2, (2,))
    if name == "S":
        return Operator(np.diag([1, 1j]), (2,))
    if name == "T":
        return Operator(np.diag([1, np.exp(1j * np.pi / 4)]), (2,))
    if name in ("X", "Y", "Z"):
        return pauli(name)
    if name == "I":
        return Operator(np.eye(2), (2,))
    raise ValueError(f"unknown single-qubit gate {name!r}")


def embed(op: np.ndarray, targets: tuple[int, ...], n_qubits: int) -> np.ndarray:
    """Lift an operator on ``targets`` (in the given order) to ``n_qubits`` qubits."""
    op = np.asarray(op, dtype=complex)
    k = len(targets)
    if op.shape != (2**k, 2**k):
        raise ValueError("operator size does not match number of targets")
    if len(set(targets)) != k or any(t < 0 or t >= n_qubits for t in targets):
        raise ValueError(f"bad targets {targets}")
    rest = [q for q in range(n_qubits) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest)))
    # full acts on (targets..., rest...); permute to natural order
    order = list(targets) + rest
    perm = np.argsort(order)
    t = full.reshape([2] * (2 * n_qubits))
    t = t.transpose(list(perm) + [n_qubits + p for p in perm])
    return t.reshape(2**n_qubits, 2**n_qubits)


def is_unitary(u, atol: float = 1e-12) -> bool:
    u = np.asarray(u)
    return bool(np.allclose(u @ u.conj().T, np.eye(u.shape[0]), rtol=0, atol=atol))


__all__ = [
    "AXES",
    "Projector",
    "basis_ket",
    "cnot",
    "embed",
    "is_unitary",
    "kron",
    "pauli",
    "projector",
    "qst_gate",
    "single_qubit_gate",
    "swap_gate",
]
