"""Controlled-displacement gates between one qubit and the smeared field.

A gate is a product of *layers*; each layer is a sum of terms
``P (x) W`` with ``P`` a qubit projector (or the identity) and ``W`` an
ordered product of displacement words.  Layers are stored in operator order,
so ``layers[-1]`` acts first.  Keeping the layered form means the adjoint is
exact and cheap, and the Fock materialization never needs a dense matrix on
the joint qubit-field space.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from itertools import product
from typing import Sequence

import numpy as np

from .field import DisplacementWord, FieldCalibration, FockBackend, coherent_overlap, weyl_reduce
from .qubit import Projector, single_qubit_gate

_I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class GateTerm:
    """``(P_1 P_2 ...) (x) (W_1 W_2 ...)``, both factors in operator order."""

    projectors: tuple[Projector, ...]
    words: tuple[DisplacementWord, ...]

    @property
    def qubit_matrix(self) -> np.ndarray:
        return reduce(np.matmul, (p.matrix for p in self.projectors), _I2)

    def adjoint(self) -> "GateTerm":
        return GateTerm(self.projectors[::-1], tuple(w.inverse() for w in self.words[::-1]))

    def reduced_word(self, cal) -> DisplacementWord:
        return weyl_reduce(self.words, cal)

    def to_dict(self) -> dict:
        return {
            "projectors": [{"axis": p.axis, "sign": p.sign} for p in self.projectors],
            "words": [w.to_dict() for w in self.words],
        }


def _term(proj: tuple[str, int] | None, *words: DisplacementWord) -> GateTerm:
    projs = () if proj is None else (Projector(*proj),)
    return GateTerm(projs, tuple(words))


@dataclass(frozen=True)
class ControlledDisplacementGate:
    name: str
    layers: tuple[tuple[GateTerm, ...], ...]

    def adjoint(self) -> "ControlledDisplacementGate":
        name = self.name[:-1] if self.name.endswith("^") else self.name + "^"
        return ControlledDisplacementGate(
            name, tuple(tuple(t.adjoint() for t in layer) for layer in self.layers[::-1])
        )

    def terms(self) -> list[GateTerm]:
        """Fully expanded sum of product terms."""
        out = []
        for combo in product(*self.layers):
            projs = sum((t.projectors for t in combo), ())
            words = sum((t.words for t in combo), ())
            out.append(GateTerm(projs, words))
        return out

    def reduced_terms(self, cal) -> list[tuple[np.ndarray, DisplacementWord]]:
        return [(t.qubit_matrix, t.reduced_word(cal)) for t in self.terms()]

    def layer_orthogonality_residual(self) -> float:
        """Largest ``|P_i P_j|`` over distinct terms within any layer."""
        worst = 0.0
        for layer in self.layers:
            mats = [t.qubit_matrix for t in layer]
            for i in range(len(mats)):
                for j in range(len(mats)):
                    if i != j:
                        worst = max(worst, float(np.max(np.abs(mats[i] @ mats[j]))))
        return worst

    def layer_completeness_residual(self) -> float:
        """Largest deviation of ``sum_i P_i`` from the identity within any layer."""
        return max(
            float(np.max(np.abs(sum(t.qubit_matrix for t in layer) - _I2))) for layer in self.layers
        )

    def to_schedule(self) -> dict:
        return {"gate": self.name, "layers": [[t.to_dict() for t in layer] for layer in self.layers]}

    def to_json(self) -> str:
        return json.dumps(self.to_schedule(), sort_keys=True)


_phi, _pi = DisplacementWord.phi, DisplacementWord.pi


def _z_layer(word_of_sign) -> tuple[GateTerm, ...]:
    return tuple(_term(("z", mu), *word_of_sign(mu)) for mu in (+1, -1))


def _x_layer(word_of_sign) -> tuple[GateTerm, ...]:
    return tuple(_term(("x", mu), *word_of_sign(mu)) for mu in (+1, -1))


def u_zphi() -> ControlledDisplacementGate:
    """``sum_mu P_z^mu (x) e^{i mu phi}``."""
    return ControlledDisplacementGate("zphi", (_z_layer(lambda mu: (_phi(mu),)),))


def u_xpi() -> ControlledDisplacementGate:
    """``sum_mu P_x^mu (x) e^{i mu Pi}``."""
    return ControlledDisplacementGate("xpi", (_x_layer(lambda mu: (_pi(mu),)),))


def u_qst() -> ControlledDisplacementGate:
    """``sum P_x^mu P_z^mu' (x) e^{i mu Pi} e^{i mu' phi}``, stored as x-layer times z-layer."""
    return ControlledDisplacementGate("qst", u_xpi().layers + u_zphi().layers)


def u_zpix_phi() -> ControlledDisplacementGate:
    """``e^{-i Pi} sum P_z^mu P_x^mu' (x) e^{i mu Pi} e^{i mu' phi}``."""
    prefactor = (_term(None, _pi(-1.0)),)
    z_pi = _z_layer(lambda mu: (_pi(mu),))
    x_phi = _x_layer(lambda mu: (_phi(mu),))
    return ControlledDisplacementGate("zpix_phi", (prefactor, z_pi, x_phi))


def u_hadamard() -> ControlledDisplacementGate:
    """``sum_mu P_x^mu (x) e^{-i mu phi}``."""
    return ControlledDisplacementGate("hadamard", (_x_layer(lambda mu: (_phi(-mu),)),))


def u_s() -> ControlledDisplacementGate:
    """``sum_mu P_z^mu (x) e^{(1-mu) i Pi} e^{i phi}``."""
    return ControlledDisplacementGate("s", (_z_layer(lambda mu: (_pi(1 - mu), _phi(1.0))),))


def u_t() -> ControlledDisplacementGate:
    """``sum_mu P_z^mu (x) e^{(1-mu) i Pi / 2} e^{i phi}``."""
    return ControlledDisplacementGate("t", (_z_layer(lambda mu: (_pi((1 - mu) / 2), _phi(1.0))),))


GATES = {
    "qst": u_qst,
    "zphi": u_zphi,
    "xpi": u_xpi,
    "zpix_phi": u_zpix_phi,
    "hadamard": u_hadamard,
    "s": u_s,
    "t": u_t,
}


# ---------------------------------------------------------------------------
# Fock materialization


def apply_gate_fock(gate: ControlledDisplacementGate, backend: FockBackend, psi: np.ndarray,
                    qubit_axis: int) -> np.ndarray:
    """Apply ``gate`` to amplitudes ``psi`` whose last two axes are the field modes.

    ``qubit_axis`` selects the qubit (size-2 axis) the projectors act on.
    """
    psi = np.asarray(psi, dtype=complex)
    for layer in reversed(gate.layers):
        out = np.zeros_like(psi)
        for term in layer:
            branch = backend.apply(term.words, psi)
            if term.projectors:
                branch = np.moveaxis(
                    np.tensordot(term.qubit_matrix, branch, axes=([1], [qubit_axis])), 0, qubit_axis
                )
            out += branch
        psi = out
    return psi


def fock_matrix(gate: ControlledDisplacementGate, backend: FockBackend) -> np.ndarray:
    """Dense matrix on qubit (x) field; qubit is the slow index.  Small truncations only."""
    n1, n2 = backend.dims
    dim = 2 * n1 * n2
    basis = np.eye(dim, dtype=complex).T.reshape(dim, 2, n1, n2)
    cols = apply_gate_fock(gate, backend, basis, qubit_axis=1)
    return cols.reshape(dim, dim).T


def unitarity_residual(gate: ControlledDisplacementGate, backend: FockBackend, probes: int = 12,
                       rng: np.random.Generator | None = None, max_occupation: int | None = None) -> float:
    """Max entry of ``V^+ U^+ U V - I`` for an orthonormal probe set ``V``.

    Probes are drawn from the low-occupation block so the check is not
    dominated by the truncation edge.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    n1, n2 = backend.dims
    occ = max_occupation or max(2, backend.truncation // 2)
    raw = np.zeros((probes, 2, n1, n2), dtype=complex)
    shape = (probes, 2, min(occ, n1), min(occ, n2))
    raw[:, :, : shape[2], : shape[3]] = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    q, _ = np.linalg.qr(raw.reshape(probes, -1).T)
    v = q.T.reshape(probes, 2, n1, n2)
    out = apply_gate_fock(gate, backend, v, qubit_axis=1).reshape(probes, -1)
    gram = out.conj() @ out.T
    return float(np.max(np.abs(gram - np.eye(probes))))


# ---------------------------------------------------------------------------
# Coherent-state operators on the two-dimensional span of |+alpha>, |-alpha>


@dataclass(frozen=True)
class CoherentOps:
    """Operators on the first field mode built from ``|+-alpha> = e^{+-i phi}|0>``.

    ``literal`` uses the non-orthogonal coherent vectors as printed;
    ``ideal`` replaces them with their symmetric (Lowdin) orthonormalization.
    """

    overlap: float
    ground_state_factor: float
    plus: np.ndarray
    minus: np.ndarray
    literal: dict
    ideal: dict
    ideal_plus: np.ndarray
    ideal_minus: np.ndarray

    @property
    def deviation(self) -> dict:
        """How far the literal ``X``, ``Z`` are from squaring to the span projector."""
        span = self.ideal["P+"] + self.ideal["P-"]
        x, z = self.literal["X"], self.literal["Z"]
        return {
            "X": float(np.max(np.abs(x @ x - span))),
            "Z": float(np.max(np.abs(z @ z - span))),
        }


def _ops_from(p: np.ndarray, m: np.ndarray) -> dict:
    pp, mm = np.outer(p, p.conj()), np.outer(m, m.conj())
    mp, pm = np.outer(m, p.conj()), np.outer(p, m.conj())
    return {
        "P+": pp,
        "P-": mm,
        "Z": pp - mm,
        "X": mp + pm,
        "Ppi2+": pp + mp + pm + mm,
        "Ppi2-": pp - mp - pm + mm,
    }


def coherent_projector_ops(cal: FieldCalibration, backend: FockBackend | None = None) -> CoherentOps:
    backend = backend if backend is not None else FockBackend(cal)
    vac = backend.vacuum()
    # e^{+-i phi} acts only on the first mode, so the coherent vectors live there
    plus = backend.apply((_phi(+1.0),), vac)[:, 0]
    minus = backend.apply((_phi(-1.0),), vac)[:, 0]
    basis = np.stack([plus, minus], axis=1)
    gram = basis.conj().T @ basis
    vals, vecs = np.linalg.eigh(gram)
    inv_sqrt = (vecs * vals**-0.5) @ vecs.conj().T
    ortho = basis @ inv_sqrt
    return CoherentOps(
        overlap=coherent_overlap(cal),
        ground_state_factor=float(abs(plus[0])),
        plus=plus,
        minus=minus,
        literal=_ops_from(plus, minus),
        ideal=_ops_from(ortho[:, 0], ortho[:, 1]),
        ideal_plus=ortho[:, 0],
        ideal_minus=ortho[:, 1],
    )


@dataclass(frozen=True)
class DenseFieldGate:
    """Qubit (x) first-field-mode operator as a product of projector-sum layers.

    Each layer is a tuple of ``(Projector, field_matrix)`` pairs; layers are in
    operator order.
    """

    name: str
    layers: tuple[tuple[tuple[Projector, np.ndarray], ...], ...]

    @property
    def matrix(self) -> np.ndarray:
        mats = [sum(np.kron(p.matrix, f) for p, f in layer) for layer in self.layers]
        return reduce(np.matmul, mats)


def u_swap_simplified(variant: str, ops: CoherentOps, backend: FockBackend, ideal: bool = True) -> DenseFieldGate:
    """Simplified qubit-field SWAP built from the coherent ``X_alpha``, ``Z_alpha``.

    ``variant`` is ``"vacuum-init"`` (first factor is the ``zphi`` gate) or
    ``"plus-alpha-init"`` (all three factors use the coherent operators).
    """
    table = ops.ideal if ideal else ops.literal
    n1 = backend.dims[0]
    one = np.eye(n1, dtype=complex)
    pz, mz = Projector("z", +1), Projector("z", -1)
    px, mx = Projector("x", +1), Projector("x", -1)
    outer = ((pz, one), (mz, table["X"]))
    middle = ((px, one), (mx, table["Z"]))
    if variant == "vacuum-init":
        e_plus, _ = backend._factors(1.0, 0.0)
        e_minus, _ = backend._factors(-1.0, 0.0)
        first = ((pz, e_plus), (mz, e_minus))
    elif variant == "plus-alpha-init":
        first = outer
    else:
        raise ValueError("variant must be 'vacuum-init' or 'plus-alpha-init'")
    return DenseFieldGate(f"swap[{variant}]", (outer, middle, first))


def subspace_matrix(gate: DenseFieldGate, ops: CoherentOps) -> np.ndarray:
    """Restrict a qubit (x) mode-1 operator to qubit (x) span{ideal |+alpha>, |-alpha>}."""
    basis = np.stack([ops.ideal_plus, ops.ideal_minus], axis=1)
    iso = np.kron(_I2, basis)
    return iso.conj().T @ gate.matrix @ iso


__all__ = [
    "GATES",
    "CoherentOps",
    "ControlledDisplacementGate",
    "DenseFieldGate",
    "GateTerm",
    "apply_gate_fock",
    "coherent_projector_ops",
    "fock_matrix",
    "subspace_matrix",
    "u_hadamard",
    "u_qst",
    "u_s",
    "u_swap_simplified",
    "u_t",
    "u_xpi",
    "u_zphi",
    "u_zpix_phi",
    "unitarity_residual",
]
