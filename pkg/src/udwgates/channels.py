"""CPTP maps built from qubit and qubit-field circuits.

Two ways of evaluating a circuit that involves the field are provided:

``weyl``
    The circuit is expanded into branches ``Q_b (x) V_b``, with ``Q_b`` a
    qubit-register operator and ``V_b`` a single reduced displacement word.
    Tracing the field needs only the Gram matrix
    ``G[b', b] = <0|W0^+ V_b'^+ V_b W0|0>``, which the Weyl relation and the
    Gaussian characteristic function give exactly.

``fock``
    Every computational input is propagated as a state vector on
    ``register (x) mode1 (x) mode2`` through the truncated-Fock gates, and the
    field is traced numerically.  It shares no code with the branch expansion
    and serves as the cross-check.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatchError, InvariantError
from .field import DisplacementWord, FieldCalibration, FockBackend, vacuum_expectation, weyl_reduce
from .gates import (
    ControlledDisplacementGate,
    apply_gate_fock,
    u_hadamard,
    u_qst,
    u_s,
    u_t,
    u_xpi,
    u_zphi,
    u_zpix_phi,
)
from .numerics import Operator, partial_trace
from .qubit import basis_ket, cnot, embed, qst_gate, single_qubit_gate, swap_gate

KRAUS_CUTOFF = 1e-10


def _vec(k: np.ndarray) -> np.ndarray:
    # column-stacked so that J = sum |i><j| (x) K|i><j|K^+ = sum vec vec^+
    return k.T.reshape(-1)


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """A CPTP map stored as both Kraus operators and a Choi matrix.

    Choi convention: ``J = sum_ij |i><j| (x) N(|i><j|)`` with the input factor
    first, so ``Tr_out J = I_in``.
    """

    in_dim: int
    out_dim: int
    kraus: tuple[np.ndarray, ...]
    choi: Operator
    label: str = ""

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray], label: str = "", canonical: bool = True) -> "QuantumChannel":
        kraus = [np.asarray(k, dtype=complex) for k in kraus]
        if not kraus:
            raise ValueError("need at least one Kraus operator")
        dout, din = kraus[0].shape
        if any(k.shape != (dout, din) for k in kraus):
            raise DimensionMismatchError("Kraus operators differ in shape")
        vs = np.stack([_vec(k) for k in kraus], axis=1)
        choi = vs @ vs.conj().T
        if canonical:
            return cls.from_choi(choi, din, dout, label)
        return cls(din, dout, tuple(kraus), Operator(choi, (din, dout)), label)

    @classmethod
    def from_choi(cls, choi, in_dim: int, out_dim: int, label: str = "") -> "QuantumChannel":
        j = np.asarray(choi, dtype=complex)
        if j.shape != (in_dim * out_dim,) * 2:
            raise DimensionMismatchError("Choi matrix size does not match dims")
        j = 0.5 * (j + j.conj().T)
        vals, vecs = np.linalg.eigh(j)
        kraus = tuple(
            np.sqrt(lam) * vecs[:, i].reshape(in_dim, out_dim).T
            for i, lam in enumerate(vals)
            if lam > KRAUS_CUTOFF
        )
        if not kraus:
            raise InvariantError("Choi matrix has no positive eigenvalues")
        return cls(in_dim, out_dim, kraus, Operator(j, (in_dim, out_dim)), label)

    @classmethod
    def unitary(cls, u, label: str = "") -> "QuantumChannel":
        u = np.asarray(u, dtype=complex)
        return cls.from_kraus([u], label)

    @classmethod
    def identity(cls, d: int = 2) -> "QuantumChannel":
        return cls.unitary(np.eye(d), "identity")

    # --- invariants -------------------------------------------------------
    def kraus_completeness(self) -> float:
        s = sum(k.conj().T @ k for k in self.kraus)
        return float(np.max(np.abs(s - np.eye(self.in_dim))))

    def choi_min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.choi.data)[0])

    def choi_trace_residual(self) -> float:
        red = partial_trace(self.choi, keep=[0])
        return float(np.max(np.abs(red.data - np.eye(self.in_dim))))

    def validate(self, atol: float = 1e-8) -> "QuantumChannel":
        checks = {
            "Kraus completeness": self.kraus_completeness(),
            "Choi positivity": max(0.0, -self.choi_min_eigenvalue()),
            "Choi partial trace": self.choi_trace_residual(),
        }
        bad = {k: v for k, v in checks.items() if v > atol}
        if bad:
            raise InvariantError(f"{self.label or 'channel'} is not CPTP: {bad}")
        return self

    def is_cptp(self, atol: float = 1e-8) -> bool:
        try:
            self.validate(atol)
        except InvariantError:
            return False
        return True

    # --- action -----------------------------------------------------------
    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.ndim == 1:
            rho = np.outer(rho, rho.conj())
        if rho.shape != (self.in_dim, self.in_dim):
            raise DimensionMismatchError(f"input has shape {rho.shape}, channel expects {self.in_dim}")
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def apply_choi(self, rho) -> np.ndarray:
        """Same map evaluated from the Choi matrix: ``Tr_in[(rho^T (x) I) J]``."""
        rho = np.asarray(rho, dtype=complex)
        j = self.choi.data.reshape(self.in_dim, self.out_dim, self.in_dim, self.out_dim)
        return np.einsum("ij,iajb->ab", rho, j)

    def compose(self, inner: "QuantumChannel") -> "QuantumChannel":
        """``self o inner``: apply ``inner`` first."""
        if inner.out_dim != self.in_dim:
            raise DimensionMismatchError("composition dims do not match")
        kraus = [a @ b for a in self.kraus for b in inner.kraus]
        return QuantumChannel.from_kraus(kraus, f"{self.label}*{inner.label}")

    def choi_distance(self, other: "QuantumChannel") -> float:
        return float(np.max(np.abs(self.choi.data - other.choi.data)))

    def to_dict(self) -> dict:
        j = self.choi.data
        return {
            "label": self.label,
            "in_dim": self.in_dim,
            "out_dim": self.out_dim,
            "choi_real": j.real.tolist(),
            "choi_imag": j.imag.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "QuantumChannel":
        j = np.asarray(d["choi_real"]) + 1j * np.asarray(d["choi_imag"])
        return cls.from_choi(j, d["in_dim"], d["out_dim"], d.get("label", ""))


def dephasing_channel(p: float = 1.0) -> QuantumChannel:
    """``rho -> (1 - p/2) rho + (p/2) Z rho Z``; ``p = 1`` kills coherences."""
    z = np.diag([1.0, -1.0])
    return QuantumChannel.from_kraus([np.sqrt(1 - p / 2) * np.eye(2), np.sqrt(p / 2) * z], "dephasing")


def depolarizing_channel(p: float, d: int = 2) -> QuantumChannel:
    """``rho -> (1-p) rho + p I/d``."""
    kraus = [np.sqrt(1 - p) * np.eye(d)] if p < 1 else []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d))
            e[i, j] = 1.0
            kraus.append(np.sqrt(p / d) * e)
    return QuantumChannel.from_kraus(kraus, "depolarizing")


def random_channel(in_dim: int, out_dim: int, rng: np.random.Generator, rank: int | None = None) -> QuantumChannel:
    """Random CPTP map from a Haar isometry into output (x) environment."""
    rank = rank or in_dim * out_dim
    z = rng.standard_normal((out_dim * rank, in_dim)) + 1j * rng.standard_normal((out_dim * rank, in_dim))
    v, _ = np.linalg.qr(z)
    kraus = [v[r * out_dim:(r + 1) * out_dim, :] for r in range(rank)]
    return QuantumChannel.from_kraus(kraus, "random")


# ---------------------------------------------------------------------------
# circuits


@dataclass(frozen=True)
class QubitStep:
    unitary: np.ndarray
    targets: tuple[str, ...]
    label: str = ""


@dataclass(frozen=True)
class FieldStep:
    gate: ControlledDisplacementGate
    qubit: str


Step = QubitStep | FieldStep


@dataclass(frozen=True)
class Layout:
    """Factor roles for a circuit.

    ``qubits`` fixes the register order.  ``inputs`` carry the channel input
    (in that order), every other qubit starts in ``init[name]``; ``outputs``
    are kept and everything else, including the field, is traced.
    """

    qubits: tuple[str, ...]
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    init: dict = field(default_factory=dict)
    field_init: str = "vacuum"

    def __post_init__(self):
        names = set(self.qubits)
        if len(names) != len(self.qubits):
            raise ValueError("duplicate qubit names")
        for group in (self.inputs, self.outputs, tuple(self.init)):
            if not set(group) <= names:
                raise ValueError(f"unknown qubits in {group}")
        missing = names - set(self.inputs) - set(self.init)
        if missing:
            raise ValueError(f"no initial state for {sorted(missing)}")
        if set(self.inputs) & set(self.init):
            raise ValueError("input qubits cannot also have an initial state")
        if self.field_init not in ("vacuum", "plus_alpha"):
            raise ValueError("field_init must be 'vacuum' or 'plus_alpha'")

    def index(self, name: str) -> int:
        return self.qubits.index(name)

    @property
    def in_dim(self) -> int:
        return 2 ** len(self.inputs)

    @property
    def out_dim(self) -> int:
        return 2 ** len(self.outputs)

    def embedding(self) -> np.ndarray:
        """Isometry from the input space into the register, other qubits initialized."""
        n = len(self.qubits)
        cols = []
        for k in range(self.in_dim):
            bits = [(k >> (len(self.inputs) - 1 - i)) & 1 for i in range(len(self.inputs))]
            factors = []
            for name in self.qubits:
                if name in self.inputs:
                    factors.append(np.eye(2)[bits[self.inputs.index(name)]])
                else:
                    factors.append(np.asarray(self.init[name], dtype=complex))
            cols.append(reduce(np.kron, factors))
        return np.stack(cols, axis=1).reshape(2**n, self.in_dim)

    def output_split(self, m: np.ndarray) -> list[np.ndarray]:
        """Split a register-valued operator ``(2^n, d_in)`` into Kraus blocks on the outputs."""
        n = len(self.qubits)
        keep = [self.index(q) for q in self.outputs]
        drop = [i for i in range(n) if i not in keep]
        t = m.reshape([2] * n + [m.shape[1]]).transpose(keep + drop + [n])
        t = t.reshape(self.out_dim, 2 ** len(drop), m.shape[1])
        return [t[:, e, :] for e in range(t.shape[1])]


def _register_op(step: QubitStep, layout: Layout) -> np.ndarray:
    return embed(step.unitary, tuple(layout.index(t) for t in step.targets), len(layout.qubits))


def _field_init_word(layout: Layout) -> DisplacementWord:
    return DisplacementWord.phi(1.0) if layout.field_init == "plus_alpha" else DisplacementWord.identity()


def _branches(steps: Sequence[Step], layout: Layout, cal) -> list[tuple[np.ndarray, DisplacementWord]]:
    """Expand the circuit into (register operator, reduced field word) branches."""
    n = len(layout.qubits)
    branches = [(np.eye(2**n, dtype=complex), DisplacementWord.identity())]
    for step in steps:
        if isinstance(step, QubitStep):
            u = _register_op(step, layout)
            branches = [(u @ q, w) for q, w in branches]
            continue
        idx = layout.index(step.qubit)
        for layer in reversed(step.gate.layers):
            new = []
            for term in layer:
                q_t = embed(term.qubit_matrix, (idx,), n)
                w_t = weyl_reduce(term.words, cal)
                for q, w in branches:
                    new.append((q_t @ q, weyl_reduce((w_t, w), cal)))
            branches = new
    return branches


def _merge_branches(branches, atol: float = 1e-13):
    """Combine branches that carry the same field word (coefficients equal)."""
    merged: dict[tuple[float, float], list] = {}
    for q, w in branches:
        key = (round(w.c_phi, 12), round(w.c_pi, 12))
        if key in merged:
            merged[key][0] = merged[key][0] + w.phase * q
        else:
            merged[key] = [w.phase * q, DisplacementWord(w.c_phi, w.c_pi)]
    return [(q, w) for q, w in merged.values() if np.max(np.abs(q)) > atol]


def _weyl_channel(steps, layout: Layout, cal: FieldCalibration | None, label: str) -> QuantumChannel:
    emb = layout.embedding()
    has_field = any(isinstance(s, FieldStep) for s in steps)
    if has_field and cal is None:
        raise ValueError("field steps need a calibration")
    gamma = cal.gamma if cal is not None else 0.0
    branches = _merge_branches(_branches(steps, layout, gamma))
    amps = [q @ emb for q, _ in branches]
    if not has_field:
        mats = amps
    else:
        w0 = _field_init_word(layout)
        words = [w for _, w in branches]
        nb = len(words)
        gram = np.empty((nb, nb), dtype=complex)
        for i in range(nb):
            for j in range(nb):
                gram[i, j] = vacuum_expectation(
                    weyl_reduce((w0.inverse(), words[i].inverse(), words[j], w0), cal), cal
                )
        gram = 0.5 * (gram + gram.conj().T)
        vals, vecs = np.linalg.eigh(gram)
        mats = []
        for lam, u in zip(vals, vecs.T):
            if lam <= KRAUS_CUTOFF:
                continue
            coeff = np.sqrt(lam) * u.conj()
            mats.append(sum(c * a for c, a in zip(coeff, amps)))
    kraus = [k for m in mats for k in layout.output_split(m)]
    return QuantumChannel.from_kraus(kraus, label)


def _fock_channel(steps, layout: Layout, backend: FockBackend, label: str) -> QuantumChannel:
    n = len(layout.qubits)
    emb = layout.embedding()
    n1, n2 = backend.dims
    psi = np.zeros((layout.in_dim,) + (2,) * n + (n1, n2), dtype=complex)
    field0 = backend.vacuum()
    if layout.field_init == "plus_alpha":
        field0 = backend.apply((DisplacementWord.phi(1.0),), field0)
    for k in range(layout.in_dim):
        psi[k] = np.multiply.outer(emb[:, k].reshape((2,) * n), field0)
    for step in steps:
        if isinstance(step, QubitStep):
            u = _register_op(step, layout).reshape((2,) * (2 * n))
            psi = np.einsum(
                u, list(range(n)) + list(range(n, 2 * n)),
                psi, [2 * n + 1] + list(range(n, 2 * n)) + [2 * n + 2, 2 * n + 3],
                [2 * n + 1] + list(range(n)) + [2 * n + 2, 2 * n + 3],
            )
        else:
            psi = apply_gate_fock(step.gate, backend, psi, qubit_axis=1 + layout.index(step.qubit))
    keep = [layout.index(q) for q in layout.outputs]
    drop = [i for i in range(n) if i not in keep]
    # (input, keep, drop+field) -> reduced output for each |i><j|
    t = psi.transpose([0] + [1 + i for i in keep] + [1 + i for i in drop] + [n + 1, n + 2])
    t = t.reshape(layout.in_dim, layout.out_dim, -1)
    choi = np.einsum("iae,jbe->iajb", t, t.conj()).reshape(layout.in_dim * layout.out_dim, -1)
    return QuantumChannel.from_choi(choi, layout.in_dim, layout.out_dim, label)


def channel_from_circuit(steps: Sequence[Step], layout: Layout, cal: FieldCalibration | None = None,
                         backend: str | FockBackend = "weyl", truncation: int = 60,
                         label: str = "", validate: bool = True) -> QuantumChannel:
    """``rho -> Tr_traced[U (rho (x) inits (x) field0) U^+]`` for the given step list.

    ``steps`` are in time order.  ``backend`` is ``"weyl"``, ``"fock"`` or a
    prebuilt :class:`FockBackend`.
    """
    for s in steps:
        names = s.targets if isinstance(s, QubitStep) else (s.qubit,)
        if not set(names) <= set(layout.qubits):
            raise ValueError(f"step acts on undeclared qubits {names}")
        if isinstance(s, QubitStep) and np.asarray(s.unitary).shape != (2 ** len(names),) * 2:
            raise DimensionMismatchError(f"step {s.label!r} has the wrong size for {names}")
    if isinstance(backend, FockBackend):
        ch = _fock_channel(steps, layout, backend, label)
    elif backend == "fock":
        if cal is None:
            raise ValueError("fock backend needs a calibration")
        ch = _fock_channel(steps, layout, FockBackend(cal, truncation), label)
    elif backend == "weyl":
        ch = _weyl_channel(steps, layout, cal, label)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return ch.validate() if validate else ch


# ---------------------------------------------------------------------------
# named channels

_ZERO = basis_ket("z", +1)
PLUS_Y = basis_ket("y", +1)

RECEIVER_STATES = {
    "0": _ZERO,
    "1": basis_ket("z", -1),
    "+": basis_ket("x", +1),
    "-": basis_ket("x", -1),
    "+y": PLUS_Y,
    "-y": basis_ket("y", -1),
}


def receiver_state(spec) -> np.ndarray:
    if isinstance(spec, str):
        try:
            return RECEIVER_STATES[spec]
        except KeyError:
            raise ValueError(f"unknown receiver state {spec!r}") from None
    v = np.asarray(spec, dtype=complex)
    if v.shape != (2,) or not np.isclose(np.linalg.norm(v), 1.0):
        raise ValueError("receiver state must be a normalized 2-vector")
    return v


REFERENCE_NAMES = (
    "qst_qubit",
    "swap_qubit",
    "cnot_qubit_mediated",
    "cnot_two_qubit",
    "hadamard_local",
    "s_local",
    "t_local",
)


def reference_channels(name: str) -> QuantumChannel:
    """Ideal comparator channels built from qubit gates only."""
    cx, qst, sw = cnot("z").data, qst_gate().data, swap_gate().data
    if name == "qst_qubit":
        layout = Layout(("A", "F", "B"), ("A",), ("B",), {"F": _ZERO, "B": _ZERO})
        steps = [QubitStep(qst, ("A", "F"), "qst"), QubitStep(qst, ("F", "B"), "qst")]
    elif name == "swap_qubit":
        layout = Layout(("A", "F", "B"), ("A", "B"), ("A", "B"), {"F": _ZERO})
        steps = [QubitStep(sw, ("A", "F")), QubitStep(sw, ("F", "B")), QubitStep(sw, ("A", "F"))]
    elif name == "cnot_qubit_mediated":
        layout = Layout(("A", "F", "B"), ("A",), ("B",), {"F": _ZERO, "B": _ZERO})
        steps = [QubitStep(cx, ("A", "F"), "cnot"), QubitStep(qst, ("F", "B"), "qst")]
    elif name == "cnot_two_qubit":
        layout = Layout(("A", "B"), ("A",), ("B",), {"B": _ZERO})
        steps = [QubitStep(cx, ("A", "B"), "cnot")]
    elif name in ("hadamard_local", "s_local", "t_local"):
        return QuantumChannel.unitary(single_qubit_gate(name[0]).data, name)
    else:
        raise ValueError(f"unknown reference channel {name!r}")
    return channel_from_circuit(steps, layout, label=name)


FIELD_NAMES = ("qst", "cnot_mediated", "cnot_two_qubit", "hadamard", "s", "t")


def _decode(gate: ControlledDisplacementGate, decoder: str) -> ControlledDisplacementGate:
    if decoder == "adjoint":
        return gate.adjoint()
    if decoder == "literal":
        return gate
    raise ValueError("decoder must be 'adjoint' or 'literal'")


def field_circuit(name: str, receiver_init="+y", decoder: str = "adjoint") -> tuple[list[Step], Layout]:
    """Step list and layout for a named field-mediated channel.

    Gates whose field acts as the controlling side (the receiver's decode and
    the Hadamard return gate) are applied as adjoints of their encode form
    unless ``decoder="literal"``.
    """
    if name in ("qst", "cnot_mediated", "cnot_two_qubit"):
        layout = Layout(("A", "B"), ("A",), ("B",), {"B": receiver_state(receiver_init)})
        encode, dec = {
            "qst": (u_qst(), u_qst()),
            "cnot_mediated": (u_zphi(), u_xpi()),
            "cnot_two_qubit": (u_zpix_phi(), u_qst()),
        }[name]
        return [FieldStep(encode, "A"), FieldStep(_decode(dec, decoder), "B")], layout
    layout = Layout(("A",), ("A",), ("A",))
    if name == "hadamard":
        return [FieldStep(u_zphi(), "A"), FieldStep(_decode(u_hadamard(), decoder), "A")], layout
    if name == "s":
        return [FieldStep(u_s(), "A")], layout
    if name == "t":
        return [FieldStep(u_t(), "A")], layout
    raise ValueError(f"unknown field channel {name!r}")


def field_channels(name: str, cal: FieldCalibration, receiver_init="+y", backend="weyl",
                   truncation: int = 60, decoder: str = "adjoint") -> QuantumChannel:
    steps, layout = field_circuit(name, receiver_init, decoder)
    return channel_from_circuit(steps, layout, cal, backend, truncation, label=f"field_{name}")


__all__ = [
    "FIELD_NAMES",
    "FieldStep",
    "Layout",
    "PLUS_Y",
    "QuantumChannel",
    "QubitStep",
    "REFERENCE_NAMES",
    "channel_from_circuit",
    "dephasing_channel",
    "depolarizing_channel",
    "field_channels",
    "field_circuit",
    "random_channel",
    "receiver_state",
    "reference_channels",
]
