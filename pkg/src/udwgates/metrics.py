"""Information-theoretic figures of merit for channels."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.linalg import sqrtm
from scipy.optimize import minimize

from .channels import QuantumChannel
from .errors import DimensionMismatchError
from .numerics import check_density, partial_trace, trace_norm, von_neumann_entropy
from .qubit import basis_ket

DEFAULT_SEED = 20240611


def trace_distance(rho, sigma) -> float:
    rho, sigma = np.asarray(rho, dtype=complex), np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionMismatchError("states have different dimensions")
    return 0.5 * trace_norm(rho - sigma)


def _purify(rho: np.ndarray) -> np.ndarray:
    """``M`` with ``|psi> = vec(M)`` on reference (x) input and ``Tr_R = rho``."""
    root = sqrtm(0.5 * (rho + rho.conj().T))
    return np.asarray(root, dtype=complex).T


def _stabilized_output(ch: QuantumChannel, m: np.ndarray) -> np.ndarray:
    """``(id (x) N)(|psi><psi|)`` for ``|psi> = sum_ri m[r, i] |r>|i>``."""
    lift = np.kron(m, np.eye(ch.out_dim))
    return lift @ ch.choi.data @ lift.conj().T


def coherent_information(ch: QuantumChannel, rho_in) -> float:
    """``S(N(rho)) - S((id (x) N)(psi))`` in bits, ``psi`` a purification of ``rho``."""
    rho = check_density(rho_in, atol=1e-8).data
    if rho.shape[0] != ch.in_dim:
        raise DimensionMismatchError("input state does not match channel input")
    joint = _stabilized_output(ch, _purify(rho))
    out = ch.apply(rho)
    return von_neumann_entropy(out, validate=False) - von_neumann_entropy(joint, validate=False)


def _bloch_state(x: np.ndarray) -> np.ndarray:
    # maps R^3 onto the open Bloch ball
    r = x / np.sqrt(1.0 + x @ x)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0, -1.0]).astype(complex)
    return 0.5 * (np.eye(2) + r[0] * sx + r[1] * sy + r[2] * sz)


def capacity_estimate(ch: QuantumChannel, strategy: str = "assume_maximizing_default",
                      restarts: int = 6, seed: int = DEFAULT_SEED) -> float:
    """Single-letter estimate ``max(0, I_c)``.

    ``assume_maximizing_default`` takes the maximally mixed input;
    ``optimize_bloch`` searches the Bloch ball and never reports less than the
    default.
    """
    if ch.in_dim != 2:
        raise DimensionMismatchError("capacity estimate is defined for qubit inputs")
    default = coherent_information(ch, np.eye(2) / 2)
    if strategy == "assume_maximizing_default":
        return max(0.0, default)
    if strategy != "optimize_bloch":
        raise ValueError(f"unknown strategy {strategy!r}")
    rng = np.random.default_rng(seed)
    best = default

    def objective(x):
        return -coherent_information(ch, _bloch_state(x))

    starts = [np.zeros(3)] + [rng.normal(scale=1.0, size=3) for _ in range(restarts - 1)]
    for x0 in starts:
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"xatol": 1e-6, "fatol": 1e-10, "maxiter": 2000})
        best = max(best, -res.fun)
    return max(0.0, best)


@dataclass(frozen=True)
class DiamondResult:
    value: float
    argmax_state: np.ndarray
    restarts: int
    iterations: int
    best_per_restart: tuple[float, ...]
    seed: int
    structured_best: float = 0.0

    def __float__(self):
        return self.value


def _diff_norm(dj: np.ndarray, m: np.ndarray, dout: int) -> float:
    lift = np.kron(m, np.eye(dout))
    return float(np.sum(np.abs(np.linalg.eigvalsh(lift @ dj @ lift.conj().T))))


def _structured_inputs(d: int) -> list[np.ndarray]:
    """Maximally entangled, computational products, and axis-eigenstate products.

    Each entry is the coefficient matrix ``M`` with unit Frobenius norm.
    """
    out = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for r, i in product(range(d), repeat=2):
        m = np.zeros((d, d), dtype=complex)
        m[r, i] = 1.0
        out.append(m)
    if d == 2:
        kets = [basis_ket(a, s) for a in "xyz" for s in (1, -1)]
        out.extend(np.outer(basis_ket("z", 1), k) for k in kets)
        # Bell-like: maximally entangled with a local axis rotation on the input
        for k in kets:
            perp = np.array([-np.conj(k[1]), np.conj(k[0])])
            out.append((np.outer(basis_ket("z", 1), k) + np.outer(basis_ket("z", -1), perp)) / np.sqrt(2))
    return out


def _check_pair(ch1: QuantumChannel, ch2: QuantumChannel) -> None:
    if (ch1.in_dim, ch1.out_dim) != (ch2.in_dim, ch2.out_dim):
        raise DimensionMismatchError("channels have different dimensions")


def diamond_distance(ch1: QuantumChannel, ch2: QuantumChannel, restarts: int = 16,
                     seed: int = DEFAULT_SEED, maxiter: int | None = None) -> DiamondResult:
    """``max_psi || (id (x) (N1 - N2))(psi) ||_1`` over pure reference-extended inputs.

    Multi-start Nelder-Mead over the real and imaginary parts of the
    coefficient matrix of ``psi``; the first start is the best structured input.
    """
    _check_pair(ch1, ch2)
    d, dout = ch1.in_dim, ch1.out_dim
    dj = ch1.choi.data - ch2.choi.data
    npar = 2 * d * d
    maxiter = maxiter or 400 * npar

    def unpack(x):
        m = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
        return m / max(np.linalg.norm(m), 1e-300)

    def pack(m):
        return np.concatenate([m.real.ravel(), m.imag.ravel()])

    structured = _structured_inputs(d)
    scored = sorted(((_diff_norm(dj, m, dout), k) for k, m in enumerate(structured)), reverse=True)
    best_val, best_m = scored[0][0], structured[scored[0][1]]
    structured_best = best_val
    rng = np.random.default_rng(seed)
    starts = [pack(structured[k]) for _, k in scored[: max(1, min(3, restarts // 4))]]
    while len(starts) < restarts:
        starts.append(rng.standard_normal(npar))
    per_restart, iters = [], 0
    for x0 in starts:
        res = minimize(lambda x: -_diff_norm(dj, unpack(x), dout), x0, method="Nelder-Mead",
                       options={"xatol": 1e-7, "fatol": 1e-11, "maxiter": maxiter, "adaptive": npar > 8})
        val = -float(res.fun)
        iters += int(res.nit)
        per_restart.append(val)
        if val > best_val:
            best_val, best_m = val, unpack(res.x)
    value = float(min(2.0, max(0.0, best_val)))
    return DiamondResult(value, pack(best_m), len(starts), iters, tuple(per_restart), seed, structured_best)


def stabilized_distance(ch1: QuantumChannel, ch2: QuantumChannel, m: np.ndarray) -> float:
    _check_pair(ch1, ch2)
    m = np.asarray(m, dtype=complex)
    m = m / np.linalg.norm(m)
    return _diff_norm(ch1.choi.data - ch2.choi.data, m, ch1.out_dim)


def diamond_lower_bound_oracle(ch1: QuantumChannel, ch2: QuantumChannel, samples: int = 100_000,
                               seed: int = DEFAULT_SEED, batch: int = 20_000) -> float:
    """Best stabilized trace norm over Haar-random pure inputs plus the structured set."""
    _check_pair(ch1, ch2)
    d, dout = ch1.in_dim, ch1.out_dim
    dj = ch1.choi.data - ch2.choi.data
    best = max(_diff_norm(dj, m, dout) for m in _structured_inputs(d))
    rng = np.random.default_rng(seed)
    dj4 = dj.reshape(d, dout, d, dout)
    done = 0
    while done < samples:
        n = min(batch, samples - done)
        m = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
        m /= np.linalg.norm(m, axis=(1, 2), keepdims=True)
        # (M (x) I) J (M (x) I)^+ for the whole batch
        out = np.einsum("nri,iajb,nsj->nrasb", m, dj4, m.conj(), optimize=True).reshape(n, d * dout, d * dout)
        vals = np.abs(np.linalg.eigvalsh(out)).sum(axis=1)
        best = max(best, float(vals.max()))
        done += n
    return best


__all__ = [
    "DEFAULT_SEED",
    "DiamondResult",
    "capacity_estimate",
    "coherent_information",
    "diamond_distance",
    "diamond_lower_bound_oracle",
    "stabilized_distance",
    "trace_distance",
]
