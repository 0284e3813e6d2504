"""Field side of the detector model.

A Gaussian-smeared 1-D scalar field enters only through two smeared
observables, ``phi = phi(F)`` and ``Pi = Pi(F)``.  Their vacuum statistics are
fixed by three spectral integrals, and the pair obeys ``[phi, Pi] = i*gamma``.
Two interchangeable evaluation routes are provided:

* the Weyl route: words ``exp(i(a*phi + b*Pi))`` are composed exactly with the
  Weyl relation and evaluated in the vacuum with the Gaussian characteristic
  function;
* the Fock route: the two smeared mode profiles are orthonormalized into two
  bosonic modes, truncated, and exponentiated as matrices.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import simpson

from .errors import QuadratureError, TruncationError
from .numerics import expm_hermitian

GAMMA_TARGET = math.pi / 4


@dataclass(frozen=True)
class SmearingSpec:
    """Gaussian smearing ``F(k) = exp(-sigma^2 k^2 / 2)`` and dispersion data.

    ``omega(k) = sqrt(v^2 k^2 + mass_reg^2)``; the small regulator mass keeps
    the ``1/omega`` moment finite.
    """

    sigma: float = 1.0
    v: float = 1.0
    mass_reg: float | None = None
    k_max: float | None = None
    points: int = 4001

    def __post_init__(self):
        if self.sigma <= 0 or self.v <= 0:
            raise ValueError("sigma and v must be positive")
        if self.mass_reg is None:
            object.__setattr__(self, "mass_reg", 1e-3 * self.v / self.sigma)
        if self.k_max is None:
            object.__setattr__(self, "k_max", 40.0 / self.sigma)
        if self.mass_reg < 0:
            raise ValueError("mass_reg must be non-negative")
        if self.k_max * self.sigma < 20:
            raise ValueError("k_max * sigma must be at least 20")
        if self.points < 5:
            raise ValueError("need at least 5 quadrature points")
        if self.points % 2 == 0:
            object.__setattr__(self, "points", self.points + 1)

    def profile(self, k):
        return np.exp(-0.5 * (self.sigma * np.asarray(k)) ** 2)

    def omega(self, k):
        return np.sqrt((self.v * np.asarray(k)) ** 2 + self.mass_reg**2)


def _spectral_integrals(spec: SmearingSpec, points: int) -> np.ndarray:
    """(int |F|^2, int |F|^2/(2w), int w|F|^2/2) on a sinh-mapped Simpson grid.

    With ``k = (m/v) sinh(u)`` we get ``omega = m cosh(u)`` and
    ``dk = (m/v) cosh(u) du``, which flattens the regulator peak at ``k = 0``.
    """
    m, v = spec.mass_reg, spec.v
    if m == 0:
        raise QuadratureError("massless 1/omega moment diverges; set mass_reg > 0")
    umax = math.asinh(v * spec.k_max / m)
    u = np.linspace(-umax, umax, points)
    k = (m / v) * np.sinh(u)
    f2 = np.exp(-((spec.sigma * k) ** 2))
    ch = np.cosh(u)
    norm = simpson(f2 * (m / v) * ch, x=u)
    inv = simpson(f2 / (2 * v), x=u)
    omg = simpson(f2 * m**2 * ch**2 / (2 * v), x=u)
    return np.array([norm, inv, omg])


@lru_cache(maxsize=256)
def spectral_integrals(spec: SmearingSpec) -> tuple[np.ndarray, float]:
    """Integrals at ``spec.points`` plus the relative change on doubling."""
    base = _spectral_integrals(spec, spec.points)
    fine = _spectral_integrals(spec, 2 * spec.points - 1)
    resid = float(np.max(np.abs(fine - base) / np.abs(fine)))
    if resid > 1e-6:
        raise QuadratureError(f"spectral integrals not converged (relative change {resid:.2e})")
    return base, resid


@dataclass(frozen=True)
class FieldCalibration:
    """Couplings and the vacuum moments they induce."""

    spec: SmearingSpec
    j_phi: float
    lambda_pi: float
    s_phi: float
    s_pi: float
    gamma: float
    cross_moment: float
    norm_integral: float
    omega_integral: float
    quadrature_residual: float = 0.0

    @property
    def coherent_overlap(self) -> float:
        return coherent_overlap(self)

    @property
    def restriction_ratio(self) -> float:
        """``(j_phi int|F|^2)^2 / (1/2 int w|F|^2)``; equals gamma^2/s_pi once calibrated."""
        if self.omega_integral == 0:
            return math.inf
        return (self.j_phi * self.norm_integral) ** 2 / self.omega_integral

    @property
    def moment_ratio(self) -> float:
        """``s_phi^2 / s_pi``."""
        return math.inf if self.s_pi == 0 else self.s_phi**2 / self.s_pi

    def to_dict(self) -> dict:
        return {
            "sigma": self.spec.sigma,
            "v": self.spec.v,
            "mass_reg": self.spec.mass_reg,
            "k_max": self.spec.k_max,
            "points": self.spec.points,
            "j_phi": self.j_phi,
            "lambda_pi": self.lambda_pi,
            "s_phi": self.s_phi,
            "s_pi": self.s_pi,
            "gamma": self.gamma,
            "cross_moment": self.cross_moment,
            "norm_integral": self.norm_integral,
            "omega_integral": self.omega_integral,
            "quadrature_residual": self.quadrature_residual,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "FieldCalibration":
        spec = SmearingSpec(d["sigma"], d["v"], d["mass_reg"], d["k_max"], d.get("points", 4001))
        return spectral_moments(spec, d["j_phi"], d["lambda_pi"])


def spectral_moments(spec: SmearingSpec, j_phi: float, lambda_pi: float) -> FieldCalibration:
    (norm, inv, omg), resid = spectral_integrals(spec)
    s_phi = j_phi**2 * inv
    s_pi = lambda_pi**2 * omg
    gamma = lambda_pi * j_phi * norm
    # symmetric part of the overlap of g_phi = j F/sqrt(2w) and g_pi = i lam F sqrt(w/2);
    # the profiles are real so the overlap is purely imaginary
    overlap = 1j * j_phi * lambda_pi * norm / 2
    cross = float(np.real(overlap))
    return FieldCalibration(
        spec=spec,
        j_phi=float(j_phi),
        lambda_pi=float(lambda_pi),
        s_phi=float(s_phi),
        s_pi=float(s_pi),
        gamma=float(gamma),
        cross_moment=cross,
        norm_integral=float(norm),
        omega_integral=float(omg),
        quadrature_residual=resid,
    )


def calibrate_gamma(spec: SmearingSpec, j_phi: float, gamma_target: float = GAMMA_TARGET) -> FieldCalibration:
    """Choose ``lambda_pi`` so that ``lambda_pi * j_phi * int|F|^2 = gamma_target``."""
    if j_phi <= 0:
        raise ValueError("j_phi must be positive")
    (norm, _, _), _ = spectral_integrals(spec)
    if norm <= 0:
        raise QuadratureError("smearing normalization integral vanished")
    return spectral_moments(spec, j_phi, gamma_target / (j_phi * norm))


def coupling_for_s_phi(spec: SmearingSpec, s_phi: float) -> float:
    """The ``j_phi`` giving a requested vacuum variance of ``phi``."""
    (_, inv, _), _ = spectral_integrals(spec)
    return math.sqrt(s_phi / inv)


def coherent_overlap(cal: FieldCalibration) -> float:
    """``<+alpha|-alpha> = <0|exp(-2i phi)|0> = exp(-2 s_phi)``."""
    return math.exp(-2.0 * cal.s_phi)


def single_exponent_overlap(cal: FieldCalibration) -> float:
    """The ``exp(-J^2 int|F|^2/(2w)) = exp(-s_phi)`` convention, reported alongside."""
    return math.exp(-cal.s_phi)


# ---------------------------------------------------------------------------
# Weyl route


@dataclass(frozen=True)
class DisplacementWord:
    """``phase * exp(i (c_phi * phi + c_pi * Pi))`` with real coefficients."""

    c_phi: float = 0.0
    c_pi: float = 0.0
    phase: complex = 1.0 + 0j

    @classmethod
    def phi(cls, c: float = 1.0) -> "DisplacementWord":
        return cls(float(c), 0.0)

    @classmethod
    def pi(cls, c: float = 1.0) -> "DisplacementWord":
        return cls(0.0, float(c))

    @classmethod
    def identity(cls) -> "DisplacementWord":
        return cls()

    @property
    def coefficients(self) -> tuple[float, float]:
        return (self.c_phi, self.c_pi)

    def inverse(self) -> "DisplacementWord":
        return DisplacementWord(-self.c_phi, -self.c_pi, 1.0 / self.phase)

    def is_identity(self, atol: float = 1e-12) -> bool:
        return abs(self.c_phi) <= atol and abs(self.c_pi) <= atol and abs(self.phase - 1) <= atol

    def isclose(self, other: "DisplacementWord", atol: float = 1e-12) -> bool:
        return (
            abs(self.c_phi - other.c_phi) <= atol
            and abs(self.c_pi - other.c_pi) <= atol
            and abs(self.phase - other.phase) <= atol
        )

    def to_dict(self) -> dict:
        return {"c_phi": self.c_phi, "c_pi": self.c_pi, "phase": [self.phase.real, self.phase.imag]}


def _gamma_of(cal) -> float:
    return cal.gamma if isinstance(cal, FieldCalibration) else float(cal)


def weyl_product(left: DisplacementWord, right: DisplacementWord, gamma: float) -> DisplacementWord:
    # e^{iA}e^{iB} = e^{i(A+B)} e^{-[A,B]/2},  [A,B] = i*gamma*(a1 b2 - b1 a2)
    twist = left.c_phi * right.c_pi - left.c_pi * right.c_phi
    phase = left.phase * right.phase * np.exp(-0.5j * gamma * twist)
    return DisplacementWord(left.c_phi + right.c_phi, left.c_pi + right.c_pi, complex(phase))


def weyl_reduce(words: Iterable[DisplacementWord], cal) -> DisplacementWord:
    """Collapse an operator-ordered product of words into a single word."""
    gamma = _gamma_of(cal)
    out = DisplacementWord.identity()
    for w in words:
        out = weyl_product(out, w, gamma)
    return out


def vacuum_expectation(word: DisplacementWord, cal: FieldCalibration) -> complex:
    """``<0| word |0> = phase * exp(-<A^2>/2)`` for ``A = c_phi phi + c_pi Pi``."""
    a, b = word.c_phi, word.c_pi
    var = a * a * cal.s_phi + b * b * cal.s_pi + 2 * a * b * cal.cross_moment
    return complex(word.phase * np.exp(-0.5 * var))


# ---------------------------------------------------------------------------
# Fock route


def _ladder(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


class FockBackend:
    """Two truncated bosonic modes carrying ``phi`` and ``Pi``.

    Mode 1 is the normalized ``phi`` profile; mode 2 is the part of the ``Pi``
    profile orthogonal to it.  ``phi = a1 (b1 + b1^+)`` and
    ``Pi = c* b1 + c b1^+ + r (b2 + b2^+)``.  When the profiles are parallel
    (``r`` negligible) mode 2 is dropped.

    Words are exponentiated mode by mode, ``exp(i G1) (x) exp(i G2)``, which is
    exact for the truncated generators because the two pieces commute.
    """

    def __init__(self, cal: FieldCalibration, truncation: int = 60, max_coefficient: float = 2.0,
                 leakage_tol: float = 1e-10, truncation2: int | None = None):
        if truncation < 2 or (truncation2 is not None and truncation2 < 2):
            raise ValueError("truncation must be at least 2")
        self.cal = cal
        self.truncation = int(truncation)
        n = self.truncation
        n2 = int(truncation2) if truncation2 is not None else n
        s_phi, s_pi = cal.s_phi, cal.s_pi
        if s_phi > 0:
            self.amp_phi = math.sqrt(s_phi)
            self.c = (cal.cross_moment + 0.5j * cal.gamma) / self.amp_phi
        else:
            self.amp_phi = 0.0
            self.c = 0j
        r2 = s_pi - abs(self.c) ** 2
        scale = max(s_pi, 1e-300)
        self.r = math.sqrt(r2) if r2 > 1e-10 * scale else 0.0
        self.modes = 2 if self.r > 0 else 1
        if s_phi == 0 and self.r == 0 and s_pi > 0:
            raise ValueError("degenerate calibration")
        b = _ladder(n)
        self._x1 = b + b.conj().T
        self._q1 = np.conj(self.c) * b + self.c * b.conj().T
        b2 = _ladder(n2)
        self._x2 = b2 + b2.conj().T
        self.dims = (n, n2) if self.modes == 2 else (n, 1)
        self._cache: dict[tuple[float, float], tuple[np.ndarray, np.ndarray]] = {}
        self.leakage = self._measure_leakage(max_coefficient)
        if self.leakage > leakage_tol:
            raise TruncationError(
                f"truncation {n} too small: top-level population {self.leakage:.2e} "
                f"(s_phi={s_phi:.3g}, s_pi={s_pi:.3g})"
            )

    # generators -----------------------------------------------------------
    def _factors(self, c_phi: float, c_pi: float) -> tuple[np.ndarray, np.ndarray]:
        key = (round(c_phi, 14), round(c_pi, 14))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        g1 = c_phi * self.amp_phi * self._x1 + c_pi * self._q1
        e1 = expm_hermitian(g1).data
        if self.modes == 2:
            e2 = expm_hermitian(c_pi * self.r * self._x2).data
        else:
            e2 = np.ones((1, 1), dtype=complex)
        self._cache[key] = (e1, e2)
        return e1, e2

    @property
    def phi_op(self) -> sp.csr_matrix:
        n2 = self.dims[1]
        return sp.kron(sp.csr_matrix(self.amp_phi * self._x1), sp.identity(n2), format="csr")

    @property
    def pi_op(self) -> sp.csr_matrix:
        n1, n2 = self.dims
        out = sp.kron(sp.csr_matrix(self._q1), sp.identity(n2), format="csr")
        if self.modes == 2:
            out = out + sp.kron(sp.identity(n1), sp.csr_matrix(self.r * self._x2), format="csr")
        return out

    def vacuum(self) -> np.ndarray:
        psi = np.zeros(self.dims, dtype=complex)
        psi[0, 0] = 1.0
        return psi

    def apply_word(self, word: DisplacementWord, psi: np.ndarray) -> np.ndarray:
        """Apply one word to field amplitudes of shape ``(..., n1, n2)``."""
        e1, e2 = self._factors(word.c_phi, word.c_pi)
        return word.phase * np.einsum("ab,...bc,dc->...ad", e1, psi, e2, optimize=True)

    def apply(self, words: Sequence[DisplacementWord], psi: np.ndarray) -> np.ndarray:
        """Apply an operator-ordered product (rightmost acts first)."""
        for w in reversed(tuple(words)):
            psi = self.apply_word(w, psi)
        return psi

    def state(self, words: Sequence[DisplacementWord]) -> np.ndarray:
        return self.apply(words, self.vacuum())

    def vacuum_expectation(self, words: Sequence[DisplacementWord] | DisplacementWord) -> complex:
        if isinstance(words, DisplacementWord):
            words = (words,)
        return complex(np.vdot(self.vacuum(), self.state(words)))

    def word_matrix(self, word: DisplacementWord) -> np.ndarray:
        """Dense matrix of a word; only sensible for small truncations."""
        e1, e2 = self._factors(word.c_phi, word.c_pi)
        return word.phase * np.kron(e1, e2)

    def commutator_leakage(self, max_occupation: int | None = None) -> float:
        """Max entry of ``[phi, Pi]/(i gamma) - I`` on the low-occupation block."""
        n1, n2 = self.dims
        occ = max_occupation if max_occupation is not None else self.truncation // 2
        phi, pi = self.phi_op.toarray(), self.pi_op.toarray()
        comm = phi @ pi - pi @ phi
        idx = [i * n2 + j for i in range(min(occ, n1)) for j in range(min(occ, n2))]
        block = comm[np.ix_(idx, idx)] / (1j * self.cal.gamma) - np.eye(len(idx))
        return float(np.max(np.abs(block)))

    def _measure_leakage(self, cmax: float) -> float:
        worst = 0.0
        cut1 = max(1, int(0.9 * self.dims[0]))
        cut2 = max(1, int(0.9 * self.dims[1]))
        for w in (DisplacementWord(cmax, 0.0), DisplacementWord(0.0, cmax), DisplacementWord(cmax, cmax)):
            psi = self.state((w,))
            p = np.abs(psi) ** 2
            tail = p[cut1:, :].sum() + (p[:, cut2:].sum() if self.modes == 2 else 0.0)
            worst = max(worst, float(tail))
        return worst


def truncation_for(cal: FieldCalibration, max_coefficient: float = 1.0, floor: int = 20) -> tuple[int, int]:
    """Per-mode truncations that comfortably hold words up to ``max_coefficient``.

    The first mode carries all of ``phi`` and part of ``Pi``; the second only
    the remainder of ``Pi``, whose variance is at most ``s_pi``.
    """

    def size(var):
        mean = max_coefficient**2 * var
        return int(math.ceil(mean + 12 * math.sqrt(mean) + floor))

    return size(cal.s_phi + cal.s_pi), size(cal.s_pi)


def eigenphase_residual_weyl(cal: FieldCalibration) -> float:
    """Closed form of the residual below: ``sqrt(2 - 2 exp(-s_pi/2))`` for either sign."""
    return math.sqrt(max(0.0, 2.0 - 2.0 * math.exp(-0.5 * cal.s_pi)))


def eigenphase_residual(backend: FockBackend, sign: int = +1) -> float:
    """``|| e^{i Pi}|s alpha> - e^{i s gamma}|s alpha> ||`` with ``|s alpha> = e^{i s phi}|0>``."""
    coh = backend.state((DisplacementWord.phi(sign),))
    kicked = backend.apply((DisplacementWord.pi(1.0),), coh)
    return float(np.linalg.norm(kicked - np.exp(1j * sign * backend.cal.gamma) * coh))


__all__ = [
    "GAMMA_TARGET",
    "DisplacementWord",
    "FieldCalibration",
    "FockBackend",
    "SmearingSpec",
    "calibrate_gamma",
    "coherent_overlap",
    "coupling_for_s_phi",
    "eigenphase_residual",
    "eigenphase_residual_weyl",
    "single_exponent_overlap",
    "spectral_integrals",
    "spectral_moments",
    "truncation_for",
    "vacuum_expectation",
    "weyl_product",
    "weyl_reduce",
]
