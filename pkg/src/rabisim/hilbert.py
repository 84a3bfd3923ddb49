"""Truncated qubit ⊗ Fock Hilbert space and the Rabi Hamiltonian.

Conventions (shared by every module):

- Units with ħ = 1 and all frequencies/rates in units of the cavity
  frequency ω (ω = 1 unless overridden).
- Fock space truncated at Q1 photons.  The joint basis is ordered with the
  ground-qubit block first: index ``i`` in ``0..Q1`` is |g, f_i⟩ and index
  ``Q1+1+m`` is |e, f_m⟩.  Q2 = 2·Q1 + 1, so the joint dimension is Q2 + 1.
- The qubit transition frequency may be modulated,
  Ω(t) = Ω₀·{1 + ε·sin[η(t)·t]} with a linear sweep η(t) = η₀ + α·t.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TruncationScheme:
    """Fock cutoff Q1 and the derived joint-space sizes."""

    q1: int

    def __post_init__(self):
        if self.q1 < 0 or int(self.q1) != self.q1:
            raise ValueError(f"Q1 must be a nonnegative integer, got {self.q1!r}")
        object.__setattr__(self, "q1", int(self.q1))

    @property
    def q2(self) -> int:
        return 2 * self.q1 + 1

    @property
    def n_fock(self) -> int:
        """Number of kept Fock states, Q1 + 1."""
        return self.q1 + 1

    @property
    def dim(self) -> int:
        """Joint qubit ⊗ field dimension, 2·(Q1 + 1) = Q2 + 1."""
        return 2 * (self.q1 + 1)


@dataclass(frozen=True)
class ModulationParams:
    """Relative sinusoidal modulation of the qubit frequency with a slow
    linear frequency sweep."""

    epsilon: float
    eta0: float
    alpha: float = 0.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("modulation amplitude epsilon must be >= 0")
        if self.epsilon > 0.5:
            warnings.warn(
                f"modulation amplitude epsilon={self.epsilon} is large; the "
                "weak-modulation assumption (epsilon << 1) is violated",
                stacklevel=2,
            )


@dataclass(frozen=True)
class ModelParams:
    """Rabi-model parameters: H = ω·n + Ω(t)·|e⟩⟨e| + g·X·σ_x."""

    Omega0: float
    g: float
    omega: float = 1.0
    modulation: ModulationParams | None = None

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("cavity frequency omega must be > 0")
        if self.Omega0 <= 0:
            raise ValueError("qubit frequency Omega0 must be > 0")
        if self.g < 0:
            raise ValueError("coupling g must be >= 0")


@dataclass(frozen=True)
class OperatorSet:
    """Dense joint-space operators in the canonical bare ordering."""

    trunc: TruncationScheme
    a: np.ndarray
    a_dagger: np.ndarray
    n_op: np.ndarray
    X: np.ndarray
    sigma_minus: np.ndarray
    sigma_plus: np.ndarray
    sigma_x: np.ndarray
    sigma_z: np.ndarray
    excited_projector: np.ndarray = field(repr=False, default=None)


def fock_ladder(n_fock: int) -> np.ndarray:
    """Truncated annihilation operator on the field space alone."""
    a = np.zeros((n_fock, n_fock), dtype=complex)
    m = np.arange(1, n_fock)
    a[m - 1, m] = np.sqrt(m)
    return a


def build_operators(trunc: TruncationScheme) -> OperatorSet:
    """Build all joint-space operators for the given truncation.

    Ordering: ground-qubit block first (|g,f_0⟩..|g,f_Q1⟩), then the
    excited-qubit block.  The qubit factor is the slow index, so every
    joint operator is a Kronecker product ``qubit ⊗ field``.
    """
    nf = trunc.n_fock
    id_f = np.eye(nf, dtype=complex)
    a_f = fock_ladder(nf)
    n_f = np.diag(np.arange(nf, dtype=float)).astype(complex)

    # Qubit matrices in the (|g⟩, |e⟩) ordering.
    sm_q = np.array([[0, 1], [0, 0]], dtype=complex)   # |g⟩⟨e|
    sp_q = np.array([[0, 0], [1, 0]], dtype=complex)   # |e⟩⟨g|
    sz_q = np.array([[-1, 0], [0, 1]], dtype=complex)
    pe_q = np.array([[0, 0], [0, 1]], dtype=complex)
    id_q = np.eye(2, dtype=complex)

    a = np.kron(id_q, a_f)
    return OperatorSet(
        trunc=trunc,
        a=a,
        a_dagger=a.conj().T,
        n_op=np.kron(id_q, n_f),
        X=a + a.conj().T,
        sigma_minus=np.kron(sm_q, id_f),
        sigma_plus=np.kron(sp_q, id_f),
        sigma_x=np.kron(sp_q + sm_q, id_f),
        sigma_z=np.kron(sz_q, id_f),
        excited_projector=np.kron(pe_q, id_f),
    )


def qubit_frequency(params: ModelParams, t: float) -> float:
    """Instantaneous qubit transition frequency Ω(t)."""
    mod = params.modulation
    if mod is None or mod.epsilon == 0.0:
        return params.Omega0
    eta = mod.eta0 + mod.alpha * t
    return params.Omega0 * (1.0 + mod.epsilon * np.sin(eta * t))


def build_hamiltonian(params: ModelParams, ops: OperatorSet, t: float = 0.0) -> np.ndarray:
    """Joint Hamiltonian H(t) = ω·n + Ω(t)·|e⟩⟨e| + g·X·σ_x.

    Hermitian by construction: every term is assembled as an exactly
    symmetric real matrix (no post-hoc symmetrization).
    """
    omega_t = qubit_frequency(params, t)
    return (
        params.omega * ops.n_op
        + omega_t * ops.excited_projector
        + params.g * (ops.X @ ops.sigma_x)
    )


def parity_operator(trunc: TruncationScheme) -> np.ndarray:
    """Z₂ parity P = σ_z·(−1)^n, which commutes with the Rabi Hamiltonian."""
    signs = (-1.0) ** np.arange(trunc.n_fock)
    return np.kron(np.diag([-1.0, 1.0]), np.diag(signs)).astype(complex)
