"""Zero-temperature GKSL master-equation dynamics over bare-basis blocks.

The joint density operator is held as the blocks (A, B, C) of

    ρ = Σ A_nm |g,f_{n-1}⟩⟨g,f_{m-1}| + B_nm |e,f_{n-1}⟩⟨e,f_{m-1}|
        + C_nm |g,f_{n-1}⟩⟨e,f_{m-1}| + C*_mn |e,f_{n-1}⟩⟨g,f_{m-1}|

and evolved through the coupled ODE system for the packed real vector Y.
The right-hand side is evaluated directly from the index formulas
(matrix-free); the dense superoperator is never materialized, which keeps
a single evaluation at O(Q1²) and makes Q1 ≈ 110 runs feasible.

Index convention: all block arrays are 0-based (photon number = index),
while the documented coefficient laws use the 1-based labels; the mapping
is fixed by the packing module and locked by round-trip tests.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, PositivityBreach
from .hilbert import ModelParams, TruncationScheme, qubit_frequency
from .packing import BarePacking
from .rk import IntegratorConfig, integrate


@dataclass(frozen=True)
class RateParams:
    """Bare damping/dephasing rates (units of ω)."""

    kappa0: float = 0.0
    gamma0: float = 0.0
    gamma_phi: float = 0.0

    def __post_init__(self):
        for name in ("kappa0", "gamma0", "gamma_phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass
class BareCoefficients:
    """The (A, B, C) blocks of the joint density operator."""

    trunc: TruncationScheme
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def trace(self) -> float:
        return float(np.trace(self.A).real + np.trace(self.B).real)

    def to_density(self) -> np.ndarray:
        """Assemble the full (Q2+1)×(Q2+1) joint density matrix."""
        top = np.hstack([self.A, self.C])
        bottom = np.hstack([self.C.conj().T, self.B])
        return np.vstack([top, bottom])

    @classmethod
    def from_density(cls, rho: np.ndarray, trunc: TruncationScheme) -> "BareCoefficients":
        n1 = trunc.n_fock
        if rho.shape != (2 * n1, 2 * n1):
            raise DimensionMismatch(
                f"density matrix shape {rho.shape} does not match Q1={trunc.q1}"
            )
        return cls(
            trunc=trunc,
            A=rho[:n1, :n1].copy(),
            B=rho[n1:, n1:].copy(),
            C=rho[:n1, n1:].copy(),
        )

    @classmethod
    def from_field_state(
        cls, state, qubit_excited: bool = False
    ) -> "BareCoefficients":
        """Product initial state: qubit ⊗ generated field state."""
        trunc = state.trunc
        n1 = trunc.n_fock
        if state.pure_amplitudes is not None:
            chi = state.pure_amplitudes
            block = np.outer(chi, chi.conj())
        else:
            block = np.diag(state.diagonal_populations).astype(complex)
        zero = np.zeros((n1, n1), dtype=complex)
        if qubit_excited:
            return cls(trunc=trunc, A=zero.copy(), B=block, C=zero.copy())
        return cls(trunc=trunc, A=block, B=zero.copy(), C=zero.copy())

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.to_density())[0])


# -- block shift helpers (zero padding at the truncation boundary) ----------

def _up_rows(M, out):
    out[:] = 0.0
    out[:-1] = M[1:]
    return out


def _dn_rows(M, out):
    out[:] = 0.0
    out[1:] = M[:-1]
    return out


def _up_cols(M, out):
    out[:] = 0.0
    out[:, :-1] = M[:, 1:]
    return out


def _dn_cols(M, out):
    out[:] = 0.0
    out[:, 1:] = M[:, :-1]
    return out


def _up_both(M, out):
    out[:] = 0.0
    out[:-1, :-1] = M[1:, 1:]
    return out


class GKSLSystem:
    """Matrix-free right-hand side and evolution driver for the GKSL ODEs.

    With numba available the packed right-hand side runs as a compiled
    loop over the index formulas (``backend="auto"``); ``backend="numpy"``
    forces the vectorized block path, which is the reference
    implementation the kernel is tested against.
    """

    def __init__(self, model: ModelParams, rates: RateParams, trunc: TruncationScheme,
                 backend: str = "auto"):
        self.model = model
        self.rates = rates
        self.trunc = trunc
        self.packing = BarePacking(trunc)
        self._use_kernel = _kernels.HAVE_NUMBA and backend != "numpy"
        n1 = trunc.n_fock
        nv = np.arange(n1, dtype=float)
        self._s1 = np.sqrt(nv + 1.0)       # √N  at 0-based row n (N = n+1)
        self._s0 = np.sqrt(nv)             # √(N−1)
        self._phase = -1j * model.omega * (nv[:, None] - nv[None, :])
        self._s11 = np.outer(self._s1, self._s1)
        self._decay = 0.5 * (nv[:, None] + nv[None, :])   # (N+M−2)/2
        self._scratch = np.empty((n1, n1), dtype=complex)

    # -- unitary part, shared with the bare-basis dressed solver ------------

    def unitary_blocks(self, A, B, C, omega_t):
        """−i[H(t), ρ] expressed on the (A, B, C) blocks."""
        g = self.model.g
        s0c, s1c = self._s0[:, None], self._s1[:, None]
        s0r, s1r = self._s0[None, :], self._s1[None, :]
        w = self._scratch

        dA = self._phase * A
        dB = self._phase * B
        dC = (self._phase + 1j * omega_t) * C
        if g != 0.0:
            CcT = C.conj().T
            dA -= (1j * g) * (
                s1c * _up_rows(CcT, w)
                + s0c * _dn_rows(CcT, np.empty_like(w))
                - s0r * _dn_cols(C, np.empty_like(w))
                - s1r * _up_cols(C, np.empty_like(w))
            )
            dB -= (1j * g) * (
                s1c * _up_rows(C, np.empty_like(w))
                + s0c * _dn_rows(C, np.empty_like(w))
                - s0r * _dn_cols(CcT, np.empty_like(w))
                - s1r * _up_cols(CcT, np.empty_like(w))
            )
            dC -= (1j * g) * (
                s1c * _up_rows(B, np.empty_like(w))
                + s0c * _dn_rows(B, np.empty_like(w))
                - s0r * _dn_cols(A, np.empty_like(w))
                - s1r * _up_cols(A, np.empty_like(w))
            )
        return dA, dB, dC

    def rhs_blocks(self, t, A, B, C):
        omega_t = qubit_frequency(self.model, t)
        dA, dB, dC = self.unitary_blocks(A, B, C, omega_t)
        k0 = self.rates.kappa0
        g0 = self.rates.gamma0
        gp = self.rates.gamma_phi
        if k0 != 0.0:
            w = np.empty_like(A)
            dA += k0 * (self._s11 * _up_both(A, w)) - (k0 * self._decay) * A
            dB += k0 * (self._s11 * _up_both(B, w)) - (k0 * self._decay) * B
            dC += k0 * (self._s11 * _up_both(C, w)) - (k0 * self._decay) * C
        if g0 != 0.0:
            dA += g0 * B
            dB -= g0 * B
            dC -= (0.5 * g0) * C
        if gp != 0.0:
            dC -= gp * C
        return dA, dB, dC

    def rhs(self, t: float, Y: np.ndarray) -> np.ndarray:
        omega_t = qubit_frequency(self.model, t)
        if self._use_kernel:
            out = np.empty_like(Y)
            _kernels.gksl_packed_rhs(
                Y, out, self.trunc.n_fock, self.model.omega, omega_t,
                self.model.g, self.rates.kappa0, self.rates.gamma0,
                self.rates.gamma_phi, self._s0, self._s1,
            )
            return out
        A, B, C = self.packing.unpack(Y)
        dA, dB, dC = self.rhs_blocks(t, A, B, C)
        return self.packing.pack(dA, dB, dC, check=False)


def gksl_rhs(
    Y: np.ndarray,
    t: float,
    model: ModelParams,
    rates: RateParams,
    trunc: TruncationScheme,
) -> np.ndarray:
    """One-shot dY/dt evaluation (convenience around :class:`GKSLSystem`)."""
    return GKSLSystem(model, rates, trunc).rhs(t, Y)


@dataclass
class CoefficientTrajectory:
    """Packed coefficient samples along a time grid.

    Stores the packed real vectors (memory ≈ samples × (Q2+1)² doubles);
    callers unpack samples lazily via :meth:`coefficients`.
    """

    trunc: TruncationScheme
    times: np.ndarray
    packed: np.ndarray
    packing: BarePacking = field(repr=False, default=None)
    min_eigenvalues: np.ndarray | None = None

    def __post_init__(self):
        if self.packing is None:
            self.packing = BarePacking(self.trunc)

    def __len__(self):
        return self.times.size

    def coefficients(self, i: int) -> BareCoefficients:
        A, B, C = self.packing.unpack(self.packed[i])
        return BareCoefficients(trunc=self.trunc, A=A, B=B, C=C)

    def __iter__(self):
        return (self.coefficients(i) for i in range(len(self)))


POSITIVITY_WARN_THRESHOLD = -1e-6


def check_positivity(traj: CoefficientTrajectory) -> np.ndarray:
    """Minimum eigenvalue of ρ at every sample; warns below −1e−6."""
    mins = np.empty(len(traj))
    for i in range(len(traj)):
        mins[i] = traj.coefficients(i).min_eigenvalue()
    worst = mins.min()
    if worst < POSITIVITY_WARN_THRESHOLD:
        warnings.warn(
            f"density matrix developed min eigenvalue {worst:.3e}",
            PositivityBreach,
            stacklevel=2,
        )
    traj.min_eigenvalues = mins
    return mins


def evolve_gksl(
    rho0: BareCoefficients,
    model: ModelParams,
    rates: RateParams,
    grid,
    cfg: IntegratorConfig | None = None,
    positivity_check: bool = True,
) -> CoefficientTrajectory:
    """Integrate the GKSL ODE system and sample the blocks on ``grid``."""
    system = GKSLSystem(model, rates, rho0.trunc)
    y0 = system.packing.pack(rho0.A, rho0.B, rho0.C)
    samples = integrate(system.rhs, y0, grid, cfg)
    traj = CoefficientTrajectory(
        trunc=rho0.trunc,
        times=np.asarray(grid.times if hasattr(grid, "times") else grid, dtype=float),
        packed=samples,
    )
    if positivity_check:
        check_positivity(traj)
    return traj
