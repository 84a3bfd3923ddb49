"""Dressed-picture master equation: dressed basis, rates, and both solvers.

The interacting Hamiltonian is diagonalized once; dissipation then acts
between its eigenstates ("dressed states") |n⟩ with rates weighted by the
dressed matrix elements of σ_z, σ_x and X and by the reservoir spectral
density evaluated at each transition frequency Δ_kj = Λ_k − Λ_j.

Two equivalent representations are implemented:

- dressed basis: the coefficient matrix r_{N,M} obeys a secular system in
  which every coherence decouples (exact per-element exponential decay at
  rate Θ^{N,M} with rotation at Λ_N − Λ_M) and the populations follow a
  classical downward cascade.  Exact propagation is the default; an ODE
  path over the packed real vector is available for cross-checks.

- bare basis: the dissipator is contracted into twelve four-index tables
  W_{X,Y} acting on the (A, B, C, C†) blocks, with entries below a
  threshold pruned to sparsify the contraction.  This form admits a live
  time-dependent qubit frequency in the unitary part (the dressed states
  themselves are evaluated at the unmodulated parameters) and is the
  representation of choice for modulated scenarios.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from . import _kernels
from .errors import DimensionMismatch, EigenFailure, PositivityBreach
from .gksl import BareCoefficients, CoefficientTrajectory, GKSLSystem, RateParams, check_positivity
from .hilbert import ModelParams, TruncationScheme, fock_ladder, parity_operator
from .packing import HermitianPacking
from .rk import IntegratorConfig, integrate

DEGENERACY_TOL = 1e-10
DEFAULT_PRUNE_FACTOR = 1e-12


@dataclass
class DressedBasis:
    """Eigensystem of the Rabi Hamiltonian plus cached matrix elements.

    ``coefficients[i, n]`` is c_{i+1,n}: the amplitude of bare state i
    (canonical ordering) in eigenstate |n⟩; eigenvalues ascend.
    """

    trunc: TruncationScheme
    eigenvalues: np.ndarray
    coefficients: np.ndarray
    sigma_z_elems: np.ndarray | None = None
    sigma_x_elems: np.ndarray | None = None
    X_elems: np.ndarray | None = None

    @property
    def ground_block(self) -> np.ndarray:
        return self.coefficients[: self.trunc.n_fock]

    @property
    def excited_block(self) -> np.ndarray:
        return self.coefficients[self.trunc.n_fock :]


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Scale each column so its largest-magnitude entry is real positive."""
    idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    phases = lead / np.abs(lead)
    return vecs * phases.conj()[None, :]


def diagonalize(H: np.ndarray, trunc: TruncationScheme) -> DressedBasis:
    """Diagonalize H; ascending eigenvalues, deterministic eigenvectors.

    Near-degenerate clusters (gap < 1e−10·‖H‖) are rotated onto parity
    sectors — parity commutes with the Rabi Hamiltonian, so the rotated
    columns remain eigenvectors — and ordered by ascending parity within
    the cluster.  Column phases are fixed afterwards.
    """
    if H.shape != (trunc.dim, trunc.dim):
        raise DimensionMismatch(f"H shape {H.shape} does not match Q1={trunc.q1}")
    try:
        vals, vecs = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc

    scale = max(np.max(np.abs(vals)), 1.0)
    tol = DEGENERACY_TOL * scale
    P = parity_operator(trunc)
    i = 0
    D = vals.size
    while i < D:
        j = i + 1
        while j < D and vals[j] - vals[j - 1] < tol:
            j += 1
        if j - i > 1:
            sub = vecs[:, i:j]
            par = sub.conj().T @ P @ sub
            pvals, rot = np.linalg.eigh(par)
            vecs[:, i:j] = sub @ rot  # pvals ascend: parity −1 sector first
        i = j

    vecs = _fix_phases(vecs)
    return DressedBasis(trunc=trunc, eigenvalues=vals, coefficients=vecs)


def dressed_matrix_elements(basis: DressedBasis) -> DressedBasis:
    """Fill σ_z, σ_x and X matrix elements between dressed states.

    Assembled from the ground/excited coefficient blocks: σ_z flips the
    sign of the ground block, σ_x swaps the blocks, and X acts as the
    field ladder within each block.
    """
    Vg = basis.ground_block
    Ve = basis.excited_block
    basis.sigma_z_elems = -Vg.conj().T @ Vg + Ve.conj().T @ Ve
    basis.sigma_x_elems = Vg.conj().T @ Ve + Ve.conj().T @ Vg
    a_f = fock_ladder(basis.trunc.n_fock)
    Xf = a_f + a_f.conj().T
    basis.X_elems = Vg.conj().T @ Xf @ Vg + Ve.conj().T @ Xf @ Ve
    return basis


def build_dressed_basis(H: np.ndarray, trunc: TruncationScheme) -> DressedBasis:
    return dressed_matrix_elements(diagonalize(H, trunc))


@dataclass(frozen=True)
class SpectralDensity:
    """Reservoir spectral densities; zero for negative frequencies.

    White noise returns the base rate for Δ ≥ 0.  Ohmic relaxation scales
    as (Δ/ref)·exp(−Δ/cutoff) with ref = Ω for the qubit channel and
    ref = ω for the cavity channel (cutoffs default to 10× the refs);
    Ohmic pure dephasing stays flat.
    """

    kind: str
    kappa0: float
    gamma0: float
    gamma_phi: float
    Omega_ref: float
    omega_ref: float = 1.0
    Omega_c: float | None = None
    omega_c: float | None = None

    def __post_init__(self):
        if self.kind not in ("white", "ohmic"):
            raise ValueError(f"unknown spectral density kind {self.kind!r}")
        for name in ("kappa0", "gamma0", "gamma_phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.Omega_c is None:
            object.__setattr__(self, "Omega_c", 10.0 * self.Omega_ref)
        if self.omega_c is None:
            object.__setattr__(self, "omega_c", 10.0 * self.omega_ref)

    @classmethod
    def from_rates(cls, kind: str, rates: RateParams, model: ModelParams,
                   Omega_c: float | None = None, omega_c: float | None = None):
        return cls(kind=kind, kappa0=rates.kappa0, gamma0=rates.gamma0,
                   gamma_phi=rates.gamma_phi, Omega_ref=model.Omega0,
                   omega_ref=model.omega, Omega_c=Omega_c, omega_c=omega_c)

    def rate(self, channel: str, delta):
        """Rate of the given channel at transition frequency ``delta``."""
        delta = np.asarray(delta, dtype=float)
        if channel == "kappa":
            base, ref, cut = self.kappa0, self.omega_ref, self.omega_c
        elif channel == "gamma":
            base, ref, cut = self.gamma0, self.Omega_ref, self.Omega_c
        elif channel == "gamma_phi":
            base, ref, cut = self.gamma_phi, None, None
        else:
            raise ValueError(f"unknown channel {channel!r}")
        nonneg = delta >= 0
        if self.kind == "white" or channel == "gamma_phi":
            out = np.where(nonneg, base, 0.0)
        else:
            with np.errstate(over="ignore"):
                out = np.where(
                    nonneg, base * (delta / ref) * np.exp(-delta / cut), 0.0
                )
        return out if out.ndim else float(out)


@dataclass
class RateTable:
    """Dressed-state dissipation rates for one spectral density."""

    Phi: np.ndarray            # dephasing-channel amplitudes Φ_j
    Gamma: np.ndarray          # total downward rates Γ^{jk}, nonzero for k > j
    Gamma_phi: np.ndarray
    Gamma_kappa: np.ndarray
    Gamma_gamma: np.ndarray
    Theta: np.ndarray          # coherence decay rates Θ^{N,M}
    Upsilon: np.ndarray        # ½(Σ_{j<N}Γ^{jN} + Σ_{j<M}Γ^{jM}); diag = Σ_{j<N}Γ^{jN}
    gamma_phi0: float

    @property
    def cascade_out(self) -> np.ndarray:
        """Total outflow rate Υ^{N,N} of each dressed population."""
        return np.diag(self.Upsilon).copy()


def compute_rates(basis: DressedBasis, sd: SpectralDensity) -> RateTable:
    """Build the full rate table from the dressed matrix elements."""
    if basis.sigma_z_elems is None:
        dressed_matrix_elements(basis)
    lam = basis.eigenvalues
    D = lam.size
    dE = lam[None, :] - lam[:, None]          # dE[j, k] = Λ_k − Λ_j
    upper = np.triu(np.ones((D, D), dtype=bool), k=1)

    G_phi = 0.5 * sd.rate("gamma_phi", dE) * np.abs(basis.sigma_z_elems) ** 2
    G_kap = sd.rate("kappa", dE) * np.abs(basis.X_elems) ** 2
    G_gam = sd.rate("gamma", dE) * np.abs(basis.sigma_x_elems) ** 2
    G_phi = np.where(upper, G_phi, 0.0)
    G_kap = np.where(upper, G_kap, 0.0)
    G_gam = np.where(upper, G_gam, 0.0)
    Gamma = G_phi + G_kap + G_gam

    gamma_phi0 = float(sd.rate("gamma_phi", 0.0))
    Phi = np.sqrt(gamma_phi0 / 2.0) * np.diag(basis.sigma_z_elems).real

    ups_diag = Gamma.sum(axis=0)              # Σ_{j<N} Γ^{jN}
    Upsilon = 0.5 * (ups_diag[:, None] + ups_diag[None, :])
    szd = np.diag(basis.sigma_z_elems).real
    Theta = 0.25 * gamma_phi0 * (szd[:, None] - szd[None, :]) ** 2 + Upsilon

    return RateTable(
        Phi=Phi, Gamma=Gamma, Gamma_phi=G_phi, Gamma_kappa=G_kap,
        Gamma_gamma=G_gam, Theta=Theta, Upsilon=Upsilon, gamma_phi0=gamma_phi0,
    )


def dme_rhs_dressed(r: np.ndarray, basis: DressedBasis, rates: RateTable) -> np.ndarray:
    """dr/dt of the dressed coefficient matrix (secular structure).

    Coherences rotate at Λ_N − Λ_M and decay at Θ^{N,M}; populations obey
    the downward cascade and never couple to coherences.
    """
    lam = basis.eigenvalues
    dr = (-1j * (lam[:, None] - lam[None, :]) - rates.Theta) * r
    pops = np.diag(r)
    gain = rates.Gamma @ pops                 # row N: Σ_{k>N} Γ^{Nk} r_kk
    dr[np.diag_indices_from(dr)] += gain
    return dr


def _population_generator(rates: RateTable) -> np.ndarray:
    """Generator of the classical population cascade ṗ = G p."""
    G = rates.Gamma.copy()
    G[np.diag_indices_from(G)] = -rates.cascade_out
    return G


class DressedTrajectory:
    """Dressed coefficient matrices r(t) sampled on a time grid."""

    def __init__(self, basis: DressedBasis, times: np.ndarray, r_samples: np.ndarray):
        self.basis = basis
        self.times = np.asarray(times, dtype=float)
        self.r_samples = r_samples

    def __len__(self):
        return self.times.size

    def r(self, i: int) -> np.ndarray:
        return self.r_samples[i]

    def to_bare(self) -> CoefficientTrajectory:
        """Convert every sample to packed bare-basis blocks."""
        from .packing import BarePacking

        packing = BarePacking(self.basis.trunc)
        packed = np.empty((len(self), packing.length))
        for i in range(len(self)):
            coeffs = dressed_to_bare(self.r_samples[i], self.basis)
            packed[i] = packing.pack(coeffs.A, coeffs.B, coeffs.C, check=False)
        return CoefficientTrajectory(
            trunc=self.basis.trunc, times=self.times, packed=packed, packing=packing
        )


def evolve_dme_dressed(
    r0: np.ndarray,
    basis: DressedBasis,
    rates: RateTable,
    grid,
    method: str = "exact",
    cfg: IntegratorConfig | None = None,
) -> DressedTrajectory:
    """Propagate r(t) in the dressed basis.

    method='exact' (default) uses the closed-form solution: each coherence
    evolves as r_{N,M}(0)·exp[(−i(Λ_N−Λ_M) − Θ^{N,M})·t] and populations
    through the exponential of the triangular cascade generator.
    method='ode' integrates the packed real system instead.
    """
    times = np.asarray(grid.times if hasattr(grid, "times") else grid, dtype=float)
    D = basis.eigenvalues.size
    if r0.shape != (D, D):
        raise DimensionMismatch(f"r0 shape {r0.shape}, expected {(D, D)}")

    if method == "ode":
        packing = HermitianPacking(D)
        y0 = packing.pack(r0)

        def rhs(t, Y):
            return packing.pack(dme_rhs_dressed(packing.unpack(Y), basis, rates),
                                check=False)

        samples = integrate(rhs, y0, times, cfg)
        r_samples = np.empty((times.size, D, D), dtype=complex)
        for i in range(times.size):
            r_samples[i] = packing.unpack(samples[i])
        return DressedTrajectory(basis, times, r_samples)

    if method != "exact":
        raise ValueError(f"unknown method {method!r}")

    lam = basis.eigenvalues
    Z = -1j * (lam[:, None] - lam[None, :]) - rates.Theta
    off = ~np.eye(D, dtype=bool)
    G = _population_generator(rates)

    r_samples = np.empty((times.size, D, D), dtype=complex)
    pops = np.diag(r0).copy()
    r_samples[0] = r0
    expm_cache: dict[float, np.ndarray] = {}
    for i in range(1, times.size):
        t = times[i]
        r_t = np.where(off, r0 * np.exp(Z * t), 0.0)
        dt = times[i] - times[i - 1]
        E = expm_cache.get(dt)
        if E is None:
            E = scipy.linalg.expm(G * dt)
            expm_cache[dt] = E
        pops = E @ pops
        r_t[np.diag_indices(D)] = pops
        r_samples[i] = r_t
    return DressedTrajectory(basis, times, r_samples)


def dressed_to_bare(r: np.ndarray, basis: DressedBasis) -> BareCoefficients:
    """Map dressed coefficients r to the bare-basis blocks (A, B, C)."""
    Vg = basis.ground_block
    Ve = basis.excited_block
    return BareCoefficients(
        trunc=basis.trunc,
        A=Vg @ r @ Vg.conj().T,
        B=Ve @ r @ Ve.conj().T,
        C=Vg @ r @ Ve.conj().T,
    )


def bare_to_dressed(coeffs: BareCoefficients, basis: DressedBasis) -> np.ndarray:
    """Inverse map: r = V† ρ V, partitioned through the coefficient blocks."""
    V = basis.coefficients
    return V.conj().T @ coeffs.to_density() @ V


# --------------------------------------------------------------------------
# Bare-basis representation of the dressed dissipator: W tensors.
# --------------------------------------------------------------------------

_BLOCK_LEGS = {"A": ("g", "g"), "B": ("e", "e"), "C": ("g", "e"), "D": ("e", "g")}
W_BLOCK_KEYS = [(d, s) for d in "ABC" for s in "ABCD"]


@dataclass
class WTensors:
    """Sparse four-index dissipation tables W_{X,Y}^{(N,M,n,m)}.

    Each table is stored as a (Q1+1)²×(Q1+1)² sparse matrix mapping the
    row-major vectorized source block to the vectorized destination block.
    Entries with magnitude below ``epsilon`` were pruned after assembly.
    """

    trunc: TruncationScheme
    blocks: dict
    epsilon: float
    max_abs: float
    fill_ratio: float
    _combined: scipy.sparse.csr_matrix | None = field(default=None, repr=False)

    def combined(self) -> scipy.sparse.csr_matrix:
        """Single sparse map [vecA; vecB; vecC; vecC†] → [dA; dB; dC]."""
        if self._combined is None:
            rows = [[self.blocks[(d, s)] for s in "ABCD"] for d in "ABC"]
            self._combined = scipy.sparse.bmat(rows, format="csr")
        return self._combined


def compute_w_tensors(
    basis: DressedBasis,
    rates: RateTable,
    epsilon_prune: float | None = None,
    epsilon_rel: float = DEFAULT_PRUNE_FACTOR,
) -> WTensors:
    """Contract the dressed dissipator into the twelve bare-basis tables.

    The dephasing channel contributes a separable product of the
    transfer matrix VΦV† plus anticommutator corrections; each downward
    jump contributes projector products weighted by Γ^{jk}.  The same
    anticommutator bookkeeping yields the Kronecker-delta terms, which
    fire only when the destination and source legs live in the same
    qubit block.

    ``epsilon_prune`` is an absolute threshold; when omitted it defaults
    to ``epsilon_rel`` × max|W| (pruning is applied after assembly; the
    reported fill ratio is post-pruning).
    """
    V = basis.coefficients
    n1 = basis.trunc.n_fock
    legs = {"g": basis.ground_block, "e": basis.excited_block}

    Phi = rates.Phi
    half = 0.5 * (Phi**2 + rates.cascade_out)
    # Transfer matrices between bare legs: (block_a · diag(w) · block_b†).
    gphi = {
        (a, b): (legs[a] * Phi[None, :]) @ legs[b].conj().T
        for a in "ge" for b in "ge"
    }
    ghalf = {
        (a, b): (legs[a] * half[None, :]) @ legs[b].conj().T
        for a in "ge" for b in "ge"
    }
    eye = np.eye(n1)

    dense = {}
    for dest, src in W_BLOCK_KEYS:
        d1, d2 = _BLOCK_LEGS[dest]   # legs of (N, M)
        s1, s2 = _BLOCK_LEGS[src]    # legs of (n, m)
        R1, R2 = legs[d1], legs[d2]
        S1, S2 = legs[s1], legs[s2]

        P1 = gphi[(d1, s1)]          # Σ_j Φ_j c_{N leg} c*_{n leg}
        P2 = gphi[(d2, s2)]
        W4 = np.einsum("Nn,Mm->NMnm", P1, P2.conj())

        if s2 == d2:                 # column legs match: δ_{m,M} corrections
            W4 -= np.einsum("Nn,Mm->NMnm", ghalf[(d1, s1)], eye)
        if s1 == d1:                 # row legs match: δ_{n,N} corrections
            W4 -= np.einsum("Nn,Mm->NMnm", eye, ghalf[(d2, s2)].conj())

        # Jump gain Σ_{j<k} Γ^{jk} · (dest projector onto j) ⊗ (source onto k)
        J1 = np.einsum("Nj,Mj->NMj", R1, R2.conj()).reshape(n1 * n1, -1)
        J2 = np.einsum("nk,mk->nmk", S1.conj(), S2).reshape(n1 * n1, -1)
        W4 += (J1 @ rates.Gamma @ J2.T).reshape(n1, n1, n1, n1)

        dense[(dest, src)] = W4.reshape(n1 * n1, n1 * n1)

    max_abs = max(np.max(np.abs(M)) for M in dense.values())
    eps = epsilon_prune if epsilon_prune is not None else epsilon_rel * max_abs
    nnz = 0
    blocks = {}
    for key, M in dense.items():
        M[np.abs(M) < eps] = 0.0
        sp = scipy.sparse.csr_matrix(M)
        sp.eliminate_zeros()
        blocks[key] = sp
        nnz += sp.nnz
    fill = nnz / (12 * (n1 * n1) ** 2)
    return WTensors(trunc=basis.trunc, blocks=blocks, epsilon=float(eps),
                    max_abs=float(max_abs), fill_ratio=float(fill))


class DMEBareSystem:
    """Right-hand side of the bare-basis dressed master equation.

    Unitary part identical to the GKSL system with all bare rates zero
    (time-dependent Ω(t) evaluated live); dissipative part contracted
    from the pruned W tensors.
    """

    def __init__(self, model: ModelParams, w: WTensors, backend: str = "auto"):
        self.model = model
        self.w = w
        self.trunc = w.trunc
        self._unitary = GKSLSystem(model, RateParams(), w.trunc, backend=backend)
        self.packing = self._unitary.packing
        self._wc = w.combined()
        self._n2 = w.trunc.n_fock**2
        self._use_kernel = self._unitary._use_kernel
        self._src = np.empty(4 * self._n2, dtype=complex)

    def rhs(self, t: float, Y: np.ndarray) -> np.ndarray:
        n1 = self.trunc.n_fock
        n2 = self._n2
        if self._use_kernel:
            out = self._unitary.rhs(t, Y)
            _kernels.packed_to_sources(Y, self._src, n1)
            dvec = self._wc @ self._src
            _kernels.add_sources_to_packed(dvec, out, n1)
            return out
        A, B, C = self.packing.unpack(Y)
        dA, dB, dC = self._unitary.rhs_blocks(t, A, B, C)
        src = np.concatenate(
            [A.ravel(), B.ravel(), C.ravel(), C.conj().T.ravel()]
        )
        out = self._wc @ src
        dA += out[:n2].reshape(n1, n1)
        dB += out[n2 : 2 * n2].reshape(n1, n1)
        dC += out[2 * n2 :].reshape(n1, n1)
        return self.packing.pack(dA, dB, dC, check=False)


def evolve_dme_bare(
    rho0: BareCoefficients,
    model: ModelParams,
    w: WTensors,
    grid,
    cfg: IntegratorConfig | None = None,
    positivity_check: bool = True,
) -> CoefficientTrajectory:
    """Integrate the bare-basis dressed master equation."""
    if rho0.trunc.q1 != w.trunc.q1:
        raise DimensionMismatch("initial state and W tensors use different Q1")
    system = DMEBareSystem(model, w)
    y0 = system.packing.pack(rho0.A, rho0.B, rho0.C)
    samples = integrate(system.rhs, y0, grid, cfg)
    traj = CoefficientTrajectory(
        trunc=rho0.trunc,
        times=np.asarray(grid.times if hasattr(grid, "times") else grid, dtype=float),
        packed=samples,
        packing=system.packing,
    )
    if positivity_check:
        check_positivity(traj)
    return traj
