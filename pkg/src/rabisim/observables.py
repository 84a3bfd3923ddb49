"""Scalar and distribution observables over bare-basis coefficients.

Everything here is a pure function of a :class:`BareCoefficients`
snapshot: qubit excitation, photon statistics (mean, Mandel Q), the
closed-form subsystem purities, negativity via the partial transpose,
ground-state post-selection, and the quantum-Fisher-information
metrology block (phase and displacement estimation) of the post-selected
field state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EigenFailure, PositivityBreach, ZeroProbability
from .gksl import BareCoefficients
from .hilbert import fock_ladder

QFI_PAIR_FLOOR = 1e-12
NEGATIVE_MASS_HARD_LIMIT = 1e-6


@dataclass
class ObservableRecord:
    """One row of the scalar time series (post-selection block optional)."""

    t: float
    P_e: float
    n_mean: float
    mandel_Q: float
    negativity: float
    purity_qubit: float
    purity_field: float
    P_g: float | None = None
    n_mean_ps: float | None = None
    mandel_Q_ps: float | None = None
    F_ph: float | None = None
    M_av: float | None = None
    M_opt: float | None = None


@dataclass
class MetrologyReport:
    """Fisher-information quantities of one field state."""

    F_ph: float
    F_disp: np.ndarray
    M_av: float
    M_opt: float
    phase_advantage: bool      # F_ph > ⟨n⟩ (flag as defined, not reinterpreted)
    disp_advantage_av: bool    # M_av > 1
    disp_advantage_opt: bool   # M_opt > 1


def reduced_states(coeffs: BareCoefficients) -> tuple[np.ndarray, np.ndarray]:
    """Qubit and field reduced density matrices (both Hermitian)."""
    a = np.trace(coeffs.A)
    b = np.trace(coeffs.B)
    c = np.trace(coeffs.C)
    rho_q = np.array([[a, c], [np.conj(c), b]], dtype=complex)
    rho_c = coeffs.A + coeffs.B
    return rho_q, rho_c


def field_photon_moments(rho_c: np.ndarray) -> tuple[float, float]:
    diag = np.diag(rho_c).real
    n = np.arange(diag.size, dtype=float)
    return float(np.dot(n, diag)), float(np.dot(n * n, diag))


def mandel_q(n_mean: float, n2_mean: float) -> float:
    """(Var(n) − ⟨n⟩)/⟨n⟩; defined as 0 at ⟨n⟩ = 0 (vacuum is the
    Poissonian limit and 0/0 would poison output streams)."""
    if abs(n_mean) < 1e-300:
        return 0.0
    return (n2_mean - n_mean * n_mean - n_mean) / n_mean


def scalar_observables(coeffs: BareCoefficients, t: float = 0.0) -> ObservableRecord:
    """Core scalar row: P_e, ⟨n⟩, Mandel Q, negativity and both purities.

    Purities use the closed forms Π_q = A² + B² + 2|C|² over the block
    traces and Π_c = Σ|D_NM|² with D = A + B.
    """
    a = np.trace(coeffs.A).real
    b = np.trace(coeffs.B).real
    c = np.trace(coeffs.C)
    D = coeffs.A + coeffs.B
    n_mean, n2_mean = field_photon_moments(D)
    return ObservableRecord(
        t=t,
        P_e=float(b),
        n_mean=n_mean,
        mandel_Q=mandel_q(n_mean, n2_mean),
        negativity=negativity(coeffs),
        purity_qubit=float(a * a + b * b + 2.0 * abs(c) ** 2),
        purity_field=float(np.sum(np.abs(D) ** 2)),
    )


def negativity(coeffs: BareCoefficients, subsystem: str = "qubit") -> float:
    """|Σ negative eigenvalues| of the partially transposed joint state.

    Transposing the qubit index swaps the C and C† block positions;
    transposing the field transposes every block in place.  Both choices
    give the same value.
    """
    if subsystem == "qubit":
        top = np.hstack([coeffs.A, coeffs.C.conj().T])
        bottom = np.hstack([coeffs.C, coeffs.B])
    elif subsystem == "field":
        top = np.hstack([coeffs.A.T, coeffs.C.T])
        bottom = np.hstack([coeffs.C.conj(), coeffs.B.T])
    else:
        raise ValueError(f"unknown subsystem {subsystem!r}")
    rho_t = np.vstack([top, bottom])
    try:
        eigs = np.linalg.eigvalsh(rho_t)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    return float(-eigs[eigs < 0].sum())


def postselect_ground(coeffs: BareCoefficients) -> tuple[np.ndarray, float]:
    """Field state conditioned on finding the qubit in |g⟩, and P_g."""
    p_g = float(np.trace(coeffs.A).real)
    if p_g < 1e-12:
        raise ZeroProbability(f"ground-state probability {p_g:.3e} is ~0")
    return coeffs.A / p_g, p_g


def _clipped_spectrum(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a nominally PSD matrix; clip round-off negatives.

    Negative mass below 1e−6 is clipped and renormalized with a warning;
    beyond that it is a real positivity violation and raises.
    """
    try:
        p, U = np.linalg.eigh(rho)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    neg = -p[p < 0].sum()
    if neg > NEGATIVE_MASS_HARD_LIMIT:
        raise EigenFailure(
            f"total negative eigenvalue mass {neg:.3e} exceeds "
            f"{NEGATIVE_MASS_HARD_LIMIT:g}; state is not physically positive"
        )
    if neg > 0:
        if neg > 1e-10:
            warnings.warn(
                f"clipped negative eigenvalue mass {neg:.3e}",
                PositivityBreach,
                stacklevel=3,
            )
        p = np.clip(p, 0.0, None)
        p = p / p.sum()
    return p, U


def _pair_weights(p: np.ndarray, floor: float) -> np.ndarray:
    """(p_i − p_j)²/(p_i + p_j) with pairs below the floor dropped."""
    psum = p[:, None] + p[None, :]
    pdif = p[:, None] - p[None, :]
    keep = psum > floor
    w = np.zeros_like(psum)
    w[keep] = pdif[keep] ** 2 / psum[keep]
    return w


def qfi_phase(rho_c: np.ndarray, p_floor: float = QFI_PAIR_FLOOR) -> float:
    """Quantum Fisher information for phase rotation (generator n̂).

    Pair-sum convention: F = Σ_{ij} (p_i−p_j)²/(p_i+p_j)·|⟨i|n̂|j⟩|², so a
    pure state gives exactly 2·Var(n).  Fock states give 0.
    """
    p, U = _clipped_spectrum(rho_c)
    w = _pair_weights(p, p_floor)
    nvals = np.arange(rho_c.shape[0], dtype=float)
    Nij = U.conj().T @ (nvals[:, None] * U)
    return float(np.sum(w * np.abs(Nij) ** 2))


def fisher_displacement(
    rho_c: np.ndarray, p_floor: float = QFI_PAIR_FLOOR
) -> tuple[np.ndarray, float, float]:
    """2×2 Fisher matrix for phase-space displacement estimation.

    Quadrature generators x⁽¹⁾ = a + a†, x⁽²⁾ = (a − a†)/i.  Returns
    (F_disp, M_av = ¼·tr F, M_opt = ½·λ_max).  Vacuum and coherent states
    sit exactly on the classical boundary M_av = M_opt = 1.
    """
    p, U = _clipped_spectrum(rho_c)
    w = _pair_weights(p, p_floor)
    a = fock_ladder(rho_c.shape[0])
    quads = (a + a.conj().T, -1j * (a - a.conj().T))
    elems = [U.conj().T @ q @ U for q in quads]
    F = np.empty((2, 2), dtype=complex)
    for k in range(2):
        for l in range(2):
            F[k, l] = np.sum(w * elems[k] * elems[l].T)
    resid = np.max(np.abs(F.imag))
    assert resid < 1e-10, f"Fisher matrix imaginary residue {resid:.3e}"
    F = F.real
    evals = np.linalg.eigvalsh(F)
    return F, float(0.25 * np.trace(F)), float(0.5 * evals[-1])


def metrology_report(rho_c: np.ndarray, p_floor: float = QFI_PAIR_FLOOR) -> MetrologyReport:
    f_ph = qfi_phase(rho_c, p_floor)
    f_disp, m_av, m_opt = fisher_displacement(rho_c, p_floor)
    n_mean, _ = field_photon_moments(rho_c)
    return MetrologyReport(
        F_ph=f_ph, F_disp=f_disp, M_av=m_av, M_opt=m_opt,
        phase_advantage=bool(f_ph > n_mean),
        disp_advantage_av=bool(m_av > 1.0),
        disp_advantage_opt=bool(m_opt > 1.0),
    )


def photon_distribution(coeffs: BareCoefficients, clip_warn: float = 1e-8) -> np.ndarray:
    """P(n) from the diagonal of D = A + B; round-off negatives clipped."""
    probs = np.diag(coeffs.A + coeffs.B).real.copy()
    worst = probs.min()
    if worst < -clip_warn:
        warnings.warn(
            f"photon probability dipped to {worst:.3e}; clipping at 0",
            PositivityBreach,
            stacklevel=2,
        )
    return np.clip(probs, 0.0, None)


def field_distribution(rho_c: np.ndarray, clip_warn: float = 1e-8) -> np.ndarray:
    """P(n) of an explicit field matrix (e.g. the post-selected state)."""
    probs = np.diag(rho_c).real.copy()
    if probs.min() < -clip_warn:
        warnings.warn(
            f"photon probability dipped to {probs.min():.3e}; clipping at 0",
            PositivityBreach,
            stacklevel=2,
        )
    return np.clip(probs, 0.0, None)


def observe(
    coeffs: BareCoefficients,
    t: float,
    postselect: bool = False,
    with_metrology: bool = False,
) -> ObservableRecord:
    """Full observable row; optionally adds the post-selection block.

    The metrology triple (F_ph, M_av, M_opt) costs an eigendecomposition
    per call and is only filled when ``with_metrology`` is set (snapshot
    cadence); the cheap post-selected scalars are always filled when
    ``postselect`` is.
    """
    rec = scalar_observables(coeffs, t)
    if postselect:
        rho_ps, p_g = postselect_ground(coeffs)
        n_ps, n2_ps = field_photon_moments(rho_ps)
        rec.P_g = p_g
        rec.n_mean_ps = n_ps
        rec.mandel_Q_ps = mandel_q(n_ps, n2_ps)
        if with_metrology:
            rep = metrology_report(rho_ps)
            rec.F_ph = rep.F_ph
            rec.M_av = rep.M_av
            rec.M_opt = rep.M_opt
    return rec
