"""Initial cavity-field states via truncated recurrences.

Every generator returns amplitudes (or diagonal populations, for the
thermal state) over the kept Fock states 0..Q1 together with the tail
mass left beyond the cutoff.  Generators fail loudly when the tail
exceeds the tolerance instead of silently renormalizing — silent
renormalization hides truncation bias in long evolutions.

The squeezed-coherent amplitudes use the Hermite-ratio chain
K_n = H_{n+1}(x)/H_n(x); near a polynomial zero the ratio collapses and
the chain is restarted from a direct log-space evaluation of the closed
form at that index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateState,
    DimensionMismatch,
    HermiteZeroEncountered,
    TruncationTooSmall,
)
from .hilbert import TruncationScheme

DEFAULT_TAIL_TOL = 1e-8
FIELD_KINDS = ("coherent", "odd_cat", "squeezed_coherent", "squeezed_vacuum",
               "thermal", "fock")
_K_TINY = 1e-300


@dataclass(frozen=True)
class FieldStateSpec:
    """Which field state to generate; only the fields relevant to ``kind``
    are read (alpha doubles as the thermal mean photon number)."""

    kind: str
    alpha: float = 0.0
    s: float = 0.0
    beta: float = 0.0
    fock_n: int = 0

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field state kind {self.kind!r}")
        if self.kind == "thermal" and self.alpha < 0:
            raise ValueError("thermal mean photon number must be >= 0")
        if self.kind in ("squeezed_coherent", "squeezed_vacuum") and self.s < 0:
            raise ValueError("squeezing parameter s must be >= 0")
        if self.kind == "fock" and self.fock_n < 0:
            raise ValueError("fock_n must be >= 0")


@dataclass(frozen=True)
class FieldState:
    """Generated truncated field state (pure amplitudes XOR populations)."""

    trunc: TruncationScheme
    tail_mass: float
    pure_amplitudes: np.ndarray | None = None
    diagonal_populations: np.ndarray | None = None

    def __post_init__(self):
        if (self.pure_amplitudes is None) == (self.diagonal_populations is None):
            raise ValueError("exactly one of amplitudes/populations must be set")

    @property
    def photon_populations(self) -> np.ndarray:
        if self.pure_amplitudes is not None:
            return np.abs(self.pure_amplitudes) ** 2
        return self.diagonal_populations

    @property
    def kept_probability(self) -> float:
        return float(np.sum(self.photon_populations))

    def mean_photon(self) -> float:
        p = self.photon_populations
        return float(np.dot(np.arange(p.size), p))

    def second_moment(self) -> float:
        p = self.photon_populations
        return float(np.dot(np.arange(p.size) ** 2, p))


def _finalize(trunc, tail_tol, strict, amplitudes=None, populations=None,
              tail=None) -> FieldState:
    if tail is None:
        kept = np.sum(np.abs(amplitudes) ** 2) if amplitudes is not None \
            else np.sum(populations)
        tail = max(0.0, 1.0 - float(kept))
    if strict and tail > tail_tol:
        raise TruncationTooSmall(tail, tail_tol, trunc.q1)
    return FieldState(trunc=trunc, tail_mass=float(tail),
                      pure_amplitudes=amplitudes,
                      diagonal_populations=populations)


def coherent_amplitudes(alpha: float, trunc: TruncationScheme,
                        tail_tol: float = DEFAULT_TAIL_TOL,
                        strict: bool = True) -> FieldState:
    """χ_n = e^{−α²/2} αⁿ/√(n!) through χ_{n+1} = χ_n·α/√(n+1)."""
    if alpha < 0:
        raise ValueError("coherent amplitude must be >= 0 (real convention)")
    chi = np.zeros(trunc.n_fock)
    chi[0] = math.exp(-0.5 * alpha * alpha)
    for n in range(trunc.q1):
        chi[n + 1] = chi[n] * alpha / math.sqrt(n + 1)
    return _finalize(trunc, tail_tol, strict, amplitudes=chi.astype(complex))


def odd_cat_amplitudes(alpha: float, trunc: TruncationScheme,
                       tail_tol: float = DEFAULT_TAIL_TOL,
                       strict: bool = True) -> FieldState:
    """Odd superposition of |α⟩ and |−α⟩: only odd Fock components."""
    if alpha <= 0:
        raise DegenerateState("odd cat state is the zero vector at alpha = 0")
    chi = np.zeros(trunc.n_fock)
    if trunc.q1 >= 1:
        chi[1] = math.sqrt(2.0 / (1.0 - math.exp(-2.0 * alpha * alpha))) \
            * alpha * math.exp(-0.5 * alpha * alpha)
        a2 = alpha * alpha
        for n in range(trunc.q1 - 1):
            chi[n + 2] = chi[n] * a2 / math.sqrt((n + 2) * (n + 1))
    return _finalize(trunc, tail_tol, strict, amplitudes=chi.astype(complex))


def squeezed_vacuum_amplitudes(s: float, trunc: TruncationScheme,
                               tail_tol: float = DEFAULT_TAIL_TOL,
                               strict: bool = True) -> FieldState:
    """Even-only amplitudes with alternating sign."""
    if s < 0:
        raise ValueError("squeezing parameter s must be >= 0")
    chi = np.zeros(trunc.n_fock)
    chi[0] = 1.0 / math.sqrt(math.cosh(s))
    th = math.tanh(s)
    for m in range(trunc.q1 - 1):
        chi[m + 2] = -chi[m] * math.sqrt((m + 1) / (m + 2)) * th
    return _finalize(trunc, tail_tol, strict, amplitudes=chi.astype(complex))


def _log_hermite_pair(n: int, x: float) -> tuple[float, float, float, float]:
    """(sign, log|H_n(x)|, sign, log|H_{n+1}(x)|) via a rescaled upward
    three-term recurrence.  Sign 0 encodes an exact zero."""
    hp, hc = 1.0, 2.0 * x          # H_0, H_1
    offset = 0.0
    for k in range(1, n + 1):
        hn = 2.0 * x * hc - 2.0 * k * hp
        hp, hc = hc, hn
        big = max(abs(hp), abs(hc))
        if big > 1e240:
            hp /= big
            hc /= big
            offset += math.log(big)

    def enc(v):
        if v == 0.0:
            return 0.0, -math.inf
        return math.copysign(1.0, v), math.log(abs(v)) + offset

    s0, l0 = enc(hp)
    s1, l1 = enc(hc)
    return s0, l0, s1, l1


def _hermite_ratio_direct(n: int, x: float) -> float:
    """H_{n+1}(x)/H_n(x) from the rescaled pair recurrence."""
    s0, l0, s1, l1 = _log_hermite_pair(n, x)
    if s0 == 0.0:
        if s1 == 0.0:
            raise HermiteZeroEncountered(
                f"H_{n} and H_{n + 1} both vanish at x={x!r}"
            )
        return math.inf * s1
    return s0 * s1 * math.exp(l1 - l0)


def _squeezed_amp_direct(n: int, s: float, beta: float, x: float) -> float:
    """Closed-form amplitude in log space (Hermite-zero recovery path)."""
    sn, ln = _log_hermite_pair(n, x)[:2]
    if sn == 0.0:
        return 0.0
    th = math.tanh(s)
    loga = (-0.5 * beta * beta * (1.0 - th)
            - 0.5 * math.log(math.cosh(s))
            + 0.5 * n * math.log(0.5 * th)
            - 0.5 * math.lgamma(n + 1)
            + ln)
    return sn * math.exp(loga) if loga > -745.0 else 0.0


def squeezed_coherent_amplitudes(s: float, beta: float, trunc: TruncationScheme,
                                 tail_tol: float = DEFAULT_TAIL_TOL,
                                 strict: bool = True) -> FieldState:
    """Hermite-ratio recurrence for the squeezed coherent state.

    s = 0 is a removable singularity of x = β/√(sinh 2s); that limit is
    the coherent state, so the request is delegated there.
    """
    if s < 0:
        raise ValueError("squeezing parameter s must be >= 0")
    if s == 0.0:
        return coherent_amplitudes(beta, trunc, tail_tol, strict)
    th = math.tanh(s)
    x = beta / math.sqrt(math.sinh(2.0 * s))
    chi = np.zeros(trunc.n_fock)
    chi[0] = math.exp(-0.5 * beta * beta * (1.0 - th)) / math.sqrt(math.cosh(s))
    K = 2.0 * x                    # K_0
    m = 1
    while m <= trunc.q1:
        if abs(K) >= _K_TINY:
            chi[m] = chi[m - 1] * K * math.sqrt(th / (2.0 * m))
            K = 2.0 * x - 2.0 * m / K
            m += 1
        else:
            # H_m(x) sits on a polynomial zero: restart from the closed form.
            chi[m] = _squeezed_amp_direct(m, s, beta, x)
            if m + 1 <= trunc.q1:
                chi[m + 1] = _squeezed_amp_direct(m + 1, s, beta, x)
                K = _hermite_ratio_direct(m + 1, x)
            m += 2
    return _finalize(trunc, tail_tol, strict, amplitudes=chi.astype(complex))


def thermal_populations(nbar: float, trunc: TruncationScheme,
                        tail_tol: float = DEFAULT_TAIL_TOL,
                        strict: bool = True) -> FieldState:
    """Geometric diagonal populations with closed-form tail mass."""
    if nbar < 0:
        raise ValueError("thermal mean photon number must be >= 0")
    pops = np.zeros(trunc.n_fock)
    pops[0] = 1.0 / (nbar + 1.0)
    ratio = nbar / (nbar + 1.0)
    for n in range(trunc.q1):
        pops[n + 1] = pops[n] * ratio
    tail = ratio ** (trunc.q1 + 1)
    return _finalize(trunc, tail_tol, strict, populations=pops, tail=tail)


def fock_amplitudes(n: int, trunc: TruncationScheme,
                    tail_tol: float = DEFAULT_TAIL_TOL,
                    strict: bool = True) -> FieldState:
    if n > trunc.q1:
        if strict:
            raise TruncationTooSmall(1.0, tail_tol, trunc.q1)
        return FieldState(trunc=trunc, tail_mass=1.0,
                          pure_amplitudes=np.zeros(trunc.n_fock, dtype=complex))
    chi = np.zeros(trunc.n_fock, dtype=complex)
    chi[n] = 1.0
    return FieldState(trunc=trunc, tail_mass=0.0, pure_amplitudes=chi)


def generate_field_state(spec: FieldStateSpec, trunc: TruncationScheme,
                         tail_tol: float = DEFAULT_TAIL_TOL,
                         strict: bool = True) -> FieldState:
    """Dispatch to the generator matching ``spec.kind``."""
    if spec.kind == "coherent":
        return coherent_amplitudes(spec.alpha, trunc, tail_tol, strict)
    if spec.kind == "odd_cat":
        return odd_cat_amplitudes(spec.alpha, trunc, tail_tol, strict)
    if spec.kind == "squeezed_coherent":
        return squeezed_coherent_amplitudes(spec.s, spec.beta, trunc, tail_tol, strict)
    if spec.kind == "squeezed_vacuum":
        return squeezed_vacuum_amplitudes(spec.s, trunc, tail_tol, strict)
    if spec.kind == "thermal":
        return thermal_populations(spec.alpha, trunc, tail_tol, strict)
    return fock_amplitudes(spec.fock_n, trunc, tail_tol, strict)


def auto_truncation(spec: FieldStateSpec, tail_tol: float = DEFAULT_TAIL_TOL,
                    q1_max: int = 4096) -> TruncationScheme:
    """Smallest Q1 whose generated tail mass satisfies the tolerance."""
    if spec.kind == "fock":
        return TruncationScheme(spec.fock_n)

    def tail(q1: int) -> float:
        return generate_field_state(spec, TruncationScheme(q1), strict=False).tail_mass

    if tail(0) <= tail_tol:
        return TruncationScheme(0)
    lo, hi = 0, 1
    while tail(hi) > tail_tol:
        lo, hi = hi, hi * 2
        if hi > q1_max:
            raise TruncationTooSmall(tail(q1_max), tail_tol, q1_max)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail(mid) <= tail_tol:
            hi = mid
        else:
            lo = mid
    return TruncationScheme(hi)


def project_to_dressed(field: FieldState, qubit_excited: bool, basis) -> np.ndarray:
    """Initial dressed coefficient matrix r(0) for a product state.

    Pure field: r = w w† with w the eigen-coefficient contraction of the
    amplitudes; thermal: the congruence of the diagonal populations.  The
    trace equals the kept probability; Hermiticity is exact.
    """
    if basis.trunc.q1 != field.trunc.q1:
        raise DimensionMismatch(
            f"basis Q1={basis.trunc.q1} differs from field Q1={field.trunc.q1}"
        )
    rows = basis.excited_block if qubit_excited else basis.ground_block
    if field.pure_amplitudes is not None:
        w = rows.conj().T @ field.pure_amplitudes
        return np.outer(w, w.conj())
    pops = field.diagonal_populations
    return rows.conj().T @ (pops[:, None] * rows)
