"""Bijective packings between coefficient matrices and real ODE state vectors.

Two layouts are used:

- Bare-basis blocks (A, B, C) of the joint density operator, where A and B
  are Hermitian (Q1+1)×(Q1+1) blocks and C is a general block.  The packed
  vector stores, in order: Re A (upper triangle incl. diagonal, row-major),
  Im A (strict upper triangle), the same for B, then Re C and Im C in full.
  Segment offsets follow the closed forms
  F1 = (Q1+1)(Q1+2)/2, F2 = (Q1+1)², F3 = F2 + F1, F4 = 2(Q1+1)²,
  F5 = 3(Q1+1)², total length (Q2+1)².

- A single Hermitian matrix r (dressed-basis coefficients) of dimension
  Q2+1: Re r upper triangle incl. diagonal, then Im r strict upper
  triangle; total length (Q2+1)².

Both are exact bijections on Hermitian-consistent input; round trips are
bit-for-bit.
"""

from __future__ import annotations

import numpy as np

from .errors import HermiticityViolation, LengthMismatch
from .hilbert import TruncationScheme

HERMITICITY_TOL = 1e-12


def _check_hermitian(M: np.ndarray, name: str, tol: float = HERMITICITY_TOL) -> None:
    dev = np.max(np.abs(M - M.conj().T)) if M.size else 0.0
    if dev > tol:
        raise HermiticityViolation(f"{name} deviates from Hermiticity by {dev:.3e}")


class BarePacking:
    """Packs (A, B, C) bare-basis blocks into one real vector and back."""

    def __init__(self, trunc: TruncationScheme):
        self.trunc = trunc
        n1 = trunc.n_fock
        self.n1 = n1
        self.length = (trunc.q2 + 1) ** 2
        self.f1 = n1 * (n1 + 1) // 2
        self.f2 = n1 * n1
        self.f3 = self.f2 + self.f1
        self.f4 = 2 * n1 * n1
        self.f5 = 3 * n1 * n1
        self._iu = np.triu_indices(n1)
        self._ius = np.triu_indices(n1, k=1)

    def pack(self, A: np.ndarray, B: np.ndarray, C: np.ndarray, check: bool = True) -> np.ndarray:
        n1 = self.n1
        for name, M in (("A", A), ("B", B), ("C", C)):
            if M.shape != (n1, n1):
                raise LengthMismatch(f"block {name} has shape {M.shape}, expected {(n1, n1)}")
        if check:
            _check_hermitian(A, "A")
            _check_hermitian(B, "B")
        Y = np.empty(self.length)
        iu, ius = self._iu, self._ius
        Y[: self.f1] = A.real[iu]
        Y[self.f1 : self.f2] = A.imag[ius]
        Y[self.f2 : self.f3] = B.real[iu]
        Y[self.f3 : self.f4] = B.imag[ius]
        Y[self.f4 : self.f5] = C.real.ravel()
        Y[self.f5 :] = C.imag.ravel()
        return Y

    def unpack(self, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if Y.shape != (self.length,):
            raise LengthMismatch(f"packed vector has shape {Y.shape}, expected ({self.length},)")
        n1 = self.n1
        A = self._hermitian_from(Y[: self.f1], Y[self.f1 : self.f2])
        B = self._hermitian_from(Y[self.f2 : self.f3], Y[self.f3 : self.f4])
        C = (Y[self.f4 : self.f5] + 1j * Y[self.f5 :]).reshape(n1, n1)
        return A, B, C

    def _hermitian_from(self, re_ut: np.ndarray, im_sut: np.ndarray) -> np.ndarray:
        n1 = self.n1
        M = np.zeros((n1, n1), dtype=complex)
        M[self._iu] = re_ut
        M[self._ius] += 1j * im_sut
        il = np.tril_indices(n1, k=-1)
        M[il] = M.conj().T[il]
        return M


class HermitianPacking:
    """Packs one Hermitian matrix of dimension ``dim`` into dim² reals."""

    def __init__(self, dim: int):
        self.dim = dim
        self.length = dim * dim
        self.n_re = dim * (dim + 1) // 2
        self._iu = np.triu_indices(dim)
        self._ius = np.triu_indices(dim, k=1)

    def pack(self, r: np.ndarray, check: bool = True) -> np.ndarray:
        if r.shape != (self.dim, self.dim):
            raise LengthMismatch(f"matrix has shape {r.shape}, expected {(self.dim, self.dim)}")
        if check:
            _check_hermitian(r, "r")
        Y = np.empty(self.length)
        Y[: self.n_re] = r.real[self._iu]
        Y[self.n_re :] = r.imag[self._ius]
        return Y

    def unpack(self, Y: np.ndarray) -> np.ndarray:
        if Y.shape != (self.length,):
            raise LengthMismatch(f"packed vector has shape {Y.shape}, expected ({self.length},)")
        r = np.zeros((self.dim, self.dim), dtype=complex)
        r[self._iu] = Y[: self.n_re]
        r[self._ius] += 1j * Y[self.n_re :]
        il = np.tril_indices(self.dim, k=-1)
        r[il] = r.conj().T[il]
        return r
