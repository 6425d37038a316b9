"""Fourier-Walsh analysis at p = 1/2.

Subsets S of [n] are encoded as n-bit masks (bit i-1 set means i is in S),
and the character is u_S(omega) = (-1)^{|S & omega|}.  The transform is the
fast Walsh-Hadamard butterfly, O(n 2^n).
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .boolfn import BooleanFunctionTable, InputError, popcounts

PARSEVAL_TOL = 1e-10
BB_SLACK = 1e-12


def _walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalized in-place butterfly; returns sum_omega g(omega) u_S(omega)."""
    a = np.array(values, dtype=np.float64)
    size = a.size
    if size & (size - 1):
        raise InputError("length must be a power of two")
    h = 1
    while h < size:
        b = a.reshape(-1, 2 * h)
        x = b[:, :h].copy()
        y = b[:, h:].copy()
        b[:, :h] = x + y
        b[:, h:] = x - y
        h *= 2
    return a


@dataclass(frozen=True)
class SpectralCoefficients:
    """All 2^n coefficients f_hat(S), indexed by the subset mask."""

    n: int
    coefficients: np.ndarray

    def coefficient(self, mask: int) -> float:
        return float(self.coefficients[mask])

    def parseval_sum(self) -> float:
        return float(np.sum(self.coefficients**2))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("mask,coefficient\n")
        for mask, c in enumerate(self.coefficients):
            buf.write(f"{mask},{float(c)!r}\n")
        return buf.getvalue()


def fourier_walsh(f: BooleanFunctionTable) -> SpectralCoefficients:
    """f_hat(S) = 2^-n sum_omega f(omega) u_S(omega) for every S."""
    coeffs = _walsh_hadamard(f.values) / (1 << f.n)
    return SpectralCoefficients(f.n, coeffs)


def transform_table(values: np.ndarray) -> np.ndarray:
    """Forward transform for an arbitrary real-valued table."""
    n_bits = int(np.log2(len(values)))
    return _walsh_hadamard(values) / (1 << n_bits)


def inverse_transform(coefficients: np.ndarray) -> np.ndarray:
    """g(omega) = sum_S g_hat(S) u_S(omega); the butterfly is its own inverse."""
    return _walsh_hadamard(coefficients)


def gradient_table(f: BooleanFunctionTable, i: int) -> np.ndarray:
    """grad_i f as a {-1, 0, 1}-valued table."""
    if not 1 <= i <= f.n:
        raise InputError(f"i={i} outside [1, {f.n}]")
    idx = np.arange(1 << f.n)
    vals = f.values.astype(np.int8)
    return (vals - vals[idx ^ (1 << (i - 1))]).astype(np.float64)


def gradient_spectrum_check(f: BooleanFunctionTable, i: int, tol: float = PARSEVAL_TOL) -> bool:
    """grad_i f has spectrum 2 f_hat(S) on S containing i, 0 elsewhere."""
    if f.n > 20:
        raise InputError("gradient spectrum check capped at n = 20")
    fhat = fourier_walsh(f).coefficients
    ghat = transform_table(gradient_table(f, i))
    masks = np.arange(1 << f.n)
    contains = (masks >> (i - 1)) & 1 == 1
    expected = np.where(contains, 2.0 * fhat, 0.0)
    return bool(np.max(np.abs(ghat - expected)) <= tol)


def noise_operator(g: np.ndarray, t: float) -> np.ndarray:
    """T_t g: damp the coefficient of S by t^|S| and return to value space."""
    if not 0.0 <= t <= 1.0:
        raise InputError("t must lie in [0, 1]")
    g = np.asarray(g, dtype=np.float64)
    n_bits = int(np.log2(len(g)))
    if n_bits > 20:
        raise InputError("noise operator capped at n = 20")
    ghat = transform_table(g)
    damp = np.power(t, popcounts(n_bits).astype(np.float64))
    return inverse_transform(ghat * damp)


def lp_norm(g: np.ndarray, alpha: float) -> float:
    """||g||_alpha under normalized counting measure, alpha >= 1.

    Exponentiation happens in log space on the nonzero entries; zero entries
    contribute zero, which also covers the |g| < 1e-300 underflow regime.
    """
    g = np.asarray(g, dtype=np.float64)
    absg = np.abs(g)
    nz = absg > 0.0
    if not np.any(nz):
        return 0.0
    powered = np.exp(alpha * np.log(absg[nz]))
    return float((powered.sum() / g.size) ** (1.0 / alpha))


@dataclass(frozen=True)
class BonamiBecknerResult:
    lhs: float
    rhs: float
    holds: bool


def bonami_beckner_check(g: np.ndarray, t: float) -> BonamiBecknerResult:
    """Spot-check ||T_t g||_2 <= ||g||_{1+t^2}.

    This is a numeric witness of the hypercontractivity theorem, never a
    proof; any False verdict on valid input is a bug.
    """
    g = np.asarray(g, dtype=np.float64)
    n_bits = int(np.log2(len(g)))
    if n_bits > 16:
        raise InputError("hypercontractivity check capped at n = 16")
    lhs = lp_norm(noise_operator(g, t), 2.0)
    rhs = lp_norm(g, 1.0 + t * t)
    return BonamiBecknerResult(lhs, rhs, lhs <= rhs + BB_SLACK)
