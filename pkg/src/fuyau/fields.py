"""Constructors for the reproducible field families used by configs,
demos and tests: trigonometric polynomials, band-limited random fields,
and Hermitian (1,1)-coefficient fields.

Wavevectors are integer mode vectors of length 2n in the axis order
(x_1, y_1, ..., x_n, y_n); a term with amplitude a, wavevector k and
phase theta contributes a*cos(2*pi*(k . x)/period + theta).
"""

from __future__ import annotations

import numpy as np

from .grid import GridSpec, HermitianField, ScalarField

__all__ = [
    "trig_poly",
    "random_trig",
    "scaled_identity_hermitian",
    "diagonal_trig_hermitian",
    "fourier_hermitian",
]


def _phase_grid(grid: GridSpec, wavevector) -> np.ndarray:
    k = np.asarray(wavevector, dtype=np.int64)
    if k.shape != (2 * grid.n,):
        raise ValueError(
            f"wavevector must have length {2 * grid.n}, got {k.shape}"
        )
    acc = np.zeros(grid.shape)
    for axis, ka in enumerate(k):
        if ka != 0:
            acc = acc + (2.0 * np.pi * ka / grid.period) * grid.coordinate(axis)
    return acc


def trig_poly(grid: GridSpec, terms) -> ScalarField:
    """Sum of cosine terms: each term is (amplitude, wavevector, phase)."""
    values = np.zeros(grid.shape)
    for amplitude, wavevector, phase in terms:
        values += amplitude * np.cos(_phase_grid(grid, wavevector) + phase)
    return ScalarField(grid, values)


def random_trig(grid: GridSpec, rng: np.random.Generator, max_degree: int,
                amplitude: float = 1.0, mean_zero: bool = False) -> ScalarField:
    """Band-limited random real field with |mode| <= max_degree per axis.

    Synthesized in Fourier space, so the band limit is exact; amplitude
    rescales the sup-norm.
    """
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    if max_degree > grid.N // 2 - 1:
        raise ValueError(f"max_degree {max_degree} too large for N={grid.N}")
    freq = np.fft.fftfreq(grid.N) * grid.N
    masks = []
    for axis in range(2 * grid.n):
        shape = [1] * (2 * grid.n)
        shape[axis] = grid.N
        masks.append((np.abs(freq) <= max_degree).reshape(shape))
    mask = masks[0]
    for m in masks[1:]:
        mask = mask & m
    coeff = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    coeff = coeff * mask
    if mean_zero:
        coeff[(0,) * (2 * grid.n)] = 0.0
    values = np.fft.ifftn(coeff).real
    peak = np.max(np.abs(values))
    if peak > 0:
        values = values * (amplitude / peak)
    return ScalarField(grid, values)


def scaled_identity_hermitian(grid: GridSpec, c: float) -> HermitianField:
    return HermitianField.scaled_identity(grid, float(c))


def diagonal_trig_hermitian(grid: GridSpec, amplitudes, wavevectors,
                            phases=None, offset: float = 0.0) -> HermitianField:
    """Diagonal Hermitian field: entry j is offset + a_j cos(2 pi k_j . x)."""
    n = grid.n
    if len(amplitudes) != n or len(wavevectors) != n:
        raise ValueError(f"need {n} amplitudes and wavevectors")
    if phases is None:
        phases = [0.0] * n
    mats = np.zeros((n, n) + grid.shape, dtype=np.complex128)
    for j in range(n):
        mats[j, j] = offset + amplitudes[j] * np.cos(
            _phase_grid(grid, wavevectors[j]) + phases[j]
        )
    return HermitianField(grid, mats)


def fourier_hermitian(grid: GridSpec, entries) -> HermitianField:
    """Hermitian field from a list of Fourier entries.

    Each entry is a dict with keys i, j, wavevector, re, im; the
    contribution (re + i*im) * exp(i k.x) is added at (i, j) and its
    conjugate at (j, i), so the result is Hermitian by construction.
    """
    n = grid.n
    mats = np.zeros((n, n) + grid.shape, dtype=np.complex128)
    for e in entries:
        i, j = int(e["i"]), int(e["j"])
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"matrix entry ({i},{j}) out of range for n={n}")
        c = float(e.get("re", 0.0)) + 1j * float(e.get("im", 0.0))
        wave = np.exp(1j * _phase_grid(grid, e["wavevector"]))
        mats[i, j] += c * wave
        mats[j, i] += np.conj(c * wave)
    return HermitianField(grid, mats)
