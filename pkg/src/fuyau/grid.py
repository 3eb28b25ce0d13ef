"""Periodic grids on the flat complex n-torus with spectral calculus.

The torus is C^n modulo the lattice (period * Z)^{2n}, sampled with N
points per real axis.  A point is z^j = x_j + i*y_j and a field is stored
as an ndarray of shape (N,)*(2n) with axis ordering
(x_1, y_1, x_2, y_2, ..., x_n, y_n).

Derivatives are discrete-Fourier (spectrally exact for band-limited
input).  The Nyquist wavenumber is dropped from first-derivative symbols
so that derivatives of real fields stay real.

Holomorphic/antiholomorphic derivatives follow the usual convention

    d/dz^j    = (d/dx_j - i d/dy_j) / 2
    d/dzbar^j = (d/dx_j + i d/dy_j) / 2

Integrals use the Lebesgue measure of the real coordinates, so the total
volume is period**(2n) and the node-average quadrature is exact for
trigonometric polynomials below the Nyquist frequency.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "GridSpec",
    "ScalarField",
    "ComplexField",
    "CovectorField",
    "HermitianField",
    "d_holo",
    "d_antiholo",
    "dd_bar",
    "mean",
    "integral",
    "lp_norm",
    "sup",
    "inf",
    "l2_inner",
    "dump_field",
    "load_field",
]

HERMITIAN_RTOL = 1e-12


class GridMismatchError(ValueError):
    """Two fields living on different grids were combined."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on the flat torus of complex dimension n.

    Attributes:
        n: complex dimension (2 or 3).
        N: sample points per real axis; must be a power of two >= 4.
        period: side length of each real axis.
    """

    n: int
    N: int
    period: float = 1.0

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"complex dimension must be 2 or 3, got {self.n}")
        if self.N < 4 or (self.N & (self.N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 4, got {self.N}")
        if not (self.period > 0):
            raise ValueError(f"period must be positive, got {self.period}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * (2 * self.n)

    @property
    def num_nodes(self) -> int:
        return self.N ** (2 * self.n)

    @property
    def volume(self) -> float:
        return self.period ** (2 * self.n)

    def axis_x(self, j: int) -> int:
        """Array axis of the real part x_j (j is 0-based)."""
        return 2 * j

    def axis_y(self, j: int) -> int:
        return 2 * j + 1

    def coordinate(self, axis: int) -> np.ndarray:
        """1D coordinates along a real axis, broadcast to the grid shape."""
        x = np.arange(self.N) * (self.period / self.N)
        shape = [1] * (2 * self.n)
        shape[axis] = self.N
        return x.reshape(shape)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


@lru_cache(maxsize=None)
def _wavenumber(spec: GridSpec, axis: int) -> np.ndarray:
    """Angular wavenumbers along one real axis, Nyquist zeroed."""
    k = 2.0 * np.pi * np.fft.fftfreq(spec.N, d=spec.period / spec.N)
    k[spec.N // 2] = 0.0
    shape = [1] * (2 * spec.n)
    shape[axis] = spec.N
    return k.reshape(shape)


@lru_cache(maxsize=None)
def _holo_symbol(spec: GridSpec, j: int) -> np.ndarray:
    """Fourier symbol of d/dz^j."""
    kx = _wavenumber(spec, spec.axis_x(j))
    ky = _wavenumber(spec, spec.axis_y(j))
    return 0.5j * (kx - 1j * ky)


@lru_cache(maxsize=None)
def _antiholo_symbol(spec: GridSpec, j: int) -> np.ndarray:
    kx = _wavenumber(spec, spec.axis_x(j))
    ky = _wavenumber(spec, spec.axis_y(j))
    return 0.5j * (kx + 1j * ky)


def _check_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")


@dataclass
class ScalarField:
    """Real-valued function sampled on the grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("scalar field contains non-finite values")

    @classmethod
    def constant(cls, grid: GridSpec, c: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(c)))


@dataclass
class ComplexField:
    """Complex-valued function on the grid (intermediate Fourier data)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("complex field contains non-finite values")


@dataclass
class CovectorField:
    """n complex components per node: a (1,0) or (0,1) coefficient tuple."""

    grid: GridSpec
    components: np.ndarray  # shape (n, *grid.shape)

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=np.complex128)
        expected = (self.grid.n,) + self.grid.shape
        if self.components.shape != expected:
            raise ValueError(
                f"component shape {self.components.shape}, expected {expected}"
            )
        if not np.all(np.isfinite(self.components)):
            raise ValueError("covector field contains non-finite values")


@dataclass
class HermitianField:
    """n x n Hermitian matrix per node (coefficients of a real (1,1)-form)."""

    grid: GridSpec
    matrices: np.ndarray  # shape (n, n, *grid.shape)

    def __post_init__(self):
        self.matrices = np.asarray(self.matrices, dtype=np.complex128)
        n = self.grid.n
        expected = (n, n) + self.grid.shape
        if self.matrices.shape != expected:
            raise ValueError(
                f"matrix shape {self.matrices.shape}, expected {expected}"
            )
        if not np.all(np.isfinite(self.matrices)):
            raise ValueError("hermitian field contains non-finite values")
        adjoint = np.conj(np.swapaxes(self.matrices, 0, 1))
        scale = np.max(np.abs(self.matrices))
        asym = np.max(np.abs(self.matrices - adjoint))
        if asym > HERMITIAN_RTOL * max(scale, 1.0):
            raise ValueError(f"matrices not Hermitian: asymmetry {asym:.3e}")

    @classmethod
    def scaled_identity(cls, grid: GridSpec, c: float | np.ndarray) -> "HermitianField":
        mats = np.zeros((grid.n, grid.n) + grid.shape, dtype=np.complex128)
        for j in range(grid.n):
            mats[j, j] = c
        return cls(grid, mats)


# ---------------------------------------------------------------------------
# spectral differentiation
# ---------------------------------------------------------------------------

def _fft(values: np.ndarray) -> np.ndarray:
    return np.fft.fftn(values)


def _ifft(values: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(values)


def dz_all(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    """All holomorphic derivatives of a raw array; one forward FFT total."""
    F = _fft(values)
    out = np.empty((grid.n,) + grid.shape, dtype=np.complex128)
    for j in range(grid.n):
        out[j] = _ifft(_holo_symbol(grid, j) * F)
    return out


def dzbar_all(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    F = _fft(values)
    out = np.empty((grid.n,) + grid.shape, dtype=np.complex128)
    for j in range(grid.n):
        out[j] = _ifft(_antiholo_symbol(grid, j) * F)
    return out


def d_holo(f: ScalarField | ComplexField) -> CovectorField:
    """Holomorphic gradient (f_1, ..., f_n) with f_j = df/dz^j."""
    return CovectorField(f.grid, dz_all(f.grid, f.values))


def d_antiholo(f: ScalarField | ComplexField) -> CovectorField:
    """Antiholomorphic gradient; conj(d_holo(f)) when f is real."""
    return CovectorField(f.grid, dzbar_all(f.grid, f.values))


def dd_bar(f: ScalarField) -> HermitianField:
    """Complex Hessian f_{i jbar} = d^2 f / dz^i dzbar^j.

    The trace equals one quarter of the real Laplacian.  Output is
    symmetrized to remove FFT roundoff asymmetry.
    """
    grid = f.grid
    F = _fft(f.values)
    H = np.empty((grid.n, grid.n) + grid.shape, dtype=np.complex128)
    for i in range(grid.n):
        si = _holo_symbol(grid, i)
        for j in range(grid.n):
            H[i, j] = _ifft(si * _antiholo_symbol(grid, j) * F)
    H = 0.5 * (H + np.conj(np.swapaxes(H, 0, 1)))
    return HermitianField(grid, H)


# ---------------------------------------------------------------------------
# integrals and norms
# ---------------------------------------------------------------------------

def mean(f: ScalarField) -> float:
    return float(np.mean(f.values))


def integral(f: ScalarField) -> float:
    return float(np.mean(f.values)) * f.grid.volume


def lp_norm(f: ScalarField, p: float) -> float:
    """L^p norm with the Lebesgue measure (||1||_1 = period^(2n))."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(np.mean(np.abs(f.values) ** p) * f.grid.volume) ** (1.0 / p)


def sup(f: ScalarField) -> float:
    return float(np.max(f.values))


def inf(f: ScalarField) -> float:
    return float(np.min(f.values))


def l2_inner(f: ScalarField, g: ScalarField) -> float:
    _check_grid(f, g)
    return float(np.mean(f.values * g.values) * f.grid.volume)


# ---------------------------------------------------------------------------
# FYFIELD dump format
# ---------------------------------------------------------------------------

def _hermitian_to_reals(h: HermitianField) -> np.ndarray:
    """Pack per-node matrices into n^2 reals: upper-triangle real parts
    (row-major, diagonal included) then strict-upper imaginary parts."""
    n = h.grid.n
    cols = []
    for i in range(n):
        for j in range(i, n):
            cols.append(np.real(h.matrices[i, j]))
    for i in range(n):
        for j in range(i + 1, n):
            cols.append(np.imag(h.matrices[i, j]))
    return np.stack(cols, axis=-1)


def _reals_to_hermitian(grid: GridSpec, packed: np.ndarray) -> HermitianField:
    n = grid.n
    mats = np.zeros((n, n) + grid.shape, dtype=np.complex128)
    idx = 0
    for i in range(n):
        for j in range(i, n):
            mats[i, j] += packed[..., idx]
            if i != j:
                mats[j, i] += packed[..., idx]
            idx += 1
    for i in range(n):
        for j in range(i + 1, n):
            mats[i, j] += 1j * packed[..., idx]
            mats[j, i] -= 1j * packed[..., idx]
            idx += 1
    return HermitianField(grid, mats)


def dump_field(path, f: ScalarField | HermitianField) -> None:
    """Write a FYFIELD v1 file: ASCII header line + little-endian float64."""
    kind = "scalar" if isinstance(f, ScalarField) else "hermitian"
    g = f.grid
    header = f"FYFIELD v1 n={g.n} N={g.N} period={g.period!r} kind={kind}\n"
    if kind == "scalar":
        payload = np.ascontiguousarray(f.values, dtype="<f8")
    else:
        payload = np.ascontiguousarray(_hermitian_to_reals(f), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(payload.tobytes())


def load_field(path) -> ScalarField | HermitianField:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").strip()
        raw = fh.read()
    parts = header.split()
    if parts[:2] != ["FYFIELD", "v1"]:
        raise ValueError(f"not a FYFIELD v1 file: {header!r}")
    kv = dict(p.split("=", 1) for p in parts[2:])
    grid = GridSpec(n=int(kv["n"]), N=int(kv["N"]), period=float(kv["period"]))
    data = np.frombuffer(raw, dtype="<f8")
    if kv["kind"] == "scalar":
        return ScalarField(grid, data.reshape(grid.shape).copy())
    if kv["kind"] == "hermitian":
        n = grid.n
        packed = data.reshape(grid.shape + (n * n,)).copy()
        return _reals_to_hermitian(grid, packed)
    raise ValueError(f"unknown field kind {kv['kind']!r}")
