"""Pointwise exterior algebra of (p,q)-forms on the flat torus.

A (p,q)-form is stored by its plain complex coefficients in the basis
dz^J wedge dzbar^K with strictly increasing multi-indices J, K:

    a = sum_{J,K} a_{JK} dz^J ^ dzbar^K .

All powers of sqrt(-1) are absorbed into the stored coefficients.  Under
this convention a real (1,1)-form with Hermitian matrix A is stored as
a_{jk} = i * A_{jk}, and a (p,p)-form is real exactly when

    a_{KJ} = (-1)^p conj(a_{JK})          (reality condition)

which for p = 1 is precisely Hermitian-ness of A.  This single rule is
the bookkeeping convention used everywhere in the package.

Coefficients may be full grid arrays or 0-d arrays (constant forms);
numpy broadcasting makes the two interoperable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .grid import ComplexField, GridMismatchError, GridSpec, HermitianField, dz_all, dzbar_all

__all__ = [
    "FormPQ",
    "zero_form",
    "scalar_form",
    "herm_to_form",
    "form_to_herm",
    "omega",
    "omega_power",
    "wedge",
    "form_add",
    "form_scale",
    "d_form_holo",
    "d_form_antiholo",
    "top_ratio",
    "is_real_form",
    "kappa2_constant",
]

Index = tuple[int, ...]


class ConventionError(RuntimeError):
    """A wedge evaluation produced an unexpectedly complex result."""


@dataclass
class FormPQ:
    """(p,q)-form with coefficients keyed by (J, K) multi-index pairs."""

    grid: GridSpec
    p: int
    q: int
    coeffs: dict[tuple[Index, Index], np.ndarray]

    def __post_init__(self):
        n = self.grid.n
        if not (0 <= self.p <= n and 0 <= self.q <= n):
            raise ValueError(f"bidegree ({self.p},{self.q}) out of range for n={n}")
        for (J, K) in self.coeffs:
            if len(J) != self.p or len(K) != self.q:
                raise ValueError(f"index pair {(J, K)} has wrong lengths")
            if list(J) != sorted(set(J)) or list(K) != sorted(set(K)):
                raise ValueError(f"indices must be strictly increasing: {(J, K)}")

    @property
    def degree(self) -> int:
        return self.p + self.q


def zero_form(grid: GridSpec, p: int, q: int) -> FormPQ:
    return FormPQ(grid, p, q, {})


def scalar_form(grid: GridSpec, value: complex | np.ndarray) -> FormPQ:
    """(0,0)-form, i.e. a plain function."""
    return FormPQ(grid, 0, 0, {((), ()): np.asarray(value, dtype=np.complex128)})


def _merge_sign(a: Index, b: Index) -> tuple[int, Index] | None:
    """Sign and sorted union of two disjoint increasing tuples.

    Returns None on index collision (wedge vanishes).
    """
    if set(a) & set(b):
        return None
    inversions = 0
    for x in b:
        inversions += sum(1 for y in a if y > x)
    merged = tuple(sorted(a + b))
    return (-1) ** inversions, merged


def _insert_sign(idx: int, t: Index) -> tuple[int, Index] | None:
    """Sign and result of prepending dz^idx to dz^t and sorting."""
    if idx in t:
        return None
    pos = sum(1 for y in t if y < idx)
    return (-1) ** pos, tuple(sorted(t + (idx,)))


def form_add(a: FormPQ, b: FormPQ) -> FormPQ:
    if a.grid != b.grid:
        raise GridMismatchError("forms on different grids")
    if (a.p, a.q) != (b.p, b.q):
        raise ValueError(f"cannot add ({a.p},{a.q})-form to ({b.p},{b.q})-form")
    coeffs = dict(a.coeffs)
    for key, c in b.coeffs.items():
        coeffs[key] = coeffs[key] + c if key in coeffs else c
    return FormPQ(a.grid, a.p, a.q, coeffs)


def form_scale(a: FormPQ, s: complex | np.ndarray) -> FormPQ:
    s = np.asarray(s, dtype=np.complex128)
    return FormPQ(a.grid, a.p, a.q, {k: c * s for k, c in a.coeffs.items()})


def wedge(a: FormPQ, b: FormPQ) -> FormPQ:
    """Wedge product; returns the zero form on degree overflow."""
    if a.grid != b.grid:
        raise GridMismatchError("forms on different grids")
    n = a.grid.n
    p, q = a.p + b.p, a.q + b.q
    if p > n or q > n:
        return zero_form(a.grid, min(p, n), min(q, n))
    coeffs: dict[tuple[Index, Index], np.ndarray] = {}
    # moving dzbar^{K_a} past dz^{J_b} costs (-1)^(q_a * p_b)
    swap = (-1) ** (a.q * b.p)
    for (Ja, Ka), ca in a.coeffs.items():
        for (Jb, Kb), cb in b.coeffs.items():
            mj = _merge_sign(Ja, Jb)
            if mj is None:
                continue
            mk = _merge_sign(Ka, Kb)
            if mk is None:
                continue
            sj, J = mj
            sk, K = mk
            term = (swap * sj * sk) * (ca * cb)
            key = (J, K)
            coeffs[key] = coeffs[key] + term if key in coeffs else term
    return FormPQ(a.grid, p, q, coeffs)


def herm_to_form(h: HermitianField) -> FormPQ:
    """Real (1,1)-form i * sum A_{jk} dz^j ^ dzbar^k of a Hermitian field."""
    coeffs = {}
    n = h.grid.n
    for j in range(n):
        for k in range(n):
            coeffs[((j,), (k,))] = 1j * h.matrices[j, k]
    return FormPQ(h.grid, 1, 1, coeffs)


def form_to_herm(a: FormPQ) -> HermitianField:
    """Inverse of herm_to_form (requires a real (1,1)-form)."""
    if (a.p, a.q) != (1, 1):
        raise ValueError(f"expected a (1,1)-form, got ({a.p},{a.q})")
    n = a.grid.n
    mats = np.zeros((n, n) + a.grid.shape, dtype=np.complex128)
    for ((j,), (k,)), c in a.coeffs.items():
        mats[j, k] = np.broadcast_to(-1j * c, a.grid.shape)
    return HermitianField(a.grid, mats)


@lru_cache(maxsize=None)
def _omega_cached(grid: GridSpec) -> FormPQ:
    coeffs = {}
    for j in range(grid.n):
        coeffs[((j,), (j,))] = np.asarray(1j, dtype=np.complex128)
    return FormPQ(grid, 1, 1, coeffs)


def omega(grid: GridSpec) -> FormPQ:
    """The flat Kaehler form i * sum dz^j ^ dzbar^j."""
    _check_convention(grid)
    return _omega_cached(grid)


@lru_cache(maxsize=None)
def omega_power(grid: GridSpec, k: int) -> FormPQ:
    """omega^k; omega^0 is the unit scalar form."""
    if not (0 <= k <= grid.n):
        raise ValueError(f"power {k} out of range 0..{grid.n}")
    if k == 0:
        return scalar_form(grid, 1.0)
    return wedge(_omega_cached(grid), omega_power(grid, k - 1))


@lru_cache(maxsize=None)
def _top_coeff(grid: GridSpec) -> complex:
    """Stored coefficient of omega^n on the full-index basis element."""
    top = omega_power(grid, grid.n)
    full = tuple(range(grid.n))
    return complex(top.coeffs[(full, full)])


def top_ratio(a: FormPQ, imag_tol: float | None = 1e-9) -> ComplexField:
    """Divide a top-degree (n,n)-form by omega^n.

    When imag_tol is given, a relative imaginary residue above it raises
    ConventionError (top ratios of real forms must be real).
    """
    n = a.grid.n
    if (a.p, a.q) != (n, n):
        raise ValueError(f"top_ratio needs an ({n},{n})-form, got ({a.p},{a.q})")
    full = tuple(range(n))
    c = a.coeffs.get((full, full))
    if c is None:
        values = np.zeros(a.grid.shape, dtype=np.complex128)
    else:
        values = np.broadcast_to(c / _top_coeff(a.grid), a.grid.shape).copy()
    if imag_tol is not None:
        scale = max(float(np.max(np.abs(values.real))), 1.0)
        resid = float(np.max(np.abs(values.imag)))
        if resid > imag_tol * scale:
            raise ConventionError(
                f"imaginary residue {resid:.3e} exceeds {imag_tol:.1e} * {scale:.3e}"
            )
    return ComplexField(a.grid, values)


def d_form_holo(a: FormPQ) -> FormPQ:
    """Holomorphic exterior derivative: (p,q) -> (p+1,q)."""
    n = a.grid.n
    if a.p + 1 > n:
        return zero_form(a.grid, n, a.q)
    coeffs: dict[tuple[Index, Index], np.ndarray] = {}
    for (J, K), c in a.coeffs.items():
        if c.ndim == 0:
            continue  # constant coefficient: derivative vanishes
        dc = dz_all(a.grid, c)
        for l in range(n):
            ins = _insert_sign(l, J)
            if ins is None:
                continue
            sign, J2 = ins
            key = (J2, K)
            term = sign * dc[l]
            coeffs[key] = coeffs[key] + term if key in coeffs else term
    return FormPQ(a.grid, a.p + 1, a.q, coeffs)


def d_form_antiholo(a: FormPQ) -> FormPQ:
    """Antiholomorphic exterior derivative: (p,q) -> (p,q+1)."""
    n = a.grid.n
    if a.q + 1 > n:
        return zero_form(a.grid, a.p, n)
    # dzbar^l passes the p holomorphic factors first
    front = (-1) ** a.p
    coeffs: dict[tuple[Index, Index], np.ndarray] = {}
    for (J, K), c in a.coeffs.items():
        if c.ndim == 0:
            continue
        dc = dzbar_all(a.grid, c)
        for l in range(n):
            ins = _insert_sign(l, K)
            if ins is None:
                continue
            sign, K2 = ins
            key = (J, K2)
            term = (front * sign) * dc[l]
            coeffs[key] = coeffs[key] + term if key in coeffs else term
    return FormPQ(a.grid, a.p, a.q + 1, coeffs)


def is_real_form(a: FormPQ, tol: float = 1e-11) -> bool:
    """Check the reality condition a_{KJ} = (-1)^p conj(a_{JK})."""
    if a.p != a.q:
        return False
    sign = (-1) ** a.p
    scale = 1.0
    for c in a.coeffs.values():
        scale = max(scale, float(np.max(np.abs(c))))
    for (J, K), c in a.coeffs.items():
        mirror = a.coeffs.get((K, J))
        if mirror is None:
            mirror = np.asarray(0.0 + 0.0j)
        err = np.max(np.abs(np.conj(c) * sign - mirror))
        if err > tol * scale:
            return False
    return True


@lru_cache(maxsize=None)
def kappa2_constant(grid: GridSpec) -> float:
    """Convention constant relating wedge ratios to trace formulas.

    Evaluates C(n,2) * (a ^ a ^ omega^{n-2}) / omega^n on a = omega and
    divides by sigma_2(identity) = n(n-1)/2.  With the sign convention of
    this module the result is 1 by construction; it is asserted once per
    grid so any convention drift fails loudly at first use.
    """
    n = grid.n
    om = _omega_cached(grid)
    num = wedge(wedge(om, om), omega_power(grid, n - 2))
    full = tuple(range(n))
    ratio = complex(num.coeffs[(full, full)]) / _top_coeff(grid)
    kappa = comb(n, 2) * ratio / (n * (n - 1) / 2.0)
    return kappa.real


def _check_convention(grid: GridSpec) -> None:
    kappa = kappa2_constant(grid)
    if abs(kappa - 1.0) > 1e-12:
        raise ConventionError(f"kappa2 convention constant is {kappa!r}, expected 1")


def sigma_wedge(h: HermitianField, k: int) -> np.ndarray:
    """sigma_k of a Hermitian field via C(n,k) a^k ^ omega^{n-k} / omega^n."""
    grid = h.grid
    n = grid.n
    if not (1 <= k <= n):
        raise ValueError(f"k must be in 1..{n}")
    a = herm_to_form(h)
    acc = a
    for _ in range(k - 1):
        acc = wedge(acc, a)
    top = wedge(acc, omega_power(grid, n - k))
    return comb(n, k) * top_ratio(top).values.real


def _random_index_pairs(n: int, p: int, q: int):
    holo = list(itertools.combinations(range(n), p))
    anti = list(itertools.combinations(range(n), q))
    return [(J, K) for J in holo for K in anti]


def random_form(grid: GridSpec, p: int, q: int, rng: np.random.Generator,
                constant: bool = False) -> FormPQ:
    """Dense random form, mainly for tests and convention checks."""
    coeffs = {}
    for key in _random_index_pairs(grid.n, p, q):
        if constant:
            c = rng.standard_normal() + 1j * rng.standard_normal()
            coeffs[key] = np.asarray(c, dtype=np.complex128)
        else:
            c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
            coeffs[key] = c
    return FormPQ(grid, p, q, coeffs)
