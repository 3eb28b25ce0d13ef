"""Assembly of the Fu-Yau residuals on the flat torus.

Two equivalent residuals are provided for the one-parameter family of
equations (t in [0,1], t=1 the target equation):

* residual_form: the (n,n)-form equation divided by omega^n,

      [ i ddbar(e^phi omega - t alpha e^{-phi} rho) ^ omega^{n-2}
        + n alpha (i ddbar phi)^2 ^ omega^{n-2}
        + t mu omega^n / n! ] / omega^n

* residual_sigma: the 2-Hessian form sigma_2(omega_tilde) - F with

      omega_tilde = e^phi omega + t alpha e^{-phi} rho + 2 n alpha i ddbar phi
      F = n(n-1)/2 (e^{2 phi} - 4 alpha e^phi |d phi|^2) + n(n-1)/2 f

and f the gradient-coupled source assembled from rho and mu (with rho,
mu scaled by t along the family).  The two residuals are proportional;
the constant is measured by equivalence_constant and is the same for
every smooth phi.

All wedge expressions route through the exterior engine; sigma_2 of the
Hermitian field uses the trace identity from the hessian module.

The ddbar blocks acting on e^{+-phi} are expanded by the product rule
before discretization, so both residual routes are built from the same
primitive discrete fields (phi_k, phi_{i jbar}, pointwise e^{+-phi} and
the rho derivatives).  Differentiating the composite field e^phi
spectrally instead would break the pointwise proportionality of the two
routes at the aliasing level of the exp tail.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from . import exterior as ext
from .exterior import ConventionError
from .fields import random_trig
from .grid import (
    GridSpec,
    HermitianField,
    ScalarField,
    dd_bar,
    dz_all,
    lp_norm,
    mean,
)
from .hessian import sigma2_field

__all__ = [
    "ProblemData",
    "State",
    "omega_tilde",
    "grad_sq",
    "f_term",
    "residual_form",
    "rhs_F",
    "residual_sigma",
    "equivalence_constant",
]


@dataclass
class ProblemData:
    """Coefficients of one problem instance.

    alpha is the nonzero slope parameter, A > 0 the L^1 normalization
    target of e^{-phi}, rho a Hermitian (1,1)-coefficient field, and mu
    a mean-zero scalar source.
    """

    alpha: float
    A: float
    rho: HermitianField
    mu: ScalarField
    grid: GridSpec

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("slope parameter alpha must be nonzero")
        if not (self.A > 0):
            raise ValueError(f"normalization A must be positive, got {self.A}")
        if self.rho.grid != self.grid or self.mu.grid != self.grid:
            raise ValueError("rho/mu grids do not match the problem grid")
        mu_l1 = lp_norm(self.mu, 1)
        if abs(mean(self.mu)) * self.grid.volume > 1e-10 * max(mu_l1, 1e-300):
            raise ValueError(
                f"mu must have mean zero: integral {mean(self.mu) * self.grid.volume:.3e}"
            )


@dataclass
class State:
    """A candidate phi together with the continuation parameter t."""

    phi: ScalarField
    t: float

    def __post_init__(self):
        if not (-1e-12 <= self.t <= 1 + 1e-12):
            raise ValueError(f"t must lie in [0,1], got {self.t}")


def omega_tilde(s: State, d: ProblemData) -> HermitianField:
    """Hermitian coefficients of e^phi omega + t alpha e^{-phi} rho
    + 2 n alpha i ddbar(phi)."""
    grid = d.grid
    n = grid.n
    ep = np.exp(s.phi.values)
    em = np.exp(-s.phi.values)
    mats = 2.0 * n * d.alpha * dd_bar(s.phi).matrices
    mats += (s.t * d.alpha) * em * d.rho.matrices
    for j in range(n):
        mats[j, j] += ep
    return HermitianField(grid, mats)


def grad_sq(phi: ScalarField) -> np.ndarray:
    """|d phi|^2 = sum_k phi_k conj(phi_k) in the flat metric."""
    comps = dz_all(phi.grid, phi.values)
    return np.sum(np.abs(comps) ** 2, axis=0)


def _holo_one_form(grid: GridSpec, comps: np.ndarray) -> ext.FormPQ:
    return ext.FormPQ(grid, 1, 0, {((j,), ()): comps[j] for j in range(grid.n)})


def _antiholo_one_form(grid: GridSpec, comps: np.ndarray) -> ext.FormPQ:
    return ext.FormPQ(grid, 0, 1, {((), (j,)): np.conj(comps[j]) for j in range(grid.n)})


def _top(form: ext.FormPQ) -> np.ndarray:
    """Raw complex top ratio (imaginary residue checked by callers)."""
    return ext.top_ratio(form, imag_tol=None).values


def _real_checked(values: np.ndarray, grid: GridSpec, what: str) -> ScalarField:
    scale = max(float(np.max(np.abs(values.real))), 1.0)
    resid = float(np.max(np.abs(values.imag)))
    if resid > 1e-9 * scale:
        raise ConventionError(
            f"{what}: imaginary residue {resid:.3e} exceeds 1e-9 * {scale:.3e}"
        )
    return ScalarField(grid, values.real)


def rho_forms(d: ProblemData) -> dict:
    """Form-level data of rho (computed once per problem instance).

    Keys: rho (the real (1,1)-form), d_rho = del(rho),
    db_rho = delbar(rho), ddb_rho = del(delbar(rho)).
    """
    cached = d.__dict__.get("_rho_forms")
    if cached is None:
        rf = ext.herm_to_form(d.rho)
        db = ext.d_form_antiholo(rf)
        cached = {
            "rho": rf,
            "d_rho": ext.d_form_holo(rf),
            "db_rho": db,
            "ddb_rho": ext.d_form_holo(db),
        }
        d.__dict__["_rho_forms"] = cached
    return cached


def f_term(s: State, d: ProblemData) -> ScalarField:
    """Source term f of the 2-Hessian form, with rho, mu scaled by t."""
    grid = d.grid
    n, alpha, t = grid.n, d.alpha, s.t
    om_nm1 = ext.omega_power(grid, n - 1)
    om_nm2 = ext.omega_power(grid, n - 2)

    rf = rho_forms(d)
    em = np.exp(-s.phi.values)
    dphi = dz_all(grid, s.phi.values)
    p_phi = _holo_one_form(grid, dphi)
    q_phi = _antiholo_one_form(grid, dphi)

    acc = (2.0 * alpha * t) * _top(ext.wedge(rf["rho"], om_nm1))
    acc = acc + (alpha * t) ** 2 * np.exp(-2.0 * s.phi.values) * _top(
        ext.wedge(ext.wedge(rf["rho"], rf["rho"]), om_nm2)
    )
    acc = acc - (4.0 * n * alpha * t / factorial(n)) * d.mu.values

    # i (dphi ^ dbar phi ^ rho - dphi ^ dbar rho - d rho ^ dbar phi + d dbar rho)
    mixed = ext.wedge(ext.wedge(p_phi, q_phi), rf["rho"])
    mixed = ext.form_add(mixed, ext.form_scale(ext.wedge(p_phi, rf["db_rho"]), -1.0))
    mixed = ext.form_add(mixed, ext.form_scale(ext.wedge(rf["d_rho"], q_phi), -1.0))
    mixed = ext.form_add(mixed, rf["ddb_rho"])
    acc = acc + (4.0 * n * alpha**2 * t) * em * _top(
        ext.form_scale(ext.wedge(mixed, om_nm2), 1j)
    )
    return _real_checked(acc, grid, "f_term")


def _lead_form(s: State, d: ProblemData) -> ext.FormPQ:
    """i ddbar(e^phi omega - t alpha e^{-phi} rho), product rule expanded.

    Returns the (2,2)-form written in the primitive fields:

        e^phi (i ddbar phi + i dphi ^ dbar phi) ^ omega
        - t alpha e^{-phi} [ (i dphi ^ dbar phi - i ddbar phi) ^ rho
                             - i d rho ^ dbar phi - i dphi ^ dbar rho
                             + i ddbar rho ]
    """
    grid = d.grid
    alpha, t = d.alpha, s.t
    ep = np.exp(s.phi.values)
    em = np.exp(-s.phi.values)

    dphi = dz_all(grid, s.phi.values)
    p_phi = _holo_one_form(grid, dphi)
    q_phi = _antiholo_one_form(grid, dphi)
    ddb_phi = ext.herm_to_form(dd_bar(s.phi))
    w1i = ext.form_scale(ext.wedge(p_phi, q_phi), 1j)  # i dphi ^ dbar phi

    lead = ext.wedge(
        ext.form_scale(ext.form_add(ddb_phi, w1i), ep), ext.omega(grid)
    )
    if t != 0.0:
        rf = rho_forms(d)
        grp = ext.wedge(ext.form_add(w1i, ext.form_scale(ddb_phi, -1.0)), rf["rho"])
        grp = ext.form_add(grp, ext.form_scale(ext.wedge(rf["d_rho"], q_phi), -1j))
        grp = ext.form_add(grp, ext.form_scale(ext.wedge(p_phi, rf["db_rho"]), -1j))
        grp = ext.form_add(grp, ext.form_scale(rf["ddb_rho"], 1j))
        lead = ext.form_add(lead, ext.form_scale(grp, (-t * alpha) * em))
    return lead


def residual_form(s: State, d: ProblemData) -> ScalarField:
    """Residual of the form-level family equation, as a scalar field.

    Its grid mean vanishes to quadrature accuracy for smooth phi
    (discrete Stokes: every term is a derivative field times smooth
    weights, and mu has mean zero).
    """
    grid = d.grid
    n, alpha, t = grid.n, d.alpha, s.t
    om_nm2 = ext.omega_power(grid, n - 2)

    acc = _top(ext.wedge(_lead_form(s, d), om_nm2))
    ddb_phi = ext.herm_to_form(dd_bar(s.phi))
    acc = acc + (n * alpha) * _top(ext.wedge(ext.wedge(ddb_phi, ddb_phi), om_nm2))
    acc = acc + (t / factorial(n)) * d.mu.values
    return _real_checked(acc, grid, "residual_form")


def rhs_F(s: State, d: ProblemData) -> ScalarField:
    """Right-hand side F of sigma_2(omega_tilde) = F."""
    n = d.grid.n
    half = n * (n - 1) / 2.0
    ep = np.exp(s.phi.values)
    values = half * (ep * ep - 4.0 * d.alpha * ep * grad_sq(s.phi))
    values = values + half * f_term(s, d).values
    return ScalarField(d.grid, values)


def residual_sigma(s: State, d: ProblemData) -> ScalarField:
    """sigma_2(omega_tilde) - F; proportional to residual_form."""
    values = sigma2_field(omega_tilde(s, d)) - rhs_F(s, d).values
    return ScalarField(d.grid, values)


def equivalence_constant(d: ProblemData, num_fields: int = 10,
                         seed: int = 1729) -> float:
    """Proportionality constant kappa with residual_sigma = kappa * residual_form.

    Fitted by least squares on a fixed deterministic family of smooth
    random fields at t=1 (constant fields are degenerate and excluded by
    construction).  A relative spread above 1e-8 signals a convention
    bug and raises ConventionError.
    """
    rng = np.random.default_rng(seed)
    degree = max(1, d.grid.N // 4)
    fits = []
    for _ in range(num_fields):
        phi = random_trig(d.grid, rng, max_degree=degree, amplitude=0.4)
        s = State(phi, 1.0)
        rf = residual_form(s, d).values.ravel()
        rs = residual_sigma(s, d).values.ravel()
        denom = float(rf @ rf)
        if denom == 0.0:
            continue
        fits.append(float(rs @ rf) / denom)
    fits = np.asarray(fits)
    if fits.size < 2:
        raise ConventionError("equivalence fit degenerate: too few usable fields")
    kappa = float(np.mean(fits))
    spread = float(np.std(fits) / abs(kappa))
    if spread > 1e-8:
        raise ConventionError(
            f"equivalence constant not constant: mean {kappa:.6e}, "
            f"stddev/mean {spread:.3e}"
        )
    return kappa
