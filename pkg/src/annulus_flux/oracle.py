"""Closed-form reference flows used as ground truth.

Each constructor returns nodal (velocity, pressure) pairs that satisfy the
relevant system exactly in the continuum:

* Couette: u_theta = A r + B/r between rotating circles, an exact Stokes and
  Navier-Stokes solution with zero flux.
* Radial source: the flux carrier itself; its vector Laplacian vanishes, so
  it solves the steady Navier-Stokes system for every viscosity.
* Spiral: u_r = c/r combined with swirl A/r + B r^(1+c/nu), the Hamel-type
  exact solution with nonzero flux (the theta-momentum equation reduces to
  an Euler-Cauchy equation with exponents -1 and 1 + c/nu; verified by
  substitution before the build).
* Rotational Euler flow: zero radial velocity, swirl f(r) vanishing at both
  circles, pressure from the centripetal balance; an exact solution of the
  normalized Euler system whose boundary pressure constants differ.

Pressures are integrated with the grid's spectral radial antiderivative and
normalized to zero mean, except for the Euler flow whose pressure is pinned
to zero at the inner circle, where the sign of the pressure drop is the
interesting output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary import flux_carrier
from .fields import ScalarField, VelocityField
from .grid import PolarGrid, chebyshev_diff_matrix, clenshaw_curtis_weights, integrate


def couette_constants(omega1: float, omega2: float,
                      r_inner: float, r_outer: float) -> tuple[float, float]:
    """Constants of u_theta = A r + B / r matching rim speeds omega_i * R_i."""
    r1sq, r2sq = r_outer**2, r_inner**2
    a = (omega1 * r1sq - omega2 * r2sq) / (r1sq - r2sq)
    b = (omega2 - omega1) * r1sq * r2sq / (r1sq - r2sq)
    return a, b


def _mean_zero(grid: PolarGrid, values: np.ndarray) -> np.ndarray:
    return values - integrate(grid, values) / grid.area


def couette(grid: PolarGrid, omega1: float, omega2: float) -> tuple[VelocityField, ScalarField]:
    """Exact Couette flow for rim angular velocities (omega1 outer, omega2 inner)."""
    a, b = couette_constants(omega1, omega2, grid.r_inner, grid.r_outer)
    r = grid.rr
    u_theta = a * r + b / r
    u = VelocityField.from_arrays(grid, np.zeros_like(r), u_theta)
    # dp/dr = u_theta^2 / r, integrated spectrally, mean zero
    g0 = a * grid.r + b / grid.r
    p_line = grid.radial_antiderivative(g0**2 / grid.r)
    p = _mean_zero(grid, np.broadcast_to(p_line[:, None], r.shape).copy())
    return u, ScalarField(grid, p)


def radial_source(grid: PolarGrid, flux: float, nu: float = 1.0) -> tuple[VelocityField, ScalarField]:
    """Source/sink flow u = -(flux / 2 pi r) e_r with p = -flux^2/(8 pi^2 r^2).

    An exact steady Navier-Stokes solution for every ``nu``; the viscous
    term vanishes identically.
    """
    del nu  # exactness holds for every viscosity
    u = flux_carrier(grid, flux)
    p = _mean_zero(grid, -(flux**2) / (8.0 * np.pi**2 * grid.rr**2))
    return u, ScalarField(grid, p)


def spiral_flow(grid: PolarGrid, flux: float, amplitude: float,
                nu: float) -> tuple[VelocityField, ScalarField]:
    """Hamel-type spiral: radial source plus swirl, exact at every Reynolds number.

    With c = -flux/(2 pi) the swirl is u_theta = A/r + B r^(1 + c/nu), A fixed
    by u_theta(r_inner) = 0.  The exponent collision c/nu = -2 (the second
    branch degenerating onto 1/r) would need a logarithmic branch and is
    rejected.
    """
    c = -flux / (2.0 * np.pi)
    if abs(c / nu + 2.0) < 1e-12:
        raise ValueError(
            "spiral exponent collision at c/nu = -2: the swirl needs the "
            "unsupported logarithmic branch"
        )
    beta = 1.0 + c / nu
    big_a = -amplitude * grid.r_inner ** (beta + 1.0)
    r_line = grid.r
    swirl_line = big_a / r_line + amplitude * r_line**beta
    u = VelocityField.from_arrays(
        grid,
        c / grid.rr,
        np.broadcast_to(swirl_line[:, None], grid.rr.shape).copy(),
    )
    # radial momentum: dp/dr = c^2/r^3 + u_theta^2/r
    p_line = grid.radial_antiderivative(c**2 / r_line**3 + swirl_line**2 / r_line)
    p = _mean_zero(grid, np.broadcast_to(p_line[:, None], grid.rr.shape).copy())
    return u, ScalarField(grid, p)


# -- rotational Euler flow ----------------------------------------------------------


@dataclass(frozen=True)
class AmickProfile:
    """Swirl profile f on (r_inner, r_outer) vanishing at both ends.

    Profiles are named presets rather than arbitrary callables so runs are
    reproducible from configuration files.  ``lambda0`` scales the pressure
    of the associated Euler flow.
    """

    kind: str
    params: tuple
    lambda0: float = 1.0
    r_inner: float = 1.0
    r_outer: float = 2.0
    amplitude: float = 1.0

    @classmethod
    def zero(cls, r_inner: float = 1.0, r_outer: float = 2.0) -> "AmickProfile":
        """The trivial profile f = 0."""
        return cls("zero", (), 1.0, r_inner, r_outer)

    @classmethod
    def sin_squared(cls, lambda0: float = 1.0, r_inner: float = 1.0,
                    r_outer: float = 2.0) -> "AmickProfile":
        """f = sin^2(pi (r - r_inner)/(r_outer - r_inner))."""
        return cls("sin_squared", (), lambda0, r_inner, r_outer)

    @classmethod
    def poly_bump(cls, order: int = 4, lambda0: float = 1.0, r_inner: float = 1.0,
                  r_outer: float = 2.0) -> "AmickProfile":
        """f = [(r - r_inner)(r_outer - r)]^order, normalized to unit peak."""
        return cls("poly_bump", (int(order),), lambda0, r_inner, r_outer)

    @classmethod
    def shifted_bump(cls, support: tuple[float, float], order: int = 6,
                     lambda0: float = 1.0, r_inner: float = 1.0,
                     r_outer: float = 2.0) -> "AmickProfile":
        """Unit-peak bump supported in ``support``, zero elsewhere.

        Vanishes to order ``order`` at the support edges, which keeps the
        profile smooth enough for the spectral quadratures at desk
        resolutions.
        """
        lo, hi = float(support[0]), float(support[1])
        if not (r_inner <= lo < hi <= r_outer):
            raise ValueError("support must sit inside the annulus")
        return cls("shifted_bump", (lo, hi, int(order)), lambda0, r_inner, r_outer)

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "sin_squared":
            base = np.sin(np.pi * (r - self.r_inner) / (self.r_outer - self.r_inner)) ** 2
        elif self.kind == "poly_bump":
            (order,) = self.params
            half = 0.5 * (self.r_outer - self.r_inner)
            raw = (r - self.r_inner) * (self.r_outer - r) / half**2
            base = np.clip(raw, 0.0, None) ** order
        elif self.kind == "shifted_bump":
            lo, hi, order = self.params
            half = 0.5 * (hi - lo)
            raw = (r - lo) * (hi - r) / half**2
            base = np.where((r > lo) & (r < hi), np.clip(raw, 0.0, None) ** order, 0.0)
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        return self.amplitude * base

    def scaled(self, c: float) -> "AmickProfile":
        """Profile with the swirl rescaled by c (the pressure drop scales by c^2)."""
        return AmickProfile(self.kind, self.params, self.lambda0,
                            self.r_inner, self.r_outer, self.amplitude * c)

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind, "lambda0": self.lambda0,
            "r_inner": self.r_inner, "r_outer": self.r_outer, "amplitude": self.amplitude,
        }
        if self.kind == "poly_bump":
            out["order"] = self.params[0]
        elif self.kind == "shifted_bump":
            out["support"] = [self.params[0], self.params[1]]
            out["order"] = self.params[2]
        return out


def make_profile(spec) -> AmickProfile:
    """Profile from a configuration mapping (the JSON ``oracle`` block)."""
    spec = dict(spec)
    kind = spec.pop("kind")
    lambda0 = float(spec.pop("lambda0", 1.0))
    r_inner = float(spec.pop("r_inner", 1.0))
    r_outer = float(spec.pop("r_outer", 2.0))
    amplitude = float(spec.pop("amplitude", 1.0))
    if kind == "zero":
        profile = AmickProfile.zero(r_inner, r_outer)
    elif kind == "sin_squared":
        profile = AmickProfile.sin_squared(lambda0, r_inner, r_outer)
    elif kind == "poly_bump":
        profile = AmickProfile.poly_bump(int(spec.pop("order", 4)), lambda0, r_inner, r_outer)
    elif kind == "shifted_bump":
        profile = AmickProfile.shifted_bump(tuple(spec.pop("support")),
                                            int(spec.pop("order", 6)),
                                            lambda0, r_inner, r_outer)
    else:
        raise ValueError(f"unknown profile kind {kind!r}")
    return profile.scaled(amplitude) if amplitude != 1.0 else profile


def amick_flow(grid: PolarGrid, profile: AmickProfile) -> tuple[VelocityField, ScalarField]:
    """Rotational Euler flow (0, f(r)) with pressure lambda0 * int f^2/t dt.

    The pair solves the normalized Euler system exactly with zero boundary
    velocity; the pressure is pinned to zero at the inner circle so the
    boundary constants are 0 and the (positive) pressure drop.
    """
    if not (np.isclose(grid.r_inner, profile.r_inner)
            and np.isclose(grid.r_outer, profile.r_outer)):
        raise ValueError("profile and grid radii differ")
    f_line = profile(grid.r)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(f_line))))
    if abs(f_line[0]) > tol or abs(f_line[-1]) > tol:
        raise ValueError("profile does not vanish at the boundary circles")
    w = VelocityField.from_arrays(
        grid,
        np.zeros_like(grid.rr),
        np.broadcast_to(f_line[:, None], grid.rr.shape).copy(),
    )
    p_line = profile.lambda0 * grid.radial_antiderivative(f_line**2 / grid.r)
    p = np.broadcast_to(p_line[:, None], grid.rr.shape).copy()
    return w, ScalarField(grid, p)


_DROP_RULE_POINTS = 257


def amick_pressure_drop(profile: AmickProfile) -> float:
    """Boundary pressure difference p(r_outer) - p(r_inner) of the Euler flow.

    Evaluated with a standalone high-order Clenshaw-Curtis rule restricted
    to the profile's support (where the integrand is analytic), so the value
    is independent of any solver grid; strictly positive for nonzero
    profiles.
    """
    if profile.kind == "shifted_bump":
        lo, hi = profile.params[0], profile.params[1]
    else:
        lo, hi = profile.r_inner, profile.r_outer
    x, _ = chebyshev_diff_matrix(_DROP_RULE_POINTS)
    half = 0.5 * (hi - lo)
    r = lo + half * (x + 1.0)
    w = clenshaw_curtis_weights(_DROP_RULE_POINTS) * half
    return float(profile.lambda0 * np.sum(w * profile(r) ** 2 / r))
