"""Boundary data on the two circles, admissibility, and solenoidal extensions.

A boundary datum is stored as angular Fourier data of its normal and angular
components on each circle.  The normal is always outward with respect to the
annulus (+e_r on the outer circle Gamma_1, -e_r on the inner circle Gamma_2);
the tangential component is stored as the plain angular component a_theta on
both circles so no orientation bookkeeping leaks into user code.

Coefficients use the one-sided convention

    v(theta) = Re( sum_{k>=0} c_k exp(i k theta) ),

i.e. c_0 is the mean (imaginary part ignored) and c_k = a_k - i b_k for the
cos/sin pair at harmonic k >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .fields import VelocityField, curl_of_stream, dirichlet_norm, velocity_l2_norm
from .grid import PolarGrid

Coefficients = Mapping[int, complex]

_ADMISSIBILITY_TOL = 1e-10


def _clean(coefs: Coefficients | None) -> dict[int, complex]:
    out: dict[int, complex] = {}
    for k, c in (coefs or {}).items():
        k = int(k)
        if k < 0:
            raise ValueError("harmonics are indexed by k >= 0 in the one-sided convention")
        c = complex(c)
        if c != 0:
            out[k] = c
    return out


def evaluate_harmonics(coefs: Coefficients, theta: np.ndarray) -> np.ndarray:
    """Evaluate one-sided Fourier data at angles ``theta``."""
    values = np.zeros_like(np.asarray(theta, dtype=float))
    for k, c in coefs.items():
        if k == 0:
            values = values + c.real
        else:
            values = values + c.real * np.cos(k * theta) - c.imag * np.sin(k * theta)
    return values


@dataclass(frozen=True)
class BoundaryTrace:
    """Admissible velocity datum on the two boundary circles.

    ``normal_outer``/``normal_inner`` hold a.n (n outward w.r.t. the
    annulus); ``angular_outer``/``angular_inner`` hold a_theta.  The net
    flux through the inner circle is derived data; on construction the
    compatibility condition (zero total flux) is enforced to 1e-10.
    """

    r_inner: float
    r_outer: float
    normal_outer: dict[int, complex] = field(default_factory=dict)
    angular_outer: dict[int, complex] = field(default_factory=dict)
    normal_inner: dict[int, complex] = field(default_factory=dict)
    angular_inner: dict[int, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("normal_outer", "angular_outer", "normal_inner", "angular_inner"):
            object.__setattr__(self, name, _clean(getattr(self, name)))
        outer, inner = self.flux_outer, self.flux
        if abs(outer + inner) > _ADMISSIBILITY_TOL * max(1.0, abs(outer), abs(inner)):
            raise ValueError(
                "boundary datum violates the compatibility condition: "
                f"flux through Gamma_1 = {outer:.12e}, through Gamma_2 = {inner:.12e}, "
                f"sum = {outer + inner:.3e}"
            )

    @property
    def flux(self) -> float:
        """Net flux through the inner boundary, integral of a.n over Gamma_2."""
        return 2.0 * np.pi * self.r_inner * self.normal_inner.get(0, 0.0 + 0j).real

    @property
    def flux_outer(self) -> float:
        return 2.0 * np.pi * self.r_outer * self.normal_outer.get(0, 0.0 + 0j).real

    @property
    def max_harmonic(self) -> int:
        keys = [0]
        for d in (self.normal_outer, self.angular_outer, self.normal_inner, self.angular_inner):
            keys.extend(d.keys())
        return max(keys)

    # -- nodal evaluation ---------------------------------------------------------

    def radial_values(self, side: str, theta: np.ndarray) -> np.ndarray:
        """a_r on the requested circle ('outer' or 'inner') at angles theta."""
        if side == "outer":
            return evaluate_harmonics(self.normal_outer, theta)
        if side == "inner":
            return -evaluate_harmonics(self.normal_inner, theta)
        raise ValueError(f"side must be 'outer' or 'inner', got {side!r}")

    def angular_values(self, side: str, theta: np.ndarray) -> np.ndarray:
        if side == "outer":
            return evaluate_harmonics(self.angular_outer, theta)
        if side == "inner":
            return evaluate_harmonics(self.angular_inner, theta)
        raise ValueError(f"side must be 'outer' or 'inner', got {side!r}")

    # -- algebra ------------------------------------------------------------------

    def __add__(self, other: "BoundaryTrace") -> "BoundaryTrace":
        if (self.r_inner, self.r_outer) != (other.r_inner, other.r_outer):
            raise ValueError("traces live on different annuli")

        def merge(a: dict, b: dict) -> dict:
            out = dict(a)
            for k, c in b.items():
                out[k] = out.get(k, 0.0 + 0j) + c
            return out

        return BoundaryTrace(
            self.r_inner, self.r_outer,
            merge(self.normal_outer, other.normal_outer),
            merge(self.angular_outer, other.angular_outer),
            merge(self.normal_inner, other.normal_inner),
            merge(self.angular_inner, other.angular_inner),
        )

    def scaled(self, c: float) -> "BoundaryTrace":
        return BoundaryTrace(
            self.r_inner, self.r_outer,
            {k: c * v for k, v in self.normal_outer.items()},
            {k: c * v for k, v in self.angular_outer.items()},
            {k: c * v for k, v in self.normal_inner.items()},
            {k: c * v for k, v in self.angular_inner.items()},
        )

    def zero_flux_remainder(self) -> "BoundaryTrace":
        """Subtract the trace of the flux carrier so both per-circle fluxes vanish."""
        return self + _carrier_trace(-self.flux, self.r_inner, self.r_outer)

    def trace_norm_proxy(self) -> float:
        """Discrete H^(1/2)-weighted Fourier norm, sum (1+|k|)|c_k|^2 over all data."""
        total = 0.0
        for d in (self.normal_outer, self.angular_outer, self.normal_inner, self.angular_inner):
            for k, c in d.items():
                total += (1.0 + abs(k)) * abs(c) ** 2
        return float(np.sqrt(total))


# -- presets ---------------------------------------------------------------------


def _carrier_trace(flux: float, r_inner: float, r_outer: float) -> BoundaryTrace:
    return BoundaryTrace(
        r_inner, r_outer,
        normal_outer={0: -flux / (2.0 * np.pi * r_outer)},
        normal_inner={0: flux / (2.0 * np.pi * r_inner)},
    )


def pure_flux_trace(flux: float, r_inner: float = 1.0, r_outer: float = 2.0) -> BoundaryTrace:
    """Trace of the flux carrier u_F = -(flux/2 pi r) e_r."""
    return _carrier_trace(float(flux), float(r_inner), float(r_outer))


def couette_trace(omega1: float, omega2: float,
                  r_inner: float = 1.0, r_outer: float = 2.0) -> BoundaryTrace:
    """Rigid rotations omega1 of Gamma_1 (outer) and omega2 of Gamma_2 (inner)."""
    return BoundaryTrace(
        float(r_inner), float(r_outer),
        angular_outer={0: omega1 * r_outer},
        angular_inner={0: omega2 * r_inner},
    )


def spiral_trace(flux: float, amplitude: float, nu: float,
                 r_inner: float = 1.0, r_outer: float = 2.0) -> BoundaryTrace:
    """Trace of the Hamel-type spiral flow u_r = c/r, u_theta = A/r + B r^(1+c/nu).

    c = -flux/(2 pi); A is fixed so the swirl vanishes on the inner circle.
    """
    c = -flux / (2.0 * np.pi)
    beta = 1.0 + c / nu
    big_a = -amplitude * r_inner ** (beta + 1.0)
    swirl_outer = big_a / r_outer + amplitude * r_outer**beta
    return BoundaryTrace(
        float(r_inner), float(r_outer),
        normal_outer={0: c / r_outer},
        angular_outer={0: swirl_outer},
        normal_inner={0: -c / r_inner},
        angular_inner={0: 0.0},
    )


def fourier_trace(r_inner: float, r_outer: float,
                  normal_outer: Coefficients | None = None,
                  angular_outer: Coefficients | None = None,
                  normal_inner: Coefficients | None = None,
                  angular_inner: Coefficients | None = None) -> BoundaryTrace:
    """Trace from explicit harmonic coefficient tables; admissibility is checked."""
    return BoundaryTrace(float(r_inner), float(r_outer),
                         _clean(normal_outer), _clean(angular_outer),
                         _clean(normal_inner), _clean(angular_inner))


def _parse_coefficients(raw) -> dict[int, complex]:
    out = {}
    for key, val in (raw or {}).items():
        if isinstance(val, (list, tuple)):
            val = complex(val[0], val[1] if len(val) > 1 else 0.0)
        out[int(key)] = complex(val)
    return out


def make_trace(spec: Mapping) -> BoundaryTrace:
    """Build a trace from a configuration mapping (the JSON ``boundary`` block).

    Supported presets: ``pure_flux`` (flux), ``couette`` (omega1, omega2),
    ``spiral`` (flux, amplitude, nu), ``fourier`` (coefficient tables keyed
    by harmonic, values scalar or [re, im] pairs).  Radii default to the
    canonical (1, 2) annulus.
    """
    spec = dict(spec)
    preset = spec.pop("preset", None)
    r_inner = float(spec.pop("r_inner", 1.0))
    r_outer = float(spec.pop("r_outer", 2.0))
    if preset == "pure_flux":
        return pure_flux_trace(float(spec.pop("flux")), r_inner, r_outer)
    if preset == "couette":
        return couette_trace(float(spec.pop("omega1", 0.0)), float(spec.pop("omega2", 0.0)),
                             r_inner, r_outer)
    if preset == "spiral":
        return spiral_trace(float(spec.pop("flux")), float(spec.pop("amplitude", 1.0)),
                            float(spec.pop("nu", 1.0)), r_inner, r_outer)
    if preset == "fourier":
        return fourier_trace(
            r_inner, r_outer,
            _parse_coefficients(spec.pop("normal_outer", None)),
            _parse_coefficients(spec.pop("angular_outer", None)),
            _parse_coefficients(spec.pop("normal_inner", None)),
            _parse_coefficients(spec.pop("angular_inner", None)),
        )
    raise ValueError(f"unknown boundary preset {preset!r}")


# -- carrier and extension ---------------------------------------------------------


def flux_carrier(grid: PolarGrid, flux: float) -> VelocityField:
    """The irrotational carrier u_F = -(flux / 2 pi r) e_r.

    Exactly solenoidal and curl free, with net flux ``flux`` through the
    inner boundary; its vector Laplacian vanishes identically, so it is a
    steady solution for every viscosity.
    """
    u_r = -flux / (2.0 * np.pi * grid.rr)
    return VelocityField.from_arrays(grid, u_r, np.zeros_like(u_r))


def boundary_stream_data(grid: PolarGrid, trace: BoundaryTrace):
    """Clamped stream-function data of the zero-flux remainder of ``trace``.

    Returns four nodal arrays (psi_outer, dpsi_outer, psi_inner, dpsi_inner)
    on the angular nodes: the single-valued boundary values of psi (zero
    angular mean on each circle) and the radial derivatives d psi / d r.

    Raises if the trace carries harmonics the grid cannot represent.
    """
    if not np.isclose(grid.r_inner, trace.r_inner) or not np.isclose(grid.r_outer, trace.r_outer):
        raise ValueError("trace and grid radii differ")
    if trace.max_harmonic >= grid.n_theta // 2:
        raise ValueError(
            f"trace harmonic {trace.max_harmonic} is not resolved by n_theta={grid.n_theta}"
        )
    rem = trace.zero_flux_remainder()
    theta = grid.theta
    psi_bnd = {}
    for side, radius in (("outer", grid.r_outer), ("inner", grid.r_inner)):
        # d psi / d theta = r a_r; integrate the harmonics explicitly
        values = np.zeros_like(theta)
        for k, c in (rem.normal_outer if side == "outer" else rem.normal_inner).items():
            a_r = c if side == "outer" else -c
            if k == 0:
                continue  # zero-flux remainder: no mean radial component
            # antiderivative of Re(a_r e^{ik th}) is Re(a_r e^{ik th} / (ik))
            coef = a_r / (1j * k)
            values += radius * (coef.real * np.cos(k * theta) - coef.imag * np.sin(k * theta))
        psi_bnd[side] = values
    dpsi_outer = -rem.angular_values("outer", theta)
    dpsi_inner = -rem.angular_values("inner", theta)
    return psi_bnd["outer"], dpsi_outer, psi_bnd["inner"], dpsi_inner


def _hermite_quintic(t: np.ndarray):
    """Cardinal quintic basis for (value, slope) data at both ends, zero end curvature."""
    t2, t3 = t * t, t**3
    t4, t5 = t2 * t2, t2 * t3
    h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5
    h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5
    h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5
    h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5
    return h00, h10, h01, h11


def extension_stream(grid: PolarGrid, trace: BoundaryTrace) -> np.ndarray:
    """Quintic-in-r blend of the boundary stream data of the zero-flux remainder."""
    psi_o, dpsi_o, psi_i, dpsi_i = boundary_stream_data(grid, trace)
    span = grid.r_outer - grid.r_inner
    t = (grid.r - grid.r_inner) / span
    h00, h10, h01, h11 = _hermite_quintic(t)
    return (
        np.outer(h00, psi_i) + span * np.outer(h10, dpsi_i)
        + np.outer(h01, psi_o) + span * np.outer(h11, dpsi_o)
    )


def solenoidal_extension(grid: PolarGrid, trace: BoundaryTrace) -> VelocityField:
    """Divergence-free interior field attaining the boundary datum.

    Built as flux carrier plus the curl of a quintic blend of the remainder's
    boundary stream data, so the construction is linear in the datum and the
    divergence vanishes to rounding.
    """
    from .fields import ScalarField

    psi_ext = ScalarField(grid, extension_stream(grid, trace))
    return flux_carrier(grid, trace.flux) + curl_of_stream(psi_ext)


@dataclass(frozen=True)
class ExtensionReport:
    """Empirical data for the extension bound: norms and their ratio."""

    field_norm: float
    trace_norm: float
    ratio: float


def extension_report(grid: PolarGrid, trace: BoundaryTrace) -> ExtensionReport:
    """W^{1,2} norm of the extension against the trace-norm proxy.

    The continuous bound has a nonconstructive constant; only this
    empirical ratio is reported.
    """
    a_field = solenoidal_extension(grid, trace)
    w12 = float(np.sqrt(velocity_l2_norm(a_field) ** 2 + dirichlet_norm(a_field) ** 2))
    proxy = trace.trace_norm_proxy()
    ratio = w12 / proxy if proxy > 0 else 0.0
    return ExtensionReport(field_norm=w12, trace_norm=proxy, ratio=ratio)
