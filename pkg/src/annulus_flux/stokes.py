"""Linear spectral solvers: the auxiliary Stokes problem and Poisson problems.

Everything here reduces to independent boundary-value problems in r, one per
angular Fourier mode, assembled as dense collocation matrices with boundary
rows replaced and solved by direct LU.

The Stokes problem is solved in stream-function form.  Writing the velocity
as flux carrier plus curl(psi), psi is biharmonic; per mode this is the
coupled second-order pair

    Lap_k psi + omega = 0,        Lap_k omega = rhs_k,

with clamped data (psi and d psi/d r) on both circles.  The splitting keeps
the collocation matrices at second-order conditioning.  Mode 0 needs care in
the multiply connected annulus: prescribing the stream-function constant on
both circles would generally excite the r^2 log(r) branch whose vorticity
is not single valued, i.e. the pressure would be multivalued.  Instead the
mode-0 system prescribes only the two slopes, pins psi at the inner circle
(pure gauge), and replaces the outer value row by the single-valued-pressure
side condition

    d omega / d r (r_outer) = (lambda/nu) * mean_theta[(u.grad u)_theta](r_outer),

which for the Stokes problem (zero right-hand side) is exactly the removal
of the log branch of the vorticity.  The outer stream constant then comes
out of the solve.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .boundary import BoundaryTrace, boundary_stream_data, flux_carrier
from .fields import (
    ScalarField,
    VelocityField,
    advect,
    curl,
    curl_of_stream,
    dirichlet_norm,
    divergence,
    gradient,
    l2_norm,
    vector_laplacian,
    velocity_l2_norm,
)
from .grid import PolarGrid, integrate

THREADS_ENV = "ANNULUS_FLUX_THREADS"


def max_threads() -> int:
    """Parallelism cap for the per-mode solves, from ANNULUS_FLUX_THREADS."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_modes(fn, count: int) -> list:
    workers = min(max_threads(), count)
    if workers <= 1:
        return [fn(k) for k in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


# -- per-mode operator caches -------------------------------------------------------


def _grid_key(grid: PolarGrid):
    return (grid.n_r, grid.n_theta, grid.r_inner, grid.r_outer)


def mode_laplacians(grid: PolarGrid) -> list[np.ndarray]:
    """Radial collocation matrices of Lap_k = d_rr + (1/r) d_r - k^2/r^2."""
    base = grid.d_rr + (1.0 / grid.r)[:, None] * grid.d_r
    inv_r2 = (1.0 / grid.r**2)
    return [base - (k * k) * np.diag(inv_r2) for k in range(grid.n_modes)]


_STREAM_CACHE: dict = {}
_POISSON_DIRICHLET_CACHE: dict = {}
_POISSON_NEUMANN_CACHE: dict = {}


def _stream_systems(grid: PolarGrid):
    key = _grid_key(grid)
    if key in _STREAM_CACHE:
        return _STREAM_CACHE[key]
    n = grid.n_r
    laps = mode_laplacians(grid)
    factored = []
    for k in range(grid.n_modes):
        m = np.zeros((2 * n, 2 * n))
        # stream block: slope rows at both circles, Lap psi + omega inside
        m[0, :n] = grid.d_r[0]
        m[1:n - 1, :n] = laps[k][1:n - 1]
        m[1:n - 1, n:] = np.eye(n)[1:n - 1]
        m[n - 1, :n] = grid.d_r[-1]
        # vorticity block: Lap omega inside, value rows / side condition
        if k == 0:
            m[n, n:] = grid.d_r[0]          # single-valued pressure
        else:
            m[n, 0] = 1.0                   # psi value at the outer circle
        m[n + 1:2 * n - 1, n:] = laps[k][1:n - 1]
        m[2 * n - 1, n - 1] = 1.0           # psi value at the inner circle
        factored.append(_factor(m, k))
    _STREAM_CACHE[key] = factored
    return factored


def _factor(matrix: np.ndarray, mode: int):
    try:
        lu = lu_factor(matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise ValueError(f"linear solve failed for angular mode {mode}: {exc}") from exc
    if not np.all(np.isfinite(lu[0])):
        raise ValueError(f"ill-conditioned collocation system at angular mode {mode}")
    return lu


@dataclass(frozen=True)
class StreamBC:
    """Clamped nodal boundary data for the stream function."""

    psi_outer: np.ndarray
    dpsi_outer: np.ndarray
    psi_inner: np.ndarray
    dpsi_inner: np.ndarray

    @classmethod
    def from_trace(cls, grid: PolarGrid, trace: BoundaryTrace) -> "StreamBC":
        psi_o, dpsi_o, psi_i, dpsi_i = boundary_stream_data(grid, trace)
        return cls(psi_o, dpsi_o, psi_i, dpsi_i)


def solve_stream_system(grid: PolarGrid, bc: StreamBC,
                        interior_rhs: np.ndarray | None = None,
                        sc_value: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Solve the per-mode clamped biharmonic pair for (psi, omega).

    ``interior_rhs`` is the nodal right-hand side of Lap(omega) = rhs (the
    caller includes any lambda/nu scaling); ``sc_value`` is the mode-0
    single-valued-pressure datum d omega/dr(r_outer).  Returns nodal arrays.
    """
    n = grid.n_r
    factored = _stream_systems(grid)
    v1 = np.fft.rfft(bc.psi_outer)
    s1 = np.fft.rfft(bc.dpsi_outer)
    v2 = np.fft.rfft(bc.psi_inner)
    s2 = np.fft.rfft(bc.dpsi_inner)
    q = np.zeros((n, grid.n_modes), dtype=complex)
    if interior_rhs is not None:
        q = grid.to_modes(interior_rhs)

    def solve_mode(k: int) -> np.ndarray:
        rhs = np.zeros(2 * n, dtype=complex)
        rhs[0] = s1[k]
        rhs[n - 1] = s2[k]
        if k == 0:
            rhs[n] = sc_value * grid.n_theta  # rfft scaling of an angular mean
        else:
            rhs[n] = v1[k]
        rhs[n + 1:2 * n - 1] = q[1:n - 1, k]
        rhs[2 * n - 1] = v2[k]
        stacked = np.column_stack([rhs.real, rhs.imag])
        sol = lu_solve(factored[k], stacked)
        return sol[:, 0] + 1j * sol[:, 1]

    modes = _map_modes(solve_mode, grid.n_modes)
    coef = np.stack(modes, axis=1)
    psi = grid.from_modes(coef[:n, :])
    omega = grid.from_modes(coef[n:, :])
    return psi, omega


# -- Stokes problem -----------------------------------------------------------------


@dataclass(frozen=True)
class StokesSolution:
    """Solution of the auxiliary Stokes problem with the given boundary datum."""

    velocity: VelocityField
    pressure: ScalarField
    trace_error: float
    norm_ratio: float


def _stokes_state(grid: PolarGrid, trace: BoundaryTrace):
    bc = StreamBC.from_trace(grid, trace)
    psi, omega = solve_stream_system(grid, bc)
    carrier = flux_carrier(grid, trace.flux)
    velocity = carrier + curl_of_stream(ScalarField(grid, psi))
    return psi, omega, velocity, bc


def stokes_solve(grid: PolarGrid, trace: BoundaryTrace, nu: float = 1.0) -> StokesSolution:
    """Velocity of the Stokes problem attaining ``trace``, with its pressure.

    The velocity is viscosity independent (pure Dirichlet data); ``nu``
    only scales the pressure.  The reported ``norm_ratio`` is the empirical
    stand-in for the nonconstructive Stokes bound: W^{1,2} norm of the
    solution over the trace-norm proxy.
    """
    _, _, velocity, bc = _stokes_state(grid, trace)
    pressure = pressure_from_momentum(grid, velocity, lam=0.0, nu=nu)
    theta = grid.theta
    trace_error = max(
        float(np.max(np.abs(velocity.u_r.values[0] - trace.radial_values("outer", theta)))),
        float(np.max(np.abs(velocity.u_theta.values[0] - trace.angular_values("outer", theta)))),
        float(np.max(np.abs(velocity.u_r.values[-1] - trace.radial_values("inner", theta)))),
        float(np.max(np.abs(velocity.u_theta.values[-1] - trace.angular_values("inner", theta)))),
    )
    w12 = float(np.sqrt(velocity_l2_norm(velocity) ** 2 + dirichlet_norm(velocity) ** 2))
    proxy = trace.trace_norm_proxy()
    ratio = w12 / proxy if proxy > 0 else 0.0
    return StokesSolution(velocity=velocity, pressure=pressure,
                          trace_error=trace_error, norm_ratio=ratio)


# -- Poisson solvers ----------------------------------------------------------------


def _poisson_dirichlet_systems(grid: PolarGrid):
    key = _grid_key(grid)
    if key in _POISSON_DIRICHLET_CACHE:
        return _POISSON_DIRICHLET_CACHE[key]
    n = grid.n_r
    factored = []
    for lap in mode_laplacians(grid):
        m = lap.copy()
        m[0, :] = 0.0
        m[0, 0] = 1.0
        m[n - 1, :] = 0.0
        m[n - 1, n - 1] = 1.0
        factored.append(_factor(m, len(factored)))
    _POISSON_DIRICHLET_CACHE[key] = factored
    return factored


def _poisson_neumann_systems(grid: PolarGrid):
    key = _grid_key(grid)
    if key in _POISSON_NEUMANN_CACHE:
        return _POISSON_NEUMANN_CACHE[key]
    n = grid.n_r
    factored = []
    for k, lap in enumerate(mode_laplacians(grid)):
        m = lap.copy()
        m[0, :] = grid.d_r[0]
        m[n - 1, :] = grid.d_r[-1]
        if k == 0:
            # Neumann mode 0 is defined up to a constant; trade one interior
            # row for the zero-mean condition, absorbing the discrete
            # compatibility defect there.
            m[n // 2, :] = grid.w_area
        factored.append(_factor(m, k))
    _POISSON_NEUMANN_CACHE[key] = factored
    return factored


def _solve_modal(grid: PolarGrid, factored, rhs_modes: np.ndarray) -> np.ndarray:
    def solve_mode(k: int) -> np.ndarray:
        stacked = np.column_stack([rhs_modes[:, k].real, rhs_modes[:, k].imag])
        sol = lu_solve(factored[k], stacked)
        return sol[:, 0] + 1j * sol[:, 1]

    modes = _map_modes(solve_mode, grid.n_modes)
    return grid.from_modes(np.stack(modes, axis=1))


def pressure_poisson(grid: PolarGrid, w: VelocityField, p1: float, p2: float,
                     div_tol: float = 1e-8) -> ScalarField:
    """Solve -Lap p = div[(w.grad) w] with p = p1 on Gamma_1, p = p2 on Gamma_2.

    Solved directly per angular mode with collocated Dirichlet rows, so the
    boundary values are reproduced exactly at the boundary nodes.
    """
    div_res = l2_norm(divergence(w))
    if div_res > div_tol:
        raise ValueError(f"w is not solenoidal (divergence L2 = {div_res:.3e})")
    forcing = divergence(advect(w, w))
    rhs_modes = grid.to_modes(-forcing.values)
    rhs_modes[0, :] = 0.0
    rhs_modes[-1, :] = 0.0
    rhs_modes[0, 0] = p1 * grid.n_theta
    rhs_modes[-1, 0] = p2 * grid.n_theta
    values = _solve_modal(grid, _poisson_dirichlet_systems(grid), rhs_modes)
    return ScalarField(grid, values)


def pressure_from_momentum(grid: PolarGrid, u: VelocityField, lam: float, nu: float,
                           full_output: bool = False):
    """Least-squares pressure for the momentum balance of ``u``.

    Minimizes the L2 mismatch between grad(p) and the momentum gradient
    field G = nu Lap(u) - lam (u.grad)u, i.e. solves the Neumann problem
    Lap p = div G with dp/dn = G.n, then removes the mean.  With
    ``full_output`` also returns a dict with the curl residual of G (zero
    for an exact solution; a large value flags that u solves nothing) and
    the L2 gradient mismatch.
    """
    lap_u = vector_laplacian(u)
    conv = advect(u, u)
    g_r = nu * lap_u.u_r.values - lam * conv.u_r.values
    g_t = nu * lap_u.u_theta.values - lam * conv.u_theta.values
    g_field = VelocityField.from_arrays(grid, g_r, g_t)
    rhs_modes = grid.to_modes(divergence(g_field).values)
    g_r_modes = grid.to_modes(g_r)
    rhs_modes[0, :] = g_r_modes[0, :]
    rhs_modes[-1, :] = g_r_modes[-1, :]
    rhs_modes[grid.n_r // 2, 0] = 0.0
    values = _solve_modal(grid, _poisson_neumann_systems(grid), rhs_modes)
    values = values - integrate(grid, values) / grid.area
    pressure = ScalarField(grid, values)
    if not full_output:
        return pressure
    grad_p = gradient(pressure)
    mismatch = velocity_l2_norm(grad_p - g_field)
    info = {
        "curl_residual": l2_norm(curl(g_field)),
        "gradient_mismatch": mismatch,
    }
    return pressure, info


def stokes_weak_residual(grid: PolarGrid, solution: StokesSolution,
                         n_radial: int = 4, n_angular: int = 3) -> float:
    """Max of the Stokes weak form against a clamped divergence-free test family.

    Test fields are curls of (1-x^2)^2 T_m(x) {cos,sin}(n theta); the
    residual integral is normalized by the test Dirichlet norm.
    """
    from .testspace import divergence_free_test_fields
    from .fields import grad_inner

    u = solution.velocity
    worst = 0.0
    for eta in divergence_free_test_fields(grid, n_radial, n_angular):
        res = integrate(grid, grad_inner(u, eta))
        norm = dirichlet_norm(eta)
        if norm > 0:
            worst = max(worst, abs(res) / norm)
    return worst
