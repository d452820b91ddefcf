"""Nonlinear solver: Picard and Newton iteration, homotopy, and continuation.

The discrete problem is posed for the stream function of the zero-flux part
of the velocity, u = u_F + curl(psi), with clamped boundary data fixed by the
zero-flux remainder of the boundary datum.  Taking the curl of the momentum
equation with the nonlinearity scaled by the homotopy parameter,

    -nu Lap(u) + lambda (u.grad)u + grad(p) = 0,

gives the vorticity transport equation nu Lap(omega) = lambda (u.grad)omega
with omega = -Lap(psi), plus one scalar side condition enforcing a
single-valued pressure around the hole (see the stokes module).  lambda = 1
is the physical problem and lambda = 0 the Stokes problem, so the family
interpolates exactly the way the continuation argument sets it up.

Two linearizations are provided.  The Picard map freezes the whole
convective term at the current iterate and solves a biharmonic problem per
angular mode (prefactored operators, linear convergence).  The Newton map
differentiates both convection slots; for rotationally symmetric states the
Jacobian stays mode-diagonal and is assembled per mode, otherwise a full
two-dimensional collocation Jacobian (with the mode-0 outer stream constant
as a bordered unknown) is built and solved densely.

Convergence is measured by the Dirichlet norm of the velocity update
relative to max(1, J): for Picard this is the fixed-point defect, for
Newton the step norm; both floor at the rounding level of the direct
solves.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .boundary import BoundaryTrace, flux_carrier, pure_flux_trace
from .diagnostics import DiagnosticsRecord, boundary_pressures, diagnostics_for_solution
from .fields import (
    ScalarField,
    VelocityField,
    curl,
    curl_of_stream,
    dirichlet_norm,
    flux_inner,
    grad_inner,
    scalar_laplacian,
    stream_function,
    trilinear,
)
from .grid import PolarGrid, integrate
from .stokes import StreamBC, mode_laplacians, pressure_from_momentum, solve_stream_system
from .testspace import divergence_free_test_fields


class NewtonSingularError(RuntimeError):
    """Raised when the Newton Jacobian is singular (candidate bifurcation datum)."""

    def __init__(self, lam: float, flux: float):
        super().__init__(f"singular Newton Jacobian at lambda = {lam}, flux = {flux}")
        self.lam = lam
        self.flux = flux


@dataclass(frozen=True)
class SolverConfig:
    """Settings of the nonlinear solve.

    ``lam`` is the homotopy parameter in [0, 1] multiplying the convective
    terms; ``tol`` bounds the relative Dirichlet norm of the last update;
    ``damping`` relaxes the update (1 = undamped).
    """

    nu: float = 1.0
    lam: float = 1.0
    method: str = "newton"
    tol: float = 1e-10
    max_iter: int = 200
    damping: float = 1.0

    def __post_init__(self) -> None:
        if self.nu <= 0:
            raise ValueError("viscosity must be positive")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("homotopy parameter must lie in [0, 1]")
        if self.method not in ("picard", "newton"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class SolveReport:
    """Converged (or final) state of a nonlinear solve with its diagnostics."""

    u: VelocityField
    w: VelocityField
    p: ScalarField
    J: float
    flux: float
    lam: float
    nu: float
    iterations: int
    converged: bool
    residual_history: list[float]
    diagnostics: DiagnosticsRecord
    boundary_pressure_deviation: float
    pressure_info: dict
    method: str

    def to_dict(self) -> dict:
        return {
            "J": self.J,
            "flux": self.flux,
            "lambda": self.lam,
            "nu": self.nu,
            "iterations": self.iterations,
            "converged": self.converged,
            "method": self.method,
            "residual_history": list(self.residual_history),
            "boundary_pressure_deviation": self.boundary_pressure_deviation,
            "pressure_info": dict(self.pressure_info),
            "diagnostics": self.diagnostics.to_dict(),
        }


@dataclass(frozen=True)
class SweepPoint:
    value: float
    J: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class ContinuationTrace:
    """Outcome of a parameter sweep; point values are strictly monotone."""

    parameter: str
    points: list[SweepPoint] = field(default_factory=list)

    def all_converged(self) -> bool:
        return all(pt.converged for pt in self.points)

    def first_failure(self) -> float | None:
        for pt in self.points:
            if not pt.converged:
                return pt.value
        return None


def _fourier_second_matrix(n: int) -> np.ndarray:
    """Dense periodic second-derivative matrix (full Nyquist term, matches FFT)."""
    if n % 2 != 0:
        raise ValueError("even n required")
    h = 2.0 * np.pi / n
    d2 = np.zeros((n, n))
    idx = np.arange(1, n)
    col = -0.5 * (-1.0) ** idx / np.sin(idx * h / 2.0) ** 2
    for i in range(n):
        d2[i, (i - idx) % n] = col
    np.fill_diagonal(d2, -np.pi**2 / (3.0 * h**2) - 1.0 / 6.0)
    return d2


# -- internal problem ---------------------------------------------------------------


class _Problem:
    """Frozen boundary data and operators for one nonlinear solve."""

    def __init__(self, grid: PolarGrid, cfg: SolverConfig, flux: float, bc: StreamBC):
        self.grid = grid
        self.cfg = cfg
        self.flux = flux
        self.bc = bc
        self.carrier = flux_carrier(grid, flux)
        self.ratio = cfg.lam / cfg.nu

    @classmethod
    def from_trace(cls, grid: PolarGrid, trace: BoundaryTrace, cfg: SolverConfig) -> "_Problem":
        return cls(grid, cfg, trace.flux, StreamBC.from_trace(grid, trace))

    def velocity(self, psi: np.ndarray) -> VelocityField:
        g = self.grid
        u_r = self.carrier.u_r.values + g.diff_theta(psi) / g.rr
        u_t = -g.diff_r(psi)
        return VelocityField.from_arrays(g, u_r, u_t)

    def convection_of_vorticity(self, u: VelocityField, omega: np.ndarray) -> np.ndarray:
        g = self.grid
        return (u.u_r.values * g.diff_r(omega)
                + u.u_theta.values * g.diff_theta(omega) / g.rr)

    def swirl_momentum(self, u: VelocityField) -> np.ndarray:
        """Nodal theta component of (u.grad)u, used by the pressure side condition."""
        g = self.grid
        ur, ut = u.u_r.values, u.u_theta.values
        return ur * g.diff_r(ut) + ut * g.diff_theta(ut) / g.rr + ur * ut / g.rr

    def stokes_state(self) -> tuple[np.ndarray, np.ndarray]:
        return solve_stream_system(self.grid, self.bc)

    def update_norm(self, dpsi: np.ndarray) -> float:
        return dirichlet_norm(curl_of_stream(ScalarField(self.grid, dpsi)))

    # -- Picard ---------------------------------------------------------------

    def picard_target(self, psi: np.ndarray, omega: np.ndarray):
        u = self.velocity(psi)
        rhs = self.ratio * self.convection_of_vorticity(u, omega)
        sc = self.ratio * float(self.swirl_momentum(u)[0, :].mean())
        return solve_stream_system(self.grid, self.bc, rhs, sc)

    # -- Newton ---------------------------------------------------------------

    def is_rotationally_symmetric(self, psi: np.ndarray, omega: np.ndarray) -> bool:
        for arr in (psi, omega, self.bc.psi_outer, self.bc.dpsi_outer,
                    self.bc.psi_inner, self.bc.dpsi_inner):
            scale = max(1.0, float(np.max(np.abs(arr))))
            if arr.ndim == 2:
                dev = arr - arr.mean(axis=-1, keepdims=True)
            else:
                dev = arr - arr.mean()
            if float(np.max(np.abs(dev))) > 1e-11 * scale:
                return False
        return True

    def _residual_fields(self, psi: np.ndarray, omega: np.ndarray):
        """Nodal residuals of the split system plus boundary-row residuals."""
        g = self.grid
        u = self.velocity(psi)
        lap_psi = (g.diff_r(psi, 2) + g.diff_r(psi) / g.rr
                   + g.diff_theta(psi, 2) / g.rr**2)
        f1 = lap_psi + omega
        lap_omega = (g.diff_r(omega, 2) + g.diff_r(omega) / g.rr
                     + g.diff_theta(omega, 2) / g.rr**2)
        f2 = lap_omega - self.ratio * self.convection_of_vorticity(u, omega)
        dpsi = g.diff_r(psi)
        domega = g.diff_r(omega)
        value_outer = psi[0, :] - self.bc.psi_outer
        bc_res = {
            "slope_outer": dpsi[0, :] - self.bc.dpsi_outer,
            "slope_inner": dpsi[-1, :] - self.bc.dpsi_inner,
            # the angular mean of the outer value is the bordered constant
            "value_outer": value_outer - value_outer.mean(),
            "value_inner": psi[-1, :] - self.bc.psi_inner,
            "side": float(domega[0, :].mean()
                          - self.ratio * self.swirl_momentum(u)[0, :].mean()),
        }
        return f1, f2, bc_res, u

    def newton_update(self, psi: np.ndarray, omega: np.ndarray):
        if self.is_rotationally_symmetric(psi, omega):
            return self._newton_update_modal(psi, omega)
        return self._newton_update_dense(psi, omega)

    def _newton_update_modal(self, psi: np.ndarray, omega: np.ndarray):
        """Per-mode Newton step around a rotationally symmetric state."""
        g = self.grid
        n = g.n_r
        f1, f2, bc_res, u = self._residual_fields(psi, omega)
        ur0 = u.u_r.values.mean(axis=1)
        ut0 = u.u_theta.values.mean(axis=1)
        domega0 = g.d_r @ omega.mean(axis=1)

        f1_hat = g.to_modes(f1)
        f2_hat = g.to_modes(f2)
        s1_hat = np.fft.rfft(bc_res["slope_outer"])
        s2_hat = np.fft.rfft(bc_res["slope_inner"])
        v1_hat = np.fft.rfft(bc_res["value_outer"])
        v2_hat = np.fft.rfft(bc_res["value_inner"])

        laps = mode_laplacians(g)
        r = g.r
        eye = np.eye(n)
        delta_psi = np.zeros((n, g.n_modes), dtype=complex)
        delta_omega = np.zeros((n, g.n_modes), dtype=complex)
        for k in range(g.n_modes):
            m = np.zeros((2 * n, 2 * n), dtype=complex)
            m[0, :n] = g.d_r[0]
            m[1:n - 1, :n] = laps[k][1:n - 1]
            m[1:n - 1, n:] = eye[1:n - 1]
            m[n - 1, :n] = g.d_r[-1]
            if k == 0:
                swirl_op = -(g.d_r + np.diag(1.0 / r)) @ g.d_r
                m[n, :n] = -self.ratio * ur0[0] * swirl_op[0]
                m[n, n:] = g.d_r[0]
            else:
                m[n, 0] = 1.0
            conv = np.diag(ur0) @ g.d_r + (1j * k) * np.diag(ut0 / r)
            m[n + 1:2 * n - 1, n:] = (laps[k] - self.ratio * conv)[1:n - 1]
            m[n + 1:2 * n - 1, :n] += (-self.ratio * 1j * k) * np.diag(domega0 / r)[1:n - 1]
            m[2 * n - 1, n - 1] = 1.0

            rhs = np.zeros(2 * n, dtype=complex)
            rhs[0] = -s1_hat[k]
            rhs[1:n - 1] = -f1_hat[1:n - 1, k]
            rhs[n - 1] = -s2_hat[k]
            rhs[n] = -bc_res["side"] * g.n_theta if k == 0 else -v1_hat[k]
            rhs[n + 1:2 * n - 1] = -f2_hat[1:n - 1, k]
            rhs[2 * n - 1] = -v2_hat[k]
            try:
                sol = np.linalg.solve(m, rhs)
            except np.linalg.LinAlgError as exc:
                raise NewtonSingularError(self.cfg.lam, self.flux) from exc
            if not np.all(np.isfinite(sol)):
                raise NewtonSingularError(self.cfg.lam, self.flux)
            delta_psi[:, k] = sol[:n]
            delta_omega[:, k] = sol[n:]
        return g.from_modes(delta_psi), g.from_modes(delta_omega)

    def _newton_update_dense(self, psi: np.ndarray, omega: np.ndarray):
        """Full 2D Newton step, bordered with the mode-0 outer stream constant."""
        g = self.grid
        n, nt = g.n_r, g.n_theta
        m_size = n * nt
        f1, f2, bc_res, u = self._residual_fields(psi, omega)

        eye_t = np.eye(nt)
        dr = np.kron(g.d_r, eye_t)
        drr = np.kron(g.d_rr, eye_t)
        dth = np.kron(np.eye(n), g.d_theta_matrix)
        dth_dr = np.kron(g.d_r, g.d_theta_matrix)
        rinv_dth = np.kron(np.diag(1.0 / g.r), g.d_theta_matrix)
        lap = (np.kron(g.d_rr + np.diag(1.0 / g.r) @ g.d_r, eye_t)
               + np.kron(np.diag(1.0 / g.r**2), _fourier_second_matrix(nt)))

        ur = u.u_r.values.ravel()
        ut = u.u_theta.values.ravel()
        rr = g.rr.ravel()
        omega_r = g.diff_r(omega).ravel()
        omega_t = (g.diff_theta(omega) / g.rr).ravel()

        # dF2/dpsi via the perturbed velocity, dF2/domega directly
        j_psi = -self.ratio * (omega_r[:, None] * rinv_dth - omega_t[:, None] * dr)
        j_omega = lap - self.ratio * (ur[:, None] * dr + (ut / rr)[:, None] * dth)

        outer = slice(0, nt)
        inner = slice(m_size - nt, m_size)

        total = 2 * m_size + 1
        k_mat = np.zeros((total, total))
        rhs = np.zeros(total)

        # stream rows: Lap psi + omega inside, slope rows on both rings
        k_mat[:m_size, :m_size] = lap
        k_mat[:m_size, m_size:2 * m_size] = np.eye(m_size)
        rhs[:m_size] = -f1.ravel()
        k_mat[outer, :] = 0.0
        k_mat[outer, :m_size] = dr[outer, :]
        rhs[:m_size][outer] = -bc_res["slope_outer"]
        k_mat[inner, :] = 0.0
        k_mat[inner, :m_size] = dr[inner, :]
        rhs[:m_size][inner] = -bc_res["slope_inner"]

        # vorticity rows: transport inside, psi value rows on both rings
        rows_b = slice(m_size, 2 * m_size)
        k_mat[rows_b, :m_size] = j_psi
        k_mat[rows_b, m_size:2 * m_size] = j_omega
        rhs[rows_b] = -f2.ravel()
        b_outer = np.arange(m_size, m_size + nt)
        b_inner = np.arange(2 * m_size - nt, 2 * m_size)
        k_mat[b_outer, :] = 0.0
        k_mat[b_outer, np.arange(nt)] = 1.0
        k_mat[b_outer, -1] = -1.0
        rhs[b_outer] = -bc_res["value_outer"]
        k_mat[b_inner, :] = 0.0
        k_mat[b_inner, np.arange(m_size - nt, m_size)] = 1.0
        rhs[b_inner] = -bc_res["value_inner"]

        # bordered side-condition row: mean over the outer ring of the
        # linearized single-valued-pressure balance
        ut_r = g.diff_r(u.u_theta.values).ravel()
        ut_t = g.diff_theta(u.u_theta.values).ravel()
        d_swirl = ((ut_r + ut / rr)[:, None] * rinv_dth
                   - ur[:, None] * drr
                   - (ut_t / rr)[:, None] * dr
                   - (ut / rr)[:, None] * dth_dr
                   - (ur / rr)[:, None] * dr)
        k_mat[-1, :m_size] = -self.ratio * d_swirl[:nt, :].mean(axis=0)
        k_mat[-1, m_size:2 * m_size] = dr[:nt, :].mean(axis=0)
        rhs[-1] = -bc_res["side"]

        try:
            sol = np.linalg.solve(k_mat, rhs)
        except np.linalg.LinAlgError as exc:
            raise NewtonSingularError(self.cfg.lam, self.flux) from exc
        if not np.all(np.isfinite(sol)):
            raise NewtonSingularError(self.cfg.lam, self.flux)
        return sol[:m_size].reshape(n, nt), sol[m_size:2 * m_size].reshape(n, nt)


# -- iteration drivers --------------------------------------------------------------


def _iterate(problem: _Problem, psi0: np.ndarray, omega0: np.ndarray,
             on_iterate: Callable | None = None):
    """Run the configured iteration from (psi0, omega0).

    Returns (psi, omega, history, converged, iterations).  On a singular
    Newton Jacobian the step falls back to a damped Picard sweep for that
    iteration, the documented robustness fallback near turning points.
    """
    cfg = problem.cfg
    psi, omega = psi0, omega0
    history: list[float] = []
    converged = False
    iterations = 0
    # at lambda = 0 the problem is the (linear) Stokes problem; the fixed-point
    # map reproduces its solution exactly, so no linearization is needed
    method = "picard" if cfg.lam == 0.0 else cfg.method
    for iterations in range(1, cfg.max_iter + 1):
        scale = max(1.0, problem.update_norm(psi - psi0))
        if method == "picard":
            target_psi, target_omega = problem.picard_target(psi, omega)
            dpsi, domega = target_psi - psi, target_omega - omega
        else:
            try:
                dpsi, domega = problem.newton_update(psi, omega)
            except NewtonSingularError:
                target_psi, target_omega = problem.picard_target(psi, omega)
                dpsi, domega = 0.5 * (target_psi - psi), 0.5 * (target_omega - omega)
        defect = problem.update_norm(dpsi) / scale
        history.append(defect)
        psi = psi + cfg.damping * dpsi
        omega = omega + cfg.damping * domega
        if on_iterate is not None:
            on_iterate(problem.velocity(psi))
        if defect < cfg.tol:
            converged = True
            break
        if not np.all(np.isfinite(psi)):
            break
    return psi, omega, history, converged, iterations


def solve(grid: PolarGrid, trace: BoundaryTrace, cfg: SolverConfig,
          on_iterate: Callable | None = None,
          warm_start: tuple[np.ndarray, np.ndarray] | None = None) -> SolveReport:
    """Solve the steady problem for the datum ``trace`` at the configured lambda.

    Starts from w = 0 (the Stokes solution) unless a warm-start state is
    given; attaches the least-squares pressure and the diagnostics record.
    The prescribed flux is carried exactly at every iterate because the
    carrier never enters the iteration.
    """
    problem = _Problem.from_trace(grid, trace, cfg)
    psi_stokes, omega_stokes = problem.stokes_state()
    u_stokes = problem.velocity(psi_stokes)
    psi0, omega0 = warm_start if warm_start is not None else (psi_stokes, omega_stokes)
    psi, omega, history, converged, iterations = _iterate(problem, psi0, omega0, on_iterate)

    u = problem.velocity(psi)
    w = u - u_stokes
    j = dirichlet_norm(w)
    p, pinfo = pressure_from_momentum(grid, u, cfg.lam, cfg.nu, full_output=True)
    psi_zero_flux = ScalarField(grid, psi - psi[-1, 0])
    diag = diagnostics_for_solution(grid, u, p, cfg.lam, cfg.nu, u_stokes, w,
                                    psi=psi_zero_flux)
    return SolveReport(
        u=u, w=w, p=p, J=j, flux=problem.flux, lam=cfg.lam, nu=cfg.nu,
        iterations=iterations, converged=converged, residual_history=history,
        diagnostics=diag,
        boundary_pressure_deviation=boundary_pressures(p).deviation,
        pressure_info=pinfo, method=cfg.method,
    )


# -- single-step operations ---------------------------------------------------------


def _state_from_fields(w_m: VelocityField, u_aux: VelocityField, cfg: SolverConfig,
                       trace_tol: float = 1e-8):
    """Reconstruct the (psi, omega) state and problem from (w_m, U)."""
    g = u_aux.grid
    bnd_scale = max(1.0, float(np.max(np.abs(w_m.u_r.values))),
                    float(np.max(np.abs(w_m.u_theta.values))))
    bnd = max(
        float(np.max(np.abs(w_m.u_r.values[[0, -1], :]))),
        float(np.max(np.abs(w_m.u_theta.values[[0, -1], :]))),
    )
    if bnd > trace_tol * bnd_scale:
        raise ValueError(f"w must have zero boundary trace (max boundary value {bnd:.3e})")
    flux = flux_inner(u_aux)
    carrier = flux_carrier(g, flux)
    psi_aux = stream_function(u_aux - carrier)
    psi_w = stream_function(w_m)
    psi = psi_aux.values + psi_w.values
    # first-derivative curl of the data is an order of magnitude less noisy
    # than -Lap(psi); the carrier is curl free
    omega = curl(w_m + u_aux).values
    dpsi = g.diff_r(psi)
    bc = StreamBC(psi_outer=psi[0, :], dpsi_outer=dpsi[0, :],
                  psi_inner=psi[-1, :], dpsi_inner=dpsi[-1, :])
    problem = _Problem(g, cfg, flux, bc)
    return problem, psi, omega


def picard_step(w_m: VelocityField, u_aux: VelocityField, cfg: SolverConfig) -> VelocityField:
    """One frozen-coefficient fixed-point step; returns the next zero-trace part.

    Solves the Stokes-type linear problem whose convective terms are
    evaluated at w_m; at lambda = 0 the result is identically zero.
    """
    problem, psi, omega = _state_from_fields(w_m, u_aux, cfg)
    target_psi, _ = problem.picard_target(psi, omega)
    return problem.velocity(target_psi) - u_aux


def newton_step(w_m: VelocityField, u_aux: VelocityField, cfg: SolverConfig) -> VelocityField:
    """One full-linearization step; raises NewtonSingularError on a singular Jacobian."""
    problem, psi, omega = _state_from_fields(w_m, u_aux, cfg)
    dpsi, _ = problem.newton_update(psi, omega)
    return problem.velocity(psi + dpsi) - u_aux


# -- continuation -------------------------------------------------------------------


def sweep(grid: PolarGrid, trace: BoundaryTrace, cfg: SolverConfig,
          parameter: str, values: Sequence[float]) -> ContinuationTrace:
    """Warm-started continuation in the homotopy parameter or in the flux.

    For a flux sweep the zero-flux remainder of the datum stays fixed and
    the carrier's flux takes the swept value, so the clamped stream data
    never changes and the previous state remains an admissible warm start.
    On a failed point one bisection level is attempted (solve the midpoint,
    then retry); if the point still fails it is recorded as diverged and
    the sweep continues from the last converged state.
    """
    values = [float(v) for v in values]
    if len(values) >= 2:
        diffs = np.diff(values)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("sweep values must be strictly monotone")
    if parameter not in ("lambda", "flux"):
        raise ValueError(f"unknown sweep parameter {parameter!r}")

    remainder = trace.zero_flux_remainder()
    points: list[SweepPoint] = []
    warm: tuple[np.ndarray, np.ndarray] | None = None
    last_value: float | None = None

    def run(value: float, start) -> SolveReport:
        if parameter == "lambda":
            cfg_v = replace(cfg, lam=value)
            trace_v = trace
        else:
            cfg_v = cfg
            trace_v = remainder + pure_flux_trace(value, grid.r_inner, grid.r_outer)
        return solve(grid, trace_v, cfg_v, warm_start=start)

    for value in values:
        report = run(value, warm)
        if not report.converged and warm is not None and last_value is not None:
            midpoint = 0.5 * (last_value + value)
            mid_report = run(midpoint, warm)
            points.append(SweepPoint(midpoint, mid_report.J, mid_report.converged,
                                     mid_report.iterations))
            if mid_report.converged:
                warm = _report_state(mid_report, grid)
                report = run(value, warm)
        points.append(SweepPoint(value, report.J, report.converged, report.iterations))
        if report.converged:
            warm = _report_state(report, grid)
            last_value = value
    return ContinuationTrace(parameter=parameter, points=points)


def _report_state(report: SolveReport, grid: PolarGrid) -> tuple[np.ndarray, np.ndarray]:
    carrier = flux_carrier(grid, report.flux)
    psi = stream_function(report.u - carrier, flux_tol=1e-6, div_tol=1e-4)
    omega = -scalar_laplacian(psi).values
    return psi.values, omega


# -- weak-form checks ---------------------------------------------------------------


def weak_residual(grid: PolarGrid, w: VelocityField, u_aux: VelocityField,
                  cfg: SolverConfig, n_radial: int = 4, n_angular: int = 3) -> float:
    """Worst normalized defect of the homotopy weak form over a test family.

    For each divergence-free zero-trace test field eta the quantity

        nu int grad(w):grad(eta) - lambda [ int ((w+U).grad)eta . w
            + int (w.grad)eta . U + int (U.grad)eta . U ]

    is evaluated by quadrature and normalized by the Dirichlet norm of eta.
    """
    worst = 0.0
    for eta in divergence_free_test_fields(grid, n_radial, n_angular):
        lhs = cfg.nu * integrate(grid, grad_inner(w, eta))
        rhs = cfg.lam * (
            trilinear(w + u_aux, eta, w)
            + trilinear(w, eta, u_aux)
            + trilinear(u_aux, eta, u_aux)
        )
        norm = dirichlet_norm(eta)
        if norm > 0:
            worst = max(worst, abs(lhs - rhs) / norm)
    return worst


def energy_cancellation(w: VelocityField, u_aux: VelocityField) -> float:
    """|int ((w+U).grad)w . w|, the cancellation that drives the energy bound."""
    return abs(trilinear(w + u_aux, w, w))
