"""Spectral collocation grid for the annulus R2 < |x| < R1.

The discretization is Chebyshev-Gauss-Lobatto collocation in the radius
(affinely mapped to [r_inner, r_outer]) and equispaced Fourier collocation
in the angle.  Radial quadrature uses Clenshaw-Curtis weights with the
polar Jacobian r; angular quadrature is the trapezoid rule, which is
spectrally exact for periodic integrands.

Index convention: nodal arrays have shape (n_r, n_theta) with the radial
index running from the outer boundary (row 0, r = r_outer) to the inner
boundary (row n_r - 1, r = r_inner), following the native Chebyshev node
ordering x_j = cos(pi j / N).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve


def chebyshev_diff_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev-Gauss-Lobatto nodes and differentiation matrix.

    Parameters
    ----------
    n : int
        Number of collocation points (polynomial degree n - 1).

    Returns
    -------
    x : ndarray, shape (n,)
        Nodes cos(pi*j/(n-1)), decreasing from 1 to -1.
    d : ndarray, shape (n, n)
        First-derivative collocation matrix, exact on polynomials of
        degree <= n - 1.
    """
    if n < 2:
        raise ValueError("need at least two Chebyshev points")
    big_n = n - 1
    j = np.arange(n)
    x = np.cos(np.pi * j / big_n)
    c = np.hstack([2.0, np.ones(big_n - 1), 2.0]) * (-1.0) ** j
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(n))
    d -= np.diag(d.sum(axis=1))
    return x, d


def clenshaw_curtis_weights(n: int) -> np.ndarray:
    """Clenshaw-Curtis quadrature weights on [-1, 1] for the n CGL nodes.

    Exact for polynomials of degree <= n - 1 (degree n for even n - 1).
    """
    big_n = n - 1
    if big_n == 0:
        return np.array([2.0])
    theta = np.pi * np.arange(n) / big_n
    w = np.zeros(n)
    v = np.ones(big_n - 1)
    if big_n % 2 == 0:
        w[0] = w[big_n] = 1.0 / (big_n**2 - 1)
        for k in range(1, big_n // 2):
            v -= 2.0 * np.cos(2.0 * k * theta[1:big_n]) / (4.0 * k * k - 1.0)
        v -= np.cos(big_n * theta[1:big_n]) / (big_n**2 - 1.0)
    else:
        w[0] = w[big_n] = 1.0 / big_n**2
        for k in range(1, (big_n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2.0 * k * theta[1:big_n]) / (4.0 * k * k - 1.0)
    w[1:big_n] = 2.0 * v / big_n
    return w


def fourier_diff_matrix(n: int) -> np.ndarray:
    """Dense spectral differentiation matrix for n equispaced periodic nodes.

    n must be even; the matrix is the standard antisymmetric cotangent form.
    """
    if n % 2 != 0:
        raise ValueError("Fourier differentiation matrix requires even n")
    d = np.zeros((n, n))
    if n == 2:
        return d
    idx = np.arange(1, n)
    col = 0.5 * (-1.0) ** idx / np.tan(idx * np.pi / n)
    for i in range(n):
        d[i, (i - idx) % n] = col
    return d


@dataclass(frozen=True)
class PolarGrid:
    """Immutable collocation grid on the annulus r_inner < r < r_outer.

    All differentiation and quadrature operators are precomputed at
    construction; instances are safe to share across threads and every
    operation on them is pure.  Use :func:`build_grid` to construct one
    with the precondition checks applied.

    Attributes of interest
    ----------------------
    r, theta : 1d node arrays (r decreasing from r_outer to r_inner).
    rr, tt : broadcast (n_r, n_theta) node meshes.
    d_r, d_rr : radial differentiation matrices d/dr, d2/dr2.
    d_theta_matrix : dense angular differentiation matrix.
    w_r_line : radial Clenshaw-Curtis weights on [r_inner, r_outer]
        (no Jacobian), for line integrals in r.
    w_area : radial weights including the polar Jacobian r; together
        with the uniform angular weight 2*pi/n_theta they integrate
        over the annulus.
    area, area_outer_disk, area_inner_disk : measures of Omega,
        Omega_1 (disk bounded by Gamma_1) and Omega_2 (hole).
    """

    n_r: int
    n_theta: int
    r_inner: float
    r_outer: float

    r: np.ndarray = field(init=False, repr=False)
    theta: np.ndarray = field(init=False, repr=False)
    rr: np.ndarray = field(init=False, repr=False)
    tt: np.ndarray = field(init=False, repr=False)
    d_r: np.ndarray = field(init=False, repr=False)
    d_rr: np.ndarray = field(init=False, repr=False)
    d_theta_matrix: np.ndarray = field(init=False, repr=False)
    w_r_line: np.ndarray = field(init=False, repr=False)
    w_area: np.ndarray = field(init=False, repr=False)
    w_theta: float = field(init=False)
    area: float = field(init=False)
    area_outer_disk: float = field(init=False)
    area_inner_disk: float = field(init=False)

    def __post_init__(self) -> None:
        half_width = 0.5 * (self.r_outer - self.r_inner)
        x, d = chebyshev_diff_matrix(self.n_r)
        r = self.r_inner + half_width * (x + 1.0)
        d_r = d / half_width
        w_line = clenshaw_curtis_weights(self.n_r) * half_width
        theta = 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta

        set_ = object.__setattr__
        set_(self, "r", r)
        set_(self, "theta", theta)
        set_(self, "rr", np.broadcast_to(r[:, None], (self.n_r, self.n_theta)).copy())
        set_(self, "tt", np.broadcast_to(theta[None, :], (self.n_r, self.n_theta)).copy())
        set_(self, "d_r", d_r)
        set_(self, "d_rr", d_r @ d_r)
        set_(self, "d_theta_matrix", fourier_diff_matrix(self.n_theta))
        set_(self, "w_r_line", w_line)
        set_(self, "w_area", w_line * r)
        set_(self, "w_theta", 2.0 * np.pi / self.n_theta)
        set_(self, "area", np.pi * (self.r_outer**2 - self.r_inner**2))
        set_(self, "area_outer_disk", np.pi * self.r_outer**2)
        set_(self, "area_inner_disk", np.pi * self.r_inner**2)

        # d/dr with the inner-boundary row pinned, prefactored; this is the
        # radial antiderivative operator used for stream functions and
        # pressure profiles.
        anti = d_r.copy()
        anti[-1, :] = 0.0
        anti[-1, -1] = 1.0
        set_(self, "_antiderivative_lu", lu_factor(anti))

        for name in ("r", "theta", "rr", "tt", "d_r", "d_rr",
                     "d_theta_matrix", "w_r_line", "w_area"):
            getattr(self, name).setflags(write=False)

    # -- angular spectral helpers -------------------------------------------------

    @property
    def n_modes(self) -> int:
        """Number of rfft angular modes, n_theta//2 + 1."""
        return self.n_theta // 2 + 1

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(self.n_modes)

    def to_modes(self, values: np.ndarray) -> np.ndarray:
        """rfft along the angular axis."""
        return np.fft.rfft(values, axis=-1)

    def from_modes(self, coef: np.ndarray) -> np.ndarray:
        return np.fft.irfft(coef, n=self.n_theta, axis=-1)

    def diff_theta(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        """Spectral angular derivative of nodal data (last axis is theta).

        For odd orders the Nyquist coefficient is zeroed, the usual
        convention that keeps the result real and antisymmetric.
        """
        coef = self.to_modes(values)
        k = self.wavenumbers
        factor = (1j * k) ** order
        if order % 2 == 1:
            factor = factor.copy()
            factor[-1] = 0.0
        return self.from_modes(coef * factor)

    def diff_r(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        """Radial derivative of nodal data (first axis is r)."""
        op = self.d_r if order == 1 else self.d_rr
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        return op @ values

    def radial_antiderivative(self, values: np.ndarray) -> np.ndarray:
        """Antiderivative in r vanishing at the inner boundary.

        Solves d_r(F) = values with F(r_inner) = 0; spectrally exact for
        integrands resolved by the radial basis.  Works on 1d radial
        profiles or full (n_r, n_theta) arrays.
        """
        rhs = np.array(values, dtype=float, copy=True)
        if rhs.ndim == 1:
            rhs[-1] = 0.0
        else:
            rhs[-1, :] = 0.0
        return lu_solve(self._antiderivative_lu, rhs)

    def angular_mean(self, values: np.ndarray) -> np.ndarray:
        return values.mean(axis=-1)

    def same_as(self, other: "PolarGrid") -> bool:
        return (
            self.n_r == other.n_r
            and self.n_theta == other.n_theta
            and self.r_inner == other.r_inner
            and self.r_outer == other.r_outer
        )


def build_grid(n_r: int, n_theta: int, r_inner: float, r_outer: float) -> PolarGrid:
    """Construct a :class:`PolarGrid`, validating the preconditions.

    Raises
    ------
    ValueError
        If n_theta is odd, n_r < 8, r_inner < 1 or r_inner >= r_outer.
    """
    if n_theta % 2 != 0 or n_theta < 2:
        raise ValueError(f"n_theta must be a positive even integer, got {n_theta}")
    if n_r < 8:
        raise ValueError(f"n_r must be at least 8, got {n_r}")
    if r_inner < 1.0:
        raise ValueError(f"r_inner must be >= 1 (unit disk inside the hole), got {r_inner}")
    if r_inner >= r_outer:
        raise ValueError(f"need r_inner < r_outer, got {r_inner} >= {r_outer}")
    return PolarGrid(n_r=int(n_r), n_theta=int(n_theta),
                     r_inner=float(r_inner), r_outer=float(r_outer))


def integrate(grid: PolarGrid, f) -> float:
    """Integral of a scalar field over the annulus, spectrally accurate.

    ``f`` may be a ScalarField living on ``grid`` or a bare (n_r, n_theta)
    array.  Exact for constants by construction of the weights.
    """
    values = getattr(f, "values", f)
    owner = getattr(f, "grid", None)
    if owner is not None and not grid.same_as(owner):
        raise ValueError("field lives on a different grid")
    values = np.asarray(values)
    if values.shape != (grid.n_r, grid.n_theta):
        raise ValueError(
            f"field shape {values.shape} does not match grid "
            f"({grid.n_r}, {grid.n_theta})"
        )
    return float((grid.w_area @ values).sum() * grid.w_theta)
