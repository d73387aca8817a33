"""Phase-space and homodyne measurement statistics.

Provides the Wigner function (displaced-parity form), single-quadrature
marginal distributions, and two-mode joint quadrature densities, all on
uniform grids with trapezoid integration.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .fock import (
    MAX_DIM,
    FockState,
    TwoModeState,
    UnderTruncationError,
    hermite_functions,
    rotate,
)

NEGATIVE_CLIP = -1e-12


class GridTooNarrowError(ValueError):
    """The grid misses too much probability mass to represent a density."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-D grid, endpoints inclusive."""

    lo: float = -8.0
    hi: float = 8.0
    step: float = 0.01

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("grid bounds must satisfy lo < hi")
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        n = (self.hi - self.lo) / self.step
        if abs(n - round(n)) > 1e-9:
            raise ValueError("(hi - lo) must be an integer number of steps")

    @cached_property
    def points(self) -> np.ndarray:
        n = int(round((self.hi - self.lo) / self.step))
        pts = self.lo + self.step * np.arange(n + 1)
        pts.setflags(write=False)
        return pts

    @property
    def size(self) -> int:
        return self.points.size


def default_grid() -> Grid1D:
    return Grid1D(-8.0, 8.0, 0.01)


class Density:
    """A probability density sampled on a Grid1D, integrated by trapezoid.

    Tiny negative values from quadrature noise are clipped to zero;
    anything below the clip threshold is rejected.
    """

    __slots__ = ("grid", "values", "_cdf")

    def __init__(self, grid: Grid1D, values, require_normalized: bool = True):
        vals = np.asarray(values, dtype=float).copy()
        if vals.shape != (grid.size,):
            raise ValueError("value array does not match the grid")
        if vals.min() < NEGATIVE_CLIP:
            raise ValueError(f"density has negative values down to {vals.min():.3e}")
        np.clip(vals, 0.0, None, out=vals)
        vals.setflags(write=False)
        self.grid = grid
        self.values = vals
        cdf = np.zeros(grid.size)
        cdf[1:] = np.cumsum(
            (vals[1:] + vals[:-1]) * 0.5 * np.diff(grid.points)
        )
        cdf.setflags(write=False)
        self._cdf = cdf
        if require_normalized and abs(self.integral() - 1.0) > 1e-4:
            raise GridTooNarrowError(
                f"density integrates to {self.integral():.6f}; widen the grid"
            )

    def integral(self) -> float:
        return float(self._cdf[-1])

    def prob_below(self, x: float) -> float:
        """Mass on (-inf, x], with the grid cut interpolated linearly."""
        return float(np.interp(x, self.grid.points, self._cdf))

    def prob_above(self, x: float) -> float:
        return self.integral() - self.prob_below(x)

    def two_sided_tail(self, cut: float) -> float:
        """Mass outside the band (-cut, cut)."""
        return self.prob_below(-cut) + self.prob_above(cut)

    def mean(self) -> float:
        return float(
            np.trapezoid(self.grid.points * self.values, self.grid.points)
            / self.integral()
        )

    def variance(self) -> float:
        m = self.mean()
        return float(
            np.trapezoid((self.grid.points - m) ** 2 * self.values, self.grid.points)
            / self.integral()
        )

    def quantile(self, u) -> np.ndarray:
        """Map uniforms in [0, 1) through the tabulated inverse CDF."""
        target = np.asarray(u, dtype=float) * self.integral()
        return np.interp(target, self._cdf, self.grid.points)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Inverse-CDF draws using linear interpolation of the table."""
        return self.quantile(rng.random(count))


class Density2D:
    """A joint density on a pair of grids (first axis z, second axis x)."""

    __slots__ = ("grid_z", "grid_x", "values")

    def __init__(self, grid_z: Grid1D, grid_x: Grid1D, values,
                 require_normalized: bool = True):
        vals = np.asarray(values, dtype=float).copy()
        if vals.shape != (grid_z.size, grid_x.size):
            raise ValueError("value array does not match the grids")
        if vals.min() < NEGATIVE_CLIP:
            raise ValueError(f"density has negative values down to {vals.min():.3e}")
        np.clip(vals, 0.0, None, out=vals)
        vals.setflags(write=False)
        self.grid_z = grid_z
        self.grid_x = grid_x
        self.values = vals
        if require_normalized and abs(self.integral() - 1.0) > 1e-4:
            raise GridTooNarrowError(
                f"joint density integrates to {self.integral():.6f}; widen the grids"
            )

    def integral(self) -> float:
        inner = np.trapezoid(self.values, self.grid_x.points, axis=1)
        return float(np.trapezoid(inner, self.grid_z.points))

    def marginal_z(self) -> Density:
        vals = np.trapezoid(self.values, self.grid_x.points, axis=1)
        return Density(self.grid_z, vals, require_normalized=False)

    def marginal_x(self) -> Density:
        vals = np.trapezoid(self.values, self.grid_z.points, axis=0)
        return Density(self.grid_x, vals, require_normalized=False)


def marginal(state: FockState, axis: str, grid: Grid1D | None = None) -> Density:
    """Homodyne distribution of one quadrature.

    The z2 statistics are obtained by rotating the state with
    exp(-i*pi/2*n) and projecting on the z1 eigenbasis, which is the same
    measurement under the fixed convention.
    """
    if grid is None:
        grid = default_grid()
    if axis == "z2":
        state = rotate(state, -np.pi / 2)
    elif axis != "z1":
        raise ValueError("axis must be 'z1' or 'z2'")
    table = hermite_functions(grid.points, state.dim)
    amp = table @ state.amps
    dens = Density(grid, np.abs(amp) ** 2, require_normalized=False)
    if abs(dens.integral() - state.norm_sq()) > 1e-4:
        raise GridTooNarrowError(
            f"marginal mass on the grid is {dens.integral():.6f} "
            f"of {state.norm_sq():.6f}; widen the grid"
        )
    return dens


def _working_dim(state: FockState, gamma_max: float) -> int:
    probs = np.abs(state.amps) ** 2
    tail = np.cumsum(probs[::-1])[::-1]
    occupied = np.nonzero(tail > 1e-12)[0]
    top = int(occupied[-1]) if occupied.size else 0
    lam = (gamma_max + np.sqrt(top + 1.0) + 2.0) ** 2
    need = int(np.ceil(lam + 7.0 * np.sqrt(lam) + 20.0))
    need = max(need, state.dim)
    return min(MAX_DIM, int(np.ceil(need / 16.0)) * 16)


@lru_cache(maxsize=8)
def _quadrature_eigensystems(dim: int):
    """Eigendecompositions of the two displacement generators.

    Real displacements are generated by a^dag - a and imaginary ones by
    a^dag + a; diagonalizing both once per truncation turns every grid
    displacement into a unitary phase twist, which is what keeps the
    parity sums stable far from the origin.
    """
    from .fock import annihilation_matrix

    a = annihilation_matrix(dim)
    lam_re, q_re = np.linalg.eigh(1j * (a.conj().T - a))
    lam_im, q_im = np.linalg.eigh((a.conj().T + a).real)
    return lam_re, q_re, lam_im, q_im


def _parity_on_grid(state: FockState, re_pts: np.ndarray, im_pts: np.ndarray,
                    dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Signed parity sums of D(-beta)|psi> over a rectangular beta grid.

    Returns the parity array (re x im) and the captured-norm array whose
    deficiency from the state norm bounds each point's truncation error.
    """
    lam_re, q_re, lam_im, q_im = _quadrature_eigensystems(dim)
    psi = np.zeros(dim, dtype=complex)
    psi[: state.dim] = state.amps
    # D(-re) = exp(i * re * (i(a^dag - a))) up to the unphysical phase
    base = q_re.conj().T @ psi
    phases_re = np.exp(1j * np.outer(lam_re, re_pts))
    cols = q_re @ (phases_re * base[:, None])          # (dim, n_re)
    y = q_im.conj().T @ cols                           # (dim, n_re)
    signs = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
    parity = np.empty((re_pts.size, im_pts.size))
    captured = np.empty_like(parity)
    sq = np.empty_like(y, dtype=float)
    for j, b_im in enumerate(im_pts):
        u = q_im @ (np.exp(-1j * b_im * lam_im)[:, None] * y)
        np.multiply(u.real, u.real, out=sq)
        sq += u.imag * u.imag
        parity[:, j] = signs @ sq
        captured[:, j] = sq.sum(axis=0)
    return parity, captured


def _wigner_values(state: FockState, re_pts: np.ndarray,
                   im_pts: np.ndarray) -> np.ndarray:
    gmax = float(np.hypot(max(abs(re_pts[0]), abs(re_pts[-1])),
                          max(abs(im_pts[0]), abs(im_pts[-1]))))
    dim = _working_dim(state, gmax)
    norm = state.norm_sq()
    while True:
        parity, captured = _parity_on_grid(state, re_pts, im_pts, dim)
        deficiency = float(np.max(norm - captured))
        if deficiency < 1e-9:
            return (2.0 / np.pi) * parity
        if dim >= MAX_DIM:
            raise UnderTruncationError(
                "Wigner grid extends past the resolvable phase space", deficiency
            )
        dim = min(MAX_DIM, 2 * dim)


def wigner_grid(state: FockState, grid_re: Grid1D, grid_im: Grid1D) -> np.ndarray:
    """Wigner function on a rectangular grid, normalized to unit integral.

    Evaluated through the displaced-parity form
    W(beta) = (2/pi) sum_n (-1)^n |<n|D(-beta)|psi>|^2; the working
    truncation is enlarged until the displaced states at the grid
    corners keep all but 1e-9 of their mass.  Rows index Re(beta) = z1,
    columns Im(beta) = z2.
    """
    return _wigner_values(state, grid_re.points, grid_im.points)


def wigner(state: FockState, beta: complex) -> float:
    """Wigner function at one phase-space point."""
    beta = complex(beta)
    vals = _wigner_values(state, np.array([beta.real]), np.array([beta.imag]))
    return float(vals[0, 0])


def joint_quadrature_density(tm: TwoModeState, grid_z: Grid1D,
                             grid_x: Grid1D) -> Density2D:
    """Joint density of measuring z1 on each mode of a two-mode state."""
    table_z = hermite_functions(grid_z.points, tm.dim)
    table_x = hermite_functions(grid_x.points, tm.dim)
    amp = table_z @ tm.amps @ table_x.T
    dens = Density2D(grid_z, grid_x, np.abs(amp) ** 2, require_normalized=False)
    if abs(dens.integral() - tm.norm_sq()) > 1e-4:
        raise GridTooNarrowError(
            f"joint mass on the grid is {dens.integral():.6f}; widen the grids"
        )
    return dens
