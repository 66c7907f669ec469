"""Grids, sampled functions, finite differences, quadrature and a reference
finite-difference eigensolver."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceFailure, InvalidArgument


@dataclass(frozen=True)
class Grid:
    """Uniform grid with n_points nodes including both ends."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise InvalidArgument("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise InvalidArgument("grid needs x_min < x_max")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise InvalidArgument("grid needs an integer n_points >= 3")

    @property
    def h(self):
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self):
        return np.linspace(self.x_min, self.x_max, int(self.n_points))

    def __len__(self):
        return int(self.n_points)


def make_grid(x_min, x_max, n_points):
    return Grid(float(x_min), float(x_max), int(n_points))


def grid_with_spacing(x_min, x_max, h):
    """Grid whose spacing is at most h."""
    n = int(np.ceil((x_max - x_min) / h - 1e-9)) + 1
    return make_grid(x_min, x_max, max(n, 5))


@dataclass(frozen=True)
class SampledFunction:
    grid: Grid
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape != (len(self.grid),):
            raise InvalidArgument(
                f"{vals.shape[0] if vals.ndim else 0} samples for a grid of {len(self.grid)} points")
        if not np.all(np.isfinite(vals)):
            raise InvalidArgument("sampled values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def x(self):
        return self.grid.points


def sample(func, grid, **meta):
    return SampledFunction(grid, np.asarray(func(grid.points)), dict(meta))


# ----------------------------------------------------------- derivatives
_D1_EDGE = np.array([[-25.0, 48.0, -36.0, 16.0, -3.0],
                     [-3.0, -10.0, 18.0, -6.0, 1.0]])
_D2_EDGE = np.array([[35.0, -104.0, 114.0, -56.0, 11.0],
                     [11.0, -20.0, 6.0, 4.0, -1.0]])


def _diff_array(y, h, order):
    y = np.asarray(y)
    out = np.empty_like(y)
    if order == 1:
        out[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
        edge, sign = _D1_EDGE, -1.0
        scale = 12.0 * h
    else:
        out[2:-2] = (-y[:-4] + 16.0 * y[1:-3] - 30.0 * y[2:-2] + 16.0 * y[3:-1] - y[4:]) / (12.0 * h * h)
        edge, sign = _D2_EDGE, 1.0
        scale = 12.0 * h * h
    out[0] = edge[0] @ y[:5] / scale
    out[1] = edge[1] @ y[:5] / scale
    out[-1] = sign * (edge[0] @ y[::-1][:5]) / scale
    out[-2] = sign * (edge[1] @ y[::-1][:5]) / scale
    return out


def differentiate(f, order=1):
    """First or second derivative with 5-point stencils (one-sided at ends)."""
    if order not in (1, 2):
        raise InvalidArgument("differentiate supports order 1 or 2")
    if len(f.grid) < 5:
        raise InvalidArgument("differentiate needs at least 5 grid points")
    return SampledFunction(f.grid, _diff_array(f.values, f.grid.h, order))


def wronskian(f, g, df=None, dg=None):
    """W(f, g) = f g' - f' g; derivatives from df/dg when given."""
    if f.grid != g.grid:
        raise InvalidArgument("wronskian needs both functions on the same grid")
    fp = df.values if df is not None else differentiate(f).values
    gp = dg.values if dg is not None else differentiate(g).values
    return SampledFunction(f.grid, f.values * gp - fp * g.values)


# ------------------------------------------------------------ quadrature
def _simpson_samples(y, h):
    n = len(y) - 1
    if n < 2:
        return 0.5 * h * (y[0] + y[-1]) * n
    if n % 2 == 0:
        return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())
    # odd interval count: Simpson on the first n-3 intervals, 3/8 rule on the rest
    head = _simpson_samples(y[:-3], h) if n > 3 else 0.0
    tail = 3.0 * h / 8.0 * (y[-4] + 3.0 * y[-3] + 3.0 * y[-2] + y[-1])
    return head + tail


def integrate(f, a=None, b=None, rel_tol=1e-10, max_halvings=24):
    """Integral of a SampledFunction (Simpson on its samples) or of a callable
    (composite Simpson, halving the step until successive estimates agree)."""
    if isinstance(f, SampledFunction):
        x = f.grid.points
        a = x[0] if a is None else a
        b = x[-1] if b is None else b
        sel = (x >= a - 1e-12 * abs(f.grid.h)) & (x <= b + 1e-12 * abs(f.grid.h))
        return float(_simpson_samples(f.values[sel], f.grid.h)) if np.isrealobj(f.values) \
            else complex(_simpson_samples(f.values[sel], f.grid.h))
    if a is None or b is None:
        raise InvalidArgument("integrating a callable needs finite bounds a, b")
    if not (np.isfinite(a) and np.isfinite(b)) or a >= b:
        raise InvalidArgument("integration bounds must be finite with a < b")
    n = 16
    x = np.linspace(a, b, n + 1)
    y = np.asarray(f(x))
    prev = _simpson_samples(y, (b - a) / n)
    for _ in range(max_halvings):
        n *= 2
        h = (b - a) / n
        mid = a + h * (2.0 * np.arange(n // 2) + 1.0)
        ynew = np.empty(n + 1, dtype=np.result_type(y, float))
        ynew[::2] = y
        ynew[1::2] = np.asarray(f(mid))
        y = ynew
        cur = _simpson_samples(y, h)
        scale = _simpson_samples(np.abs(y), h)
        if abs(cur - prev) <= max(rel_tol * scale, 1e-14):
            return cur + (cur - prev) / 15.0
        prev = cur
    raise ConvergenceFailure(f"Simpson halving did not reach rel_tol={rel_tol}")


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def gauss_legendre(func, a, b):
    """Vectorised 10-point Gauss-Legendre rule on each interval [a_i, b_i]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[..., None] + half[..., None] * _GL_NODES
    y = np.asarray(func(x.ravel())).reshape(x.shape)
    return half * (y @ _GL_WEIGHTS)


def cumulative_integral(func, grid):
    """F(x_i) = int_{x_0}^{x_i} func, Gauss-Legendre on every grid cell."""
    x = grid.points
    cells = gauss_legendre(func, x[:-1], x[1:])
    return np.concatenate([[0.0], np.cumsum(cells)])


# --------------------------------------------------- reference eigensolver
@dataclass(frozen=True)
class FdSpectrum:
    energies: np.ndarray
    states: np.ndarray          # (count, n_points), unit-normalised, zero at both ends
    grid: Grid


def fd_spectrum(potential, count, grid=None, with_states=False):
    """Lowest eigenvalues of -d^2/dx^2 + V with Dirichlet ends.

    Three-point Laplacian on the grid interior; the symmetric tridiagonal
    problem is handed to LAPACK (bisection + inverse iteration) through
    scipy.  ``potential`` is a SampledFunction or a callable with ``grid``.
    """
    if isinstance(potential, SampledFunction):
        grid = potential.grid
        v = potential.values
    else:
        if grid is None:
            raise InvalidArgument("a callable potential needs a grid")
        v = np.asarray(potential(grid.points), dtype=float)
    if not np.all(np.isfinite(v[1:-1])):
        raise InvalidArgument("potential must be finite on the grid interior")
    m = len(grid) - 2
    if count < 1 or count > m:
        raise InvalidArgument(f"count must be in 1..{m}")
    h = grid.h
    diag = 2.0 / h**2 + v[1:-1]
    off = np.full(m - 1, -1.0 / h**2)
    if with_states:
        w, vec = eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1))
        states = np.zeros((count, len(grid)))
        states[:, 1:-1] = vec.T / np.sqrt(h)
        for row in states:
            if row[np.argmax(np.abs(row))] < 0:
                row *= -1.0
    else:
        w = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, count - 1))
        states = np.zeros((0, len(grid)))
    return FdSpectrum(np.asarray(w), states, grid)
