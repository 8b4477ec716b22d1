"""Discrete calculus on uniform 4-D grids and radial sample arrays.

Grids carry scalar samples over a coordinate box [-L, L]^4; derivatives are
second-order central stencils (second-order one-sided at the box faces),
ball integrals use a center-in-ball midpoint rule on grids and Simpson
quadrature radially, and cutoff functions provide the quartic-hat test
functions needed by the integral estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

__all__ = [
    "SNAPSHOT_MAGIC",
    "BallGrid4",
    "Cutoff",
    "RadialProfile",
    "ScalarField4",
    "ball_integral",
    "cutoff",
    "fd_divergence",
    "fd_gradient",
    "fd_hessian",
    "field_from_function",
    "load_field",
    "radial_ball_integral",
    "save_field",
]

SNAPSHOT_MAGIC = "S2LAB1"

# Surface area of the unit 3-sphere: integrals of radial functions over
# 4-balls are 2*pi^2 * int f(r) r^3 dr.
S3_AREA = 2.0 * np.pi**2


@dataclass(frozen=True)
class BallGrid4:
    """Uniform grid over [-half_width, half_width]^4.

    points_per_axis must be odd (the origin is a grid point) and at least 9
    so that second-order stencils have room to breathe.
    """

    half_width: float
    points_per_axis: int

    def __post_init__(self):
        if self.points_per_axis < 9 or self.points_per_axis % 2 == 0:
            raise ValueError(
                f"points_per_axis must be odd and >= 9, got {self.points_per_axis}"
            )
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.points_per_axis - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.points_per_axis)

    def coords(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays x0..x3."""
        ax = self.axis
        n = self.points_per_axis
        shapes = [
            (n, 1, 1, 1),
            (1, n, 1, 1),
            (1, 1, n, 1),
            (1, 1, 1, n),
        ]
        return [ax.reshape(s) for s in shapes]

    def radius_squared(self) -> np.ndarray:
        x = self.coords()
        return x[0] ** 2 + x[1] ** 2 + x[2] ** 2 + x[3] ** 2


@dataclass(frozen=True)
class ScalarField4:
    """Scalar samples on a BallGrid4 (shape n^4, finite values)."""

    grid: BallGrid4
    samples: np.ndarray

    def __post_init__(self):
        n = self.grid.points_per_axis
        if self.samples.shape != (n, n, n, n):
            raise ValueError(
                f"samples shape {self.samples.shape} does not match grid {n}^4"
            )
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("field samples must be finite")


def field_from_function(grid: BallGrid4, fn) -> ScalarField4:
    """Sample fn(x0, x1, x2, x3) on the grid (fn must broadcast)."""
    x = grid.coords()
    vals = np.asarray(fn(*x), dtype=float)
    return ScalarField4(grid, np.broadcast_to(vals, (grid.points_per_axis,) * 4).copy())


@dataclass(frozen=True)
class RadialProfile:
    """Radially symmetric solution record on [0, r_max].

    Stores w, w', w'' at strictly increasing radii with r[0] = 0 and
    w'(0) = 0 (smoothness at the origin).
    """

    r: np.ndarray
    w: np.ndarray
    wp: np.ndarray
    wpp: np.ndarray

    def __post_init__(self):
        if not (self.r.shape == self.w.shape == self.wp.shape == self.wpp.shape):
            raise ValueError("profile arrays must share a shape")
        if self.r[0] != 0.0:
            raise ValueError("profile must start at r = 0")
        if self.wp[0] != 0.0:
            raise ValueError("w'(0) must vanish for a smooth radial profile")
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("radii must be strictly increasing")

    @property
    def r_max(self) -> float:
        return float(self.r[-1])


def _check_grid_margin(grid: BallGrid4, cells: int = 1):
    if grid.points_per_axis < 2 * cells + 3:
        raise ValueError("grid too small for the requested stencil margin")


def fd_gradient(f: ScalarField4) -> np.ndarray:
    """Gradient of a scalar field, shape (n,n,n,n,4).

    Second-order central differences inside, second-order one-sided at the
    box faces; exact for quadratics up to round-off.
    """
    _check_grid_margin(f.grid)
    h = f.grid.h
    comps = [np.gradient(f.samples, h, axis=a, edge_order=2) for a in range(4)]
    return np.stack(comps, axis=-1)


def fd_hessian(f: ScalarField4) -> np.ndarray:
    """Hessian of a scalar field, shape (n,n,n,n,4,4), exactly symmetric.

    Mixed partials are the centered cross-stencil (gradient of gradient);
    the result is symmetrized so downstream eigen-solves see an exactly
    symmetric matrix.
    """
    _check_grid_margin(f.grid)
    h = f.grid.h
    grads = [np.gradient(f.samples, h, axis=a, edge_order=2) for a in range(4)]
    out = np.empty(f.samples.shape + (4, 4))
    for a in range(4):
        for b in range(a, 4):
            m = np.gradient(grads[a], h, axis=b, edge_order=2)
            out[..., a, b] = m
            out[..., b, a] = m
    # cross-stencils of the two orders differ only by round-off; average out
    for a in range(4):
        for b in range(a + 1, 4):
            m = 0.5 * (out[..., a, b] + out[..., b, a])
            out[..., a, b] = m
            out[..., b, a] = m
    return out


def fd_divergence(x_field: np.ndarray, grid: BallGrid4) -> np.ndarray:
    """Divergence of a vector field sampled as shape (n,n,n,n,4)."""
    n = grid.points_per_axis
    if x_field.shape != (n, n, n, n, 4):
        raise ValueError(f"vector field shape {x_field.shape} does not match grid")
    _check_grid_margin(grid)
    h = grid.h
    out = np.zeros(x_field.shape[:4])
    for a in range(4):
        out += np.gradient(x_field[..., a], h, axis=a, edge_order=2)
    return out


def radial_ball_integral(r: np.ndarray, values: np.ndarray, radius: float) -> float:
    """Simpson rule for 2 pi^2 * int_0^radius f(r) r^3 dr on sampled radii."""
    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    if radius < 0 or radius > r[-1] + 1e-12:
        raise ValueError(f"radius {radius} outside sampled range [0, {r[-1]}]")
    mask = r <= radius
    rs = r[mask]
    vs = values[mask]
    if rs[-1] < radius:
        # close the interval with a linearly interpolated endpoint sample
        vend = np.interp(radius, r, values)
        rs = np.append(rs, radius)
        vs = np.append(vs, vend)
    if len(rs) < 3:
        raise ValueError("too few radial samples inside the requested ball")
    return float(S3_AREA * simpson(vs * rs**3, x=rs))


def ball_integral(f, radius: float, r: np.ndarray | None = None) -> float:
    """Integral of f over the ball B_radius with the flat measure.

    Accepts a ScalarField4 (midpoint rule: a cell contributes iff its center
    lies in the ball, weight h^4), a RadialProfile (integrates its w samples),
    or a plain array of radial samples paired with the r keyword.
    """
    if isinstance(f, ScalarField4):
        if radius > f.grid.half_width + 1e-12:
            raise ValueError(
                f"radius {radius} exceeds grid half_width {f.grid.half_width}"
            )
        inside = f.grid.radius_squared() <= radius**2
        return float(np.sum(f.samples[inside]) * f.grid.h**4)
    if isinstance(f, RadialProfile):
        return radial_ball_integral(f.r, f.w, radius)
    if r is not None:
        return radial_ball_integral(r, f, radius)
    raise TypeError("f must be ScalarField4, RadialProfile, or array with r=")


@dataclass(frozen=True)
class Cutoff:
    """Quartic-hat cutoff: eta = zeta^4 with zeta the piecewise-linear hat.

    zeta = 1 on B_{r_inner}, (r_outer - r)/(r_outer - r_inner) in between,
    0 outside, so eta is C^1, equals 1 on the inner ball, vanishes outside
    the outer one, and a.e. where the gradient is nonzero satisfies
    eta |hess eta| <= (3/4) |grad eta|^2 (spectral norm; the 3/4 constant
    requires r_outer <= 4 r_inner, which every shell used here obeys).
    """

    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not 0 < self.r_inner < self.r_outer:
            raise ValueError("need 0 < r_inner < r_outer")

    def _zeta(self, r):
        r = np.asarray(r, dtype=float)
        s = (self.r_outer - r) / (self.r_outer - self.r_inner)
        return np.clip(s, 0.0, 1.0) * (r > self.r_inner) + (r <= self.r_inner)

    def eta(self, r):
        """eta(r) = zeta(r)^4."""
        return self._zeta(r) ** 4

    def deta(self, r):
        """Radial derivative eta'(r); zero off the transition annulus."""
        r = np.asarray(r, dtype=float)
        z = self._zeta(r)
        slope = -1.0 / (self.r_outer - self.r_inner)
        inside = (r > self.r_inner) & (r < self.r_outer)
        return np.where(inside, 4.0 * z**3 * slope, 0.0)

    def grad_norm(self, r):
        """|grad eta| as a function of radius."""
        return np.abs(self.deta(r))

    def hess_norm(self, r):
        """Spectral norm of the Hessian of eta at radius r (a.e.).

        Eigenvalues of the Hessian of a radial function are eta'' (radial
        direction) and eta'/r (three tangential directions).
        """
        r = np.asarray(r, dtype=float)
        z = self._zeta(r)
        slope = 1.0 / (self.r_outer - self.r_inner)
        inside = (r > self.r_inner) & (r < self.r_outer)
        radial = 12.0 * z**2 * slope**2
        with np.errstate(divide="ignore", invalid="ignore"):
            tangential = np.where(r > 0, 4.0 * z**3 * slope / r, 0.0)
        return np.where(inside, np.maximum(radial, np.abs(tangential)), 0.0)

    def eta_field(self, grid: BallGrid4) -> ScalarField4:
        r = np.sqrt(grid.radius_squared())
        return ScalarField4(grid, self.eta(r))

    def grad_field(self, grid: BallGrid4) -> np.ndarray:
        """Analytic gradient of eta sampled on a grid, shape (...,4)."""
        r2 = grid.radius_squared()
        r = np.sqrt(r2)
        d = self.deta(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(r > 0, d / r, 0.0)
        x = grid.coords()
        return np.stack([scale * x[a] for a in range(4)], axis=-1)


def cutoff(r_inner: float, r_outer: float) -> Cutoff:
    """Build the standard quartic-hat cutoff for the annulus [r_inner, r_outer]."""
    return Cutoff(r_inner, r_outer)


def save_field(f: ScalarField4, path) -> None:
    """Write a ScalarField4 snapshot (text, versioned by the magic line).

    Layout: magic line, then "axes,points_per_axis,half_width", then one
    sample per line in row-major order.
    """
    with open(path, "w") as fh:
        fh.write(SNAPSHOT_MAGIC + "\n")
        fh.write(f"4,{f.grid.points_per_axis},{f.grid.half_width!r}\n")
        for v in f.samples.ravel(order="C"):
            fh.write(f"{v:.17g}\n")


def load_field(path) -> ScalarField4:
    """Read a snapshot written by save_field."""
    with open(path) as fh:
        magic = fh.readline().strip()
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"bad snapshot magic {magic!r}")
        axes, n, half_width = fh.readline().strip().split(",")
        if int(axes) != 4:
            raise ValueError(f"unsupported axis count {axes}")
        grid = BallGrid4(float(half_width), int(n))
        data = np.loadtxt(fh)
    expected = grid.points_per_axis**4
    if data.size != expected:
        raise ValueError(f"snapshot holds {data.size} samples, expected {expected}")
    return ScalarField4(grid, data.reshape((grid.points_per_axis,) * 4))
