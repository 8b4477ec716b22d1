"""Curvature calculus of conformally flat 4-metrics e^{2w} |dx|^2.

Builds the conformal curvature tensor (mixed-index, flat background) from a
scalar field, a radial profile, or the exact round-sphere bubble family;
evaluates the pair-curvature sigma_2 in background and intrinsic form; and
assembles the coefficient tensor of the divergence structure by two
independent formulas for cross-checking.

Conventions: with A0 the mixed-index curvature tensor of e^{2w}|dx|^2 in the
flat background,

    A0 = -hess(w) + grad(w) x grad(w) - (1/2)|grad w|^2 I,
    sigma_2(intrinsic) = e^{-4w} sigma_2(A0),
    M = hess(w) - (lap w) I - grad(w) x grad(w) = T_1(A0) + (1/2)|grad w|^2 I.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import BallGrid4, RadialProfile, ScalarField4, fd_gradient, fd_hessian
from .symcone import sigma_batch

__all__ = [
    "Bubble",
    "BubbleSpec",
    "GridSchouten",
    "MTensor",
    "RadialSchouten",
    "bubble",
    "bubble_profile",
    "m_tensor",
    "radial_schouten_eigs",
    "schouten_from_derivatives",
    "schouten_of",
    "sigma2_fields",
]


@dataclass(frozen=True)
class BubbleSpec:
    """Round-sphere conformal factor e^w = 2*lam / (1 + lam^2 |x - center|^2)."""

    lam: float
    center: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")


class Bubble:
    """Analytic evaluator for the bubble solution (the oracle of record).

    Closed forms: w = ln(2 lam) - ln(1 + lam^2 rho^2) with rho = |x - x0|;
    the curvature tensor is (1/2) e^{2w} I at every point, so the intrinsic
    pair curvature is identically 3/2 and the solution is admissible for
    every lam.
    """

    def __init__(self, spec: BubbleSpec):
        self.spec = spec
        self.lam = spec.lam
        self.center = np.asarray(spec.center, dtype=float)

    # -- radial forms (rho measured from the center) --

    def w_r(self, r):
        r = np.asarray(r, dtype=float)
        return np.log(2.0 * self.lam) - np.log1p((self.lam * r) ** 2)

    def dw_r(self, r):
        r = np.asarray(r, dtype=float)
        den = 1.0 + (self.lam * r) ** 2
        return -2.0 * self.lam**2 * r / den

    def d2w_r(self, r):
        r = np.asarray(r, dtype=float)
        den = 1.0 + (self.lam * r) ** 2
        return (2.0 * self.lam**4 * r**2 - 2.0 * self.lam**2) / den**2

    def ew_r(self, r):
        r = np.asarray(r, dtype=float)
        return 2.0 * self.lam / (1.0 + (self.lam * r) ** 2)

    def schouten_eig_r(self, r):
        """The single curvature eigenvalue (1/2) e^{2w}: all four coincide."""
        r = np.asarray(r, dtype=float)
        den = 1.0 + (self.lam * r) ** 2
        return 2.0 * self.lam**2 / den**2

    # -- pointwise forms on 4-D coordinates --

    def _rho2(self, x):
        return sum((x[a] - self.center[a]) ** 2 for a in range(4))

    def w(self, *x):
        return np.log(2.0 * self.lam) - np.log1p(self.lam**2 * self._rho2(x))

    def ew(self, *x):
        return 2.0 * self.lam / (1.0 + self.lam**2 * self._rho2(x))

    def grad(self, *x):
        den = 1.0 + self.lam**2 * self._rho2(x)
        return [-2.0 * self.lam**2 * (x[a] - self.center[a]) / den for a in range(4)]

    def hess(self, *x):
        den = 1.0 + self.lam**2 * self._rho2(x)
        out = []
        for a in range(4):
            row = []
            for b in range(4):
                v = 4.0 * self.lam**4 * (x[a] - self.center[a]) * (x[b] - self.center[b]) / den**2
                if a == b:
                    v = v - 2.0 * self.lam**2 / den
                row.append(v)
            out.append(row)
        return out

    # -- sampling helpers --

    def sample_field(self, grid: BallGrid4) -> ScalarField4:
        x = grid.coords()
        w = self.w(*x)
        return ScalarField4(grid, np.broadcast_to(w, (grid.points_per_axis,) * 4).copy())

    def sample_profile(self, r_max: float, n: int = 2001) -> RadialProfile:
        r = np.linspace(0.0, r_max, n)
        wp = self.dw_r(r)
        wp[0] = 0.0
        return RadialProfile(r=r, w=self.w_r(r), wp=wp, wpp=self.d2w_r(r))


def bubble(spec: BubbleSpec) -> Bubble:
    """Analytic evaluator for (w, grad w, hess w, e^w) of the bubble family."""
    return Bubble(spec)


def bubble_profile(lam: float, r_max: float, n: int = 2001) -> RadialProfile:
    return bubble(BubbleSpec(lam)).sample_profile(r_max, n)


@dataclass(frozen=True)
class GridSchouten:
    """Mixed-index curvature tensor per grid point plus the w-derivatives."""

    grid: BallGrid4
    a: np.ndarray          # (n,n,n,n,4,4)
    w: np.ndarray          # (n,n,n,n)
    grad_w: np.ndarray     # (n,n,n,n,4)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.a)


@dataclass(frozen=True)
class RadialSchouten:
    """Radial/tangential curvature eigenvalue tracks of a radial profile."""

    r: np.ndarray
    a_r: np.ndarray
    a_t: np.ndarray

    def sigma1(self) -> np.ndarray:
        return self.a_r + 3.0 * self.a_t

    def sigma2(self) -> np.ndarray:
        return 3.0 * self.a_t * (self.a_r + self.a_t)


def schouten_from_derivatives(w, grad_w, hess_w) -> np.ndarray:
    """A0 = -hess + grad x grad - (1/2)|grad|^2 I from sampled derivatives.

    Shapes: grad_w (..., 4), hess_w (..., 4, 4); returns (..., 4, 4).
    """
    g2 = np.sum(grad_w**2, axis=-1)
    outer = grad_w[..., :, None] * grad_w[..., None, :]
    eye = np.eye(4).reshape((1,) * (g2.ndim) + (4, 4))
    return -hess_w + outer - 0.5 * g2[..., None, None] * eye


def radial_schouten_eigs(p: RadialProfile) -> RadialSchouten:
    """Eigenvalue tracks a_r = -w'' + (w')^2/2, a_t = -(w'/r + (w')^2/2).

    At the origin the tangential track takes its smoothness limit
    a_t(0) = -w''(0), which every C^2 radial function satisfies.
    """
    a_r = -p.wpp + 0.5 * p.wp**2
    with np.errstate(divide="ignore", invalid="ignore"):
        wp_over_r = np.where(p.r > 0, p.wp / np.where(p.r > 0, p.r, 1.0), 0.0)
    wp_over_r[0] = p.wpp[0]
    a_t = -(wp_over_r + 0.5 * p.wp**2)
    return RadialSchouten(r=p.r.copy(), a_r=a_r, a_t=a_t)


def _grid_inputs(w, grid):
    """Resolve (w_samples, grad, hess, grid) for field / bubble / spec input."""
    if isinstance(w, ScalarField4):
        return w.samples, fd_gradient(w), fd_hessian(w), w.grid
    if isinstance(w, BubbleSpec):
        w = bubble(w)
    if isinstance(w, Bubble):
        if grid is None:
            raise ValueError("a grid is required to sample an analytic bubble")
        x = grid.coords()
        n = grid.points_per_axis
        shape = (n, n, n, n)
        ws = np.broadcast_to(np.asarray(w.w(*x)), shape).copy()
        g = np.stack(
            [np.broadcast_to(c, shape) for c in w.grad(*x)], axis=-1
        ).astype(float)
        hess_rows = w.hess(*x)
        hs = np.empty(shape + (4, 4))
        for a in range(4):
            for b in range(4):
                hs[..., a, b] = np.broadcast_to(hess_rows[a][b], shape)
        return ws, g, hs, grid
    raise TypeError(f"unsupported input type {type(w).__name__}")


def schouten_of(w, grid: BallGrid4 | None = None):
    """Curvature tensor of e^{2w}|dx|^2.

    ScalarField4 inputs use finite differences, Bubble/BubbleSpec inputs use
    the closed-form derivatives (sampled on the supplied grid), and
    RadialProfile inputs use the stored w', w'' via the radial reduction.
    """
    if isinstance(w, RadialProfile):
        return radial_schouten_eigs(w)
    ws, g, hs, grid = _grid_inputs(w, grid)
    return GridSchouten(grid=grid, a=schouten_from_derivatives(ws, g, hs), w=ws, grad_w=g)


def sigma2_fields(w, grid: BallGrid4 | None = None):
    """Pointwise sigma_2 in background and intrinsic normalization.

    background = sigma_2 of the spectrum of A0; intrinsic = e^{-4w} * background.
    Grid-backed inputs return a pair of ScalarField4; radial profiles return
    a pair of sample arrays.
    """
    if isinstance(w, RadialProfile):
        tracks = radial_schouten_eigs(w)
        background = tracks.sigma2()
        return background, background * np.exp(-4.0 * w.w)
    s = schouten_of(w, grid)
    sig = sigma_batch(s.eigenvalues())[..., 2]
    return (
        ScalarField4(s.grid, sig),
        ScalarField4(s.grid, sig * np.exp(-4.0 * s.w)),
    )


@dataclass(frozen=True)
class MTensor:
    """Divergence-structure coefficient tensor, by two independent formulas.

    newton_form  = T_1(A0) + (1/2)|grad w|^2 I
    hessian_form = hess(w) - (lap w) I - grad(w) x grad(w)

    The two agree identically; their difference validates the conformal
    transformation algebra in one shot.
    """

    grid: BallGrid4
    newton_form: np.ndarray
    hessian_form: np.ndarray
    grad_w: np.ndarray
    w: np.ndarray = field(repr=False, default=None)

    def cross_check(self) -> float:
        """Max absolute entry-wise disagreement between the two formulas."""
        return float(np.max(np.abs(self.newton_form - self.hessian_form)))


def m_tensor(w, grid: BallGrid4 | None = None) -> MTensor:
    """Coefficient tensor M of the background divergence identity."""
    ws, g, hs, grid = _grid_inputs(w, grid)
    a0 = schouten_from_derivatives(ws, g, hs)
    g2 = np.sum(g**2, axis=-1)
    eye = np.eye(4).reshape((1, 1, 1, 1, 4, 4))
    trace_a = np.trace(a0, axis1=-2, axis2=-1)
    newton = trace_a[..., None, None] * eye - a0 + 0.5 * g2[..., None, None] * eye
    lap = np.trace(hs, axis1=-2, axis2=-1)
    outer = g[..., :, None] * g[..., None, :]
    hessian = hs - lap[..., None, None] * eye - outer
    return MTensor(grid=grid, newton_form=newton, hessian_form=hessian, grad_w=g, w=ws)
