"""Admissible radially symmetric solutions by ODE integration.

The radial reduction of the pair-curvature equation reads

    3 a_t (a_r + a_t) = f(r),   a_r = -w'' + (w')^2/2,
                                a_t = -(w'/r + (w')^2/2),

which rearranges to w'' = (w')^2/2 + a_t - f/(3 a_t).  Admissibility
(interior of the order-2 cone) forces a_t > 0, which selects the ODE branch:
at the origin a_t(0) = -w''(0) = sqrt(f(0)/6) > 0.  Integration is classical
fixed-step RK4 started at r = 1e-6 from the second-order Taylor seed, with
an a-posteriori step-halving consistency check; the trajectory is truncated
(honestly, in admissible_up_to) as soon as interior cone status is lost.

In eq1 mode the right side is K(r) e^{4 w(r)}, updated along the trajectory.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .conformal import radial_schouten_eigs
from .fields import RadialProfile

__all__ = [
    "AdmissibilityViolation",
    "NonConvergence",
    "SolveResult",
    "SolveSpec",
    "profile_to_csv",
    "residual_norm",
    "solve_radial",
]

SEED_RADIUS = 1e-6
MAX_HALVINGS = 10


class AdmissibilityViolation(RuntimeError):
    """Interior cone status unavailable; carries the offending radius."""

    def __init__(self, r: float, message: str):
        super().__init__(f"admissibility lost at r={r:.6g}: {message}")
        self.r = r


class NonConvergence(RuntimeError):
    """Step-halving never brought consecutive solutions within tolerance."""


def _as_rhs(rhs):
    if callable(rhs):
        return rhs
    value = float(rhs)
    return lambda r: value


@dataclass(frozen=True)
class SolveSpec:
    """Solve request.

    mode "eq2" prescribes the background curvature f(r) directly; mode "eq1"
    prescribes the intrinsic curvature K(r), giving f = K e^{4w}.  rhs may be
    a nonnegative float or a callable of r.
    """

    mode: str
    rhs: object
    w0: float
    r_max: float
    step: float = 1e-3
    tol: float = 1e-8

    def __post_init__(self):
        if self.mode not in ("eq1", "eq2"):
            raise ValueError("mode must be 'eq1' or 'eq2'")
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")


@dataclass(frozen=True)
class SolveResult:
    profile: RadialProfile
    admissible_up_to: float
    converged: bool

    @property
    def truncated(self) -> bool:
        return self.admissible_up_to < self.profile.r_max or not self.converged


def _f_value(spec: SolveSpec, rhs, r: float, w: float) -> float:
    base = rhs(r)
    if base < 0:
        raise ValueError(f"rhs must be nonnegative, got {base} at r={r:.6g}")
    if spec.mode == "eq1":
        return base * float(np.exp(4.0 * w))
    return float(base)


def _tangential(r: float, wp: float) -> float:
    return -(wp / r + 0.5 * wp * wp)


def _wpp(spec: SolveSpec, rhs, r: float, w: float, wp: float, tol: float) -> float:
    a_t = _tangential(r, wp)
    if a_t <= tol:
        raise AdmissibilityViolation(r, f"a_t={a_t:.3e} <= tol")
    f = _f_value(spec, rhs, r, w)
    return 0.5 * wp * wp + a_t - f / (3.0 * a_t)


def _integrate(spec: SolveSpec, rhs, h: float):
    """Fixed-step RK4 run; returns (r, w, wp, wpp, admissible_up_to).

    The returned arrays start at r=0 (Taylor seed values) and stop either at
    r_max or at the last step that kept interior cone status.
    """
    tol = spec.tol
    f0 = _f_value(spec, rhs, 0.0, spec.w0)
    a_t0 = np.sqrt(f0 / 6.0)
    if a_t0 <= tol:
        raise AdmissibilityViolation(0.0, f"seed a_t={a_t0:.3e} <= tol")
    wpp0 = -a_t0

    eps = SEED_RADIUS
    n_steps = int(np.ceil((spec.r_max - eps) / h))
    rs = [0.0]
    ws = [spec.w0]
    wps = [0.0]
    wpps = [wpp0]

    r = eps
    w = spec.w0 + 0.5 * wpp0 * eps * eps
    wp = wpp0 * eps
    admissible_up_to = 0.0

    def deriv(rr, yy):
        return np.array([yy[1], _wpp(spec, rhs, rr, yy[0], yy[1], tol)])

    y = np.array([w, wp])
    for i in range(n_steps):
        step = min(h, spec.r_max - r)
        if step <= 0:
            break
        try:
            k1 = deriv(r, y)
            k2 = deriv(r + 0.5 * step, y + 0.5 * step * k1)
            k3 = deriv(r + 0.5 * step, y + 0.5 * step * k2)
            k4 = deriv(r + step, y + step * k3)
        except AdmissibilityViolation:
            break
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        r = r + step

        a_t = _tangential(r, y[1])
        if a_t <= tol:
            break
        f = _f_value(spec, rhs, r, y[0])
        a_rad = f / (3.0 * a_t) - a_t
        sigma1 = a_rad + 3.0 * a_t
        if sigma1 <= tol or f <= tol:
            break
        rs.append(r)
        ws.append(y[0])
        wps.append(y[1])
        wpps.append(0.5 * y[1] ** 2 + a_t - f / (3.0 * a_t))
        admissible_up_to = r

    return (
        np.array(rs),
        np.array(ws),
        np.array(wps),
        np.array(wpps),
        admissible_up_to,
    )


def solve_radial(spec: SolveSpec) -> SolveResult:
    """Integrate the radial equation, enforcing interior cone status.

    Runs at the requested step, then once more at half the step as an
    a-posteriori accuracy check; the run at spec.step is returned.  If the
    two runs disagree by more than tol in w, the step is halved and the
    check repeated (up to 10 halvings) before giving up with NonConvergence.
    Raises AdmissibilityViolation only when no admissible start exists; loss
    of admissibility along the trajectory truncates the result instead.
    """
    rhs = _as_rhs(spec.rhs)
    h = spec.step
    coarse = _integrate(spec, rhs, h)
    err = np.inf
    for _ in range(MAX_HALVINGS):
        fine = _integrate(spec, rhs, h / 2.0)
        # coarse node j sits on fine node 2j; compare on the overlap only
        # (admissibility truncation may stop the two runs at slightly
        # different radii)
        r_common = min(coarse[0][-1], fine[0][-1])
        mask = coarse[0] <= r_common + 1e-12
        fine_w = np.interp(coarse[0][mask], fine[0], fine[1])
        err = float(np.max(np.abs(coarse[1][mask] - fine_w)))
        if err <= max(spec.tol, 1e-14):
            profile = RadialProfile(r=coarse[0], w=coarse[1], wp=coarse[2], wpp=coarse[3])
            return SolveResult(
                profile=profile,
                admissible_up_to=coarse[4],
                converged=True,
            )
        h = h / 2.0
        coarse = fine
    raise NonConvergence(
        f"step-halving exhausted after {MAX_HALVINGS} refinements (last err={err:.3e})"
    )


def residual_norm(p: RadialProfile, rhs, mode: str) -> float:
    """Max pointwise equation residual of a profile against a right side.

    eq2: max |3 a_t (a_r + a_t) - f|;  eq1: max |3 a_t (a_r + a_t) e^{-4w} - K|.
    """
    if mode not in ("eq1", "eq2"):
        raise ValueError("mode must be 'eq1' or 'eq2'")
    rhs = _as_rhs(rhs)
    tracks = radial_schouten_eigs(p)
    sigma2 = tracks.sigma2()
    target = np.array([rhs(r) for r in p.r])
    if mode == "eq1":
        return float(np.max(np.abs(sigma2 * np.exp(-4.0 * p.w) - target)))
    return float(np.max(np.abs(sigma2 - target)))


def profile_to_csv(p: RadialProfile, path) -> None:
    """Write r, w, w', w'', a_r, a_t, e^w columns."""
    tracks = radial_schouten_eigs(p)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "w", "w_prime", "w_second", "a_r", "a_t", "e_w"])
        for i in range(len(p.r)):
            writer.writerow(
                [
                    f"{p.r[i]:.17g}",
                    f"{p.w[i]:.17g}",
                    f"{p.wp[i]:.17g}",
                    f"{p.wpp[i]:.17g}",
                    f"{tracks.a_r[i]:.17g}",
                    f"{tracks.a_t[i]:.17g}",
                    f"{np.exp(p.w[i]):.17g}",
                ]
            )
