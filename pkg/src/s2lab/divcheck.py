"""Convergence-ladder verification of the divergence structure.

Two identities are checked on shrinking grids:

  background:  2 sigma_2(A0) = -div( M . grad w )               (flat metric)
  intrinsic:   k sigma_k(g^-1 A) = (4-2k) sum_j ... - div_g X   (metric g)

where for k=2 in dimension 4 the non-divergence term vanishes identically
and for k=1 it equals |grad w|_g^2.  The intrinsic divergence of a vector
field is realized through the conformal volume identity
div_g X = e^{-4w} d_a (e^{4w} X^a), which avoids discretizing Christoffel
symbols.  Both sides are always computed through independent code paths.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .conformal import Bubble, BubbleSpec, bubble, m_tensor, schouten_of, sigma2_fields
from .fields import BallGrid4, ScalarField4, fd_divergence, fd_gradient, field_from_function
from .symcone import sigma_batch

__all__ = [
    "ConvergenceReport",
    "check_background_divergence",
    "check_intrinsic_divergence",
    "fit_order",
    "report_to_csv",
    "report_to_json",
]

DEFAULT_LADDER = (13, 17, 25)
# pass criteria: least-squares order and finest-rung consistency with the
# quadratic error model fitted to the coarser rungs
MIN_ORDER = 1.8
MODEL_SLACK = 10.0


@dataclass
class ConvergenceReport:
    """Discrepancy ladder with its observed convergence order."""

    name: str
    h_ladder: list[float]
    max_abs_discrepancy: list[float]
    observed_order: float
    pass_: bool
    context: dict = field(default_factory=dict)

    def rows(self):
        """(h, discrepancy, pairwise order) rows; first row has no order."""
        out = []
        for i, (h, d) in enumerate(zip(self.h_ladder, self.max_abs_discrepancy)):
            if i == 0:
                out.append((h, d, ""))
            else:
                h0, d0 = self.h_ladder[i - 1], self.max_abs_discrepancy[i - 1]
                order = np.log(d0 / d) / np.log(h0 / h) if d > 0 and d0 > 0 else np.inf
                out.append((h, d, order))
        return out


def fit_order(hs, errs) -> float:
    """Least-squares slope of log(err) against log(h)."""
    hs = np.asarray(hs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    if np.any(errs <= 0):
        return np.inf  # exact to round-off: better than any finite order
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


def _assess(name, hs, errs, context) -> ConvergenceReport:
    order = fit_order(hs, errs)
    if not np.isfinite(order):
        ok = True
    else:
        # quadratic model C h^2 fitted to the coarser rungs
        c = float(np.mean(np.asarray(errs[:-1]) / np.asarray(hs[:-1]) ** 2))
        predicted = c * hs[-1] ** 2
        ok = order >= MIN_ORDER and errs[-1] <= MODEL_SLACK * predicted
    return ConvergenceReport(
        name=name,
        h_ladder=[float(h) for h in hs],
        max_abs_discrepancy=[float(e) for e in errs],
        observed_order=order,
        pass_=ok,
        context=context,
    )


def _resolve_w(w, grid: BallGrid4) -> ScalarField4:
    if isinstance(w, ScalarField4):
        raise TypeError("ladder checks resample w per grid; pass a callable or bubble")
    if isinstance(w, BubbleSpec):
        w = bubble(w)
    if isinstance(w, Bubble):
        return w.sample_field(grid)
    if callable(w):
        return field_from_function(grid, w)
    raise TypeError(f"unsupported w of type {type(w).__name__}")


def _check_margin(grid: BallGrid4, r_check: float):
    margin = grid.half_width - 3.0 * grid.h
    if r_check >= margin:
        raise ValueError(
            f"R_check={r_check} must stay strictly inside half_width - 3h = {margin}"
        )


def check_background_divergence(
    w,
    ladder=DEFAULT_LADDER,
    r_check: float = 0.9,
    half_width: float = 2.0,
) -> ConvergenceReport:
    """Ladder check of 2 sigma_2(A0) = -div(M . grad w) over B_{r_check}.

    The left side goes through the spectral sigma_2 path, the right side
    through the coefficient tensor and the FD divergence; ladder entries are
    points-per-axis counts on the fixed box [-half_width, half_width]^4.
    """
    hs, errs = [], []
    for n in ladder:
        grid = BallGrid4(half_width, n)
        _check_margin(grid, r_check)
        wf = _resolve_w(w, grid)
        background, _ = sigma2_fields(wf)
        lhs = 2.0 * background.samples
        m = m_tensor(wf)
        flux = np.einsum("...ab,...b->...a", m.hessian_form, m.grad_w)
        rhs = -fd_divergence(flux, grid)
        inside = grid.radius_squared() <= r_check**2
        hs.append(grid.h)
        errs.append(float(np.max(np.abs((lhs - rhs)[inside]))))
    return _assess(
        "background_divergence",
        hs,
        errs,
        {"r_check": r_check, "half_width": half_width, "ladder": list(ladder)},
    )


def check_intrinsic_divergence(
    w,
    r_check: float = 0.9,
    k: int = 2,
    ladder=DEFAULT_LADDER,
    half_width: float = 2.0,
) -> ConvergenceReport:
    """Ladder check of the intrinsic divergence identity for k in {1, 2}.

    k=2: 2 sigma_2(g^-1 A) = -div_g X with
         X^a = [T_1(g^-1 A)^a_b + (1/2)|grad w|_g^2 delta^a_b] grad^b w.
    k=1: sigma_1(g^-1 A) = |grad w|_g^2 - div_g grad^. w.

    All norms and index raisings use g = e^{2w} g0; the divergence uses the
    conformal volume identity.
    """
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    hs, errs = [], []
    for n in ladder:
        grid = BallGrid4(half_width, n)
        _check_margin(grid, r_check)
        wf = _resolve_w(w, grid)
        s = schouten_of(wf)
        e2w = np.exp(2.0 * s.w)
        a_intr = s.a / e2w[..., None, None]  # g^-1 A = e^{-2w} A0
        sig = sigma_batch(np.linalg.eigvalsh(a_intr))
        grad = fd_gradient(wf)
        grad_up = grad / e2w[..., None]  # grad^a w = g^{ab} d_b w
        g2_intr = np.sum(grad * grad_up, axis=-1)  # |grad w|_g^2

        if k == 2:
            lhs = 2.0 * sig[..., 2]
            trace = np.trace(a_intr, axis1=-2, axis2=-1)
            eye = np.eye(4).reshape((1, 1, 1, 1, 4, 4))
            t1 = trace[..., None, None] * eye - a_intr
            coeff = t1 + 0.5 * g2_intr[..., None, None] * eye
            x_vec = np.einsum("...ab,...b->...a", coeff, grad_up)
            nondiv = 0.0
        else:
            lhs = sig[..., 1]
            x_vec = grad_up
            nondiv = g2_intr  # (n-2k) sigma_0 |grad w|_g^2 / 2 with n-2k = 2

        weighted = np.exp(4.0 * s.w)[..., None] * x_vec
        div_g = np.exp(-4.0 * s.w) * fd_divergence(weighted, grid)
        rhs = nondiv - div_g
        inside = grid.radius_squared() <= r_check**2
        hs.append(grid.h)
        errs.append(float(np.max(np.abs((lhs - rhs)[inside]))))
    return _assess(
        f"intrinsic_divergence_k{k}",
        hs,
        errs,
        {"r_check": r_check, "half_width": half_width, "k": k, "ladder": list(ladder)},
    )


def report_to_csv(report: ConvergenceReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["h", "max_abs_discrepancy", "pair_order"])
        for h, d, order in report.rows():
            writer.writerow(
                [f"{h:.17g}", f"{d:.17g}", "" if order == "" else f"{order:.6f}"]
            )


def report_to_json(reports, path) -> None:
    payload = [
        {
            "name": r.name,
            "h_ladder": r.h_ladder,
            "max_abs_discrepancy": r.max_abs_discrepancy,
            "observed_order": None if not np.isfinite(r.observed_order) else r.observed_order,
            "pass": r.pass_,
            "context": r.context,
        }
        for r in reports
    ]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
