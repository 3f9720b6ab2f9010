"""Convergence sweeps, the axiom audit and deletion-curve area."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from .coalitions import Coalition, Kernel
from .engine import McConfig, gralis_exact, gralis_mc
from .errors import DomainError
from .games import CooperativeGame, siv_matrix
from .models import EvalPoint, Model, combine, zoo_model
from .multiscale import kkt_residual, optimal_weights
from .paths import PathMode, QuadratureRule, full_coalition_residual

DEFAULT_THRESHOLDS = {
    "efficiency": 1e-10,
    "symmetry": 1e-12,
    "dummy": 1e-12,
    "linearity": 1e-10,
    "sensitivity": 1e-12,
    "locality": 1e-8,
    "interactions": 1e-10,
    "multiscale": 1e-10,
}


def _slope(xs, ys):
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if xs.size < 2 or np.any(ys <= 0) or not np.all(np.isfinite(ys)):
        return None
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def _rmse(errors: np.ndarray) -> float:
    return math.sqrt(math.fsum((errors**2).ravel()) / errors.size)


def run_convergence_sweep(
    m: Model,
    ep: EvalPoint,
    m_grid=(100, 1000, 10000),
    k_grid=(2, 4, 8, 16, 32),
    n_seeds: int = 50,
    seed: int = 0,
    quad: QuadratureRule = QuadratureRule(),
    path=PathMode.SIMULTANEOUS,
    kernel: Kernel = Kernel(),
    workers: int = 1,
) -> dict:
    """Error of the estimators against their limits, with fitted log-log slopes.

    The m-sweep compares plain MC runs (seeds ``seed .. seed+n_seeds-1``)
    with the exact engine at the same quadrature, so only sampling error
    remains. The k-sweep holds the ordering set complete (exact engine) and
    varies the node count: ``rmse`` is measured against a 16-node Gauss
    reference and ``full_residual`` is the completeness gap on the full coalition.
    """
    if not m_grid or not k_grid or n_seeds < 1:
        raise DomainError("sweep grids must be non-empty and n_seeds >= 1")
    path = PathMode.parse(path)
    rows = []

    ref = gralis_exact(m, ep, kernel, quad, path).phi
    for mm in m_grid:
        runs = ordered_map(
            lambda s: gralis_mc(m, ep, McConfig(m=mm, seed=s, quad=quad, path=path, kernel=kernel)).phi,
            range(seed, seed + n_seeds),
            workers,
        )
        rows.append({"sweep": "m", "m": int(mm), "k": quad.k, "rule": quad.kind, "rmse": _rmse(np.array(runs) - ref)})

    fine = gralis_exact(m, ep, kernel, QuadratureRule("gauss", 16), path).phi
    full = Coalition.full(ep.dim)
    for kk in k_grid:
        q = QuadratureRule(quad.kind, kk)
        phi = gralis_exact(m, ep, kernel, q, path).phi
        rows.append(
            {
                "sweep": "k",
                "m": 0,
                "k": int(kk),
                "rule": q.kind,
                "rmse": _rmse(phi - fine),
                "full_residual": full_coalition_residual(m, ep, full, q),
            }
        )
    m_rows = [r for r in rows if r["sweep"] == "m"]
    k_rows = [r for r in rows if r["sweep"] == "k"]
    return {
        "rows": rows,
        "slopes": {
            "m": _slope([r["m"] for r in m_rows], [r["rmse"] for r in m_rows]),
            "k_rmse": _slope([r["k"] for r in k_rows], [r["rmse"] for r in k_rows]),
            "k_residual": _slope([r["k"] for r in k_rows], [r["full_residual"] for r in k_rows]),
        },
    }


def _row(axiom, measured, threshold, comparison, fail_status="fail", note=""):
    ok = measured <= threshold if comparison == "<=" else measured > threshold
    return {
        "axiom": axiom,
        "measured": float(measured),
        "threshold": float(threshold),
        "comparison": comparison,
        "status": "pass" if ok else fail_status,
        "note": note,
    }


def axiomatic_audit(
    quad: QuadratureRule = QuadratureRule("gauss", 8),
    path=PathMode.SIMULTANEOUS,
    sigma: float = 0.75,
    thresholds: dict | None = None,
) -> list:
    """Eight property checks on small constructed models.

    Each row carries the measured magnitude, the threshold it was compared
    with and a status. Efficiency under a non-uniform kernel is expected to
    miss and is labelled ``approximate`` rather than ``fail``.
    """
    thr = {**DEFAULT_THRESHOLDS, **(thresholds or {})}
    kern = Kernel(sigma)
    prod = zoo_model("product", [3])
    ones = EvalPoint(np.ones(3), np.zeros(3))
    rows = []

    res = gralis_exact(prod, ones, kern, quad, path)
    rows.append(_row("efficiency", res.completeness_residual, thr["efficiency"], "<=", "approximate",
                     "product model, x = 1, baseline 0"))

    phi = res.phi
    rows.append(_row("symmetry", float(np.max(phi) - np.min(phi)), thr["symmetry"], "<=",
                     note="interchangeable features of the product model"))

    # x0 x1 + x0; feature 2 never enters
    dummy = zoo_model("multilinear", [3, 0, 1, 0, 1, 0, 0, 0, 0])
    pt = EvalPoint([0.9, 1.3, 2.0], [0.1, -0.2, 0.5])
    rows.append(_row("dummy", abs(gralis_exact(dummy, pt, kern, quad, path).phi[2]), thr["dummy"], "<=",
                     note="feature 2 is ignored by the model"))

    ishi = zoo_model("ishigami-like", [7, 0.1])
    both = combine(2.0, prod, 3.0, ishi)
    lhs = gralis_exact(both, pt, kern, quad, path).phi
    rhs = 2.0 * gralis_exact(prod, pt, kern, quad, path).phi + 3.0 * gralis_exact(ishi, pt, kern, quad, path).phi
    rows.append(_row("linearity", float(np.max(np.abs(lhs - rhs))), thr["linearity"], "<=",
                     note="phi(2F + 3G) against 2 phi(F) + 3 phi(G)"))

    # x and x' differ only in feature 0 and the output changes
    single = EvalPoint([1.0, 1.0, 1.0], [0.0, 1.0, 1.0])
    rows.append(_row("sensitivity", abs(gralis_exact(prod, single, kern, quad, path).phi[0]), thr["sensitivity"],
                     ">", note="only feature 0 differs"))

    skew = EvalPoint([0.5, 1.0, 2.0], np.zeros(3))
    narrow = gralis_exact(prod, skew, Kernel(0.5), quad, path).phi
    wide = gralis_exact(prod, skew, Kernel(2.0), quad, path).phi
    rows.append(_row("locality", float(np.max(np.abs(narrow - wide))), thr["locality"], ">",
                     note="kernel width 0.5 against 2.0"))

    game = CooperativeGame.from_model(prod, skew)
    siv_gap = float(np.max(np.abs(siv_matrix(game, "grabisch") - siv_matrix(game, "mobius"))))
    rows.append(_row("interactions", siv_gap, thr["interactions"], "<=",
                     note="pairwise indices by two routes on the induced game"))

    s2 = [1.0, 2.0, 5.0]
    lam = optimal_weights(s2)
    rows.append(_row("multiscale", kkt_residual(s2, lam) + abs(math.fsum(lam) - 1.0), thr["multiscale"], "<=",
                     note="stationarity of inverse-variance weights"))
    return rows


@dataclass(frozen=True, eq=False)
class DropCurve:
    """Output drop after removing the top ``k`` units, starting at ``(0, 0)``."""

    k: np.ndarray
    drops: np.ndarray

    def __post_init__(self):
        k = np.array(self.k, dtype=float).ravel()
        d = np.array(self.drops, dtype=float).ravel()
        if k.size != d.size:
            raise DomainError("k and drops must have equal length")
        if k.size < 2:
            raise DomainError("a drop curve needs at least two points")
        if k[0] != 0 or np.any(np.diff(k) <= 0):
            raise DomainError("k must start at 0 and increase strictly")
        if d[0] != 0:
            raise DomainError("the drop at k = 0 must be 0")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "drops", d)

    @property
    def k_max(self) -> float:
        return float(self.k[-1])


def deletion_auc(curve: DropCurve) -> float:
    """Trapezoid area under the drop curve divided by ``k_max``."""
    return float(np.trapezoid(curve.drops, curve.k)) / curve.k_max
