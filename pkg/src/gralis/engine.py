"""Exact (enumerative) and Monte-Carlo GRALIS attribution.

The exact engine sums over every coalition ``S`` of the other features with
weight ``shapley_weight(|S|) * kernel(S)`` and divides by the per-feature
weight total. The Monte-Carlo engine walks random feature orderings and uses
the predecessors of each feature as its coalition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._parallel import ordered_map
from .coalitions import (
    MAX_EXACT,
    MAX_FEATURES,
    Kernel,
    kernel_weights,
    popcounts,
    predecessor_bits,
    sample_permutations,
    shapley_weight_table,
)
from .errors import CapacityError, ConfigurationError, DomainError
from .models import EvalPoint, Model
from .paths import CHUNK, PathMode, QuadratureRule, conditioned_ig_batch

PERM_CHUNK = 2048

_NORMALIZATIONS = {
    "feature": "feature",
    "per-feature": "feature",
    "global": "global",
    "global-z": "global",
}


@dataclass
class AttributionResult:
    phi: np.ndarray
    completeness_residual: float
    z_norm: object
    mode_tag: str
    m_used: int = 0
    k_used: int = 0
    seed: Optional[int] = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        z = self.z_norm
        return {
            "phi": [float(v) for v in self.phi],
            "residual": float(self.completeness_residual),
            "diagnostics": {
                "mode": self.mode_tag,
                "z": [float(v) for v in np.atleast_1d(z)] if not np.isscalar(z) else float(z),
                "m": int(self.m_used),
                "k": int(self.k_used),
                "seed": self.seed,
                **{key: _jsonable(v) for key, v in self.diagnostics.items()},
            },
        }


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [float(a) for a in v.ravel()]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


@dataclass(frozen=True)
class McConfig:
    """Settings for GRALIS-MC.

    ``m`` is the number of orderings evaluated. With ``antithetic`` it must be
    even: ``m/2`` orderings are drawn and each is paired with its reverse, so
    the model-evaluation budget is the same as a plain run with the same ``m``.
    """

    m: int = 1000
    antithetic: bool = False
    normalization: str = "feature"
    seed: int = 0
    quad: QuadratureRule = QuadratureRule()
    path: PathMode = PathMode.SIMULTANEOUS
    kernel: Kernel = Kernel()

    def __post_init__(self):
        if int(self.m) < 1:
            raise DomainError(f"m must be >= 1, got {self.m}")
        if self.antithetic and int(self.m) % 2:
            raise ConfigurationError(f"antithetic sampling needs an even m, got {self.m}")
        norm = _NORMALIZATIONS.get(self.normalization)
        if norm is None:
            raise ConfigurationError(f"unknown normalization {self.normalization!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "normalization", norm)
        object.__setattr__(self, "path", PathMode.parse(self.path))


def completeness_residual(res: AttributionResult, m: Model, ep: EvalPoint) -> float:
    """``|sum_i phi_i - (f(x) - f(x'))|``."""
    total = float(m(ep.x)) - float(m(ep.x_base))
    return abs(math.fsum(list(res.phi) + [-total]))


def _residual(phi, m: Model, ep: EvalPoint) -> float:
    total = float(m(ep.x)) - float(m(ep.x_base))
    return abs(math.fsum(list(phi) + [-total]))


def _degenerate(n: int, mode: str, **kw) -> AttributionResult:
    return AttributionResult(np.zeros(n), 0.0, np.ones(n), mode, diagnostics={"degenerate_baseline": True}, **kw)


def gralis_exact(
    m: Model,
    ep: EvalPoint,
    kernel: Kernel = Kernel(),
    quad: QuadratureRule = QuadratureRule(),
    path=PathMode.SIMULTANEOUS,
    workers: int = 1,
) -> AttributionResult:
    """GRALIS by enumerating every coalition of the other features."""
    n = ep.dim
    if n > MAX_EXACT:
        raise CapacityError(f"exact enumeration is capped at {MAX_EXACT} features, got {n}")
    if m.dim != n:
        raise ConfigurationError("model and point dimensions differ")
    path = PathMode.parse(path)
    if not np.any(ep.gap):
        return _degenerate(n, "exact", k_used=quad.k)

    sw = shapley_weight_table(n)
    all_bits = np.arange(1 << n, dtype=np.uint64)
    active = [i for i in range(n) if ep.gap[i] != 0.0]
    bits, feats = [], []
    for i in active:
        b = all_bits[(all_bits >> np.uint64(i)) & np.uint64(1) == 0]
        bits.append(b)
        feats.append(np.full(b.shape, i))
    bits = np.concatenate(bits)
    feats = np.concatenate(feats)
    igs = _ig_parallel(m, ep, bits, feats, quad, path, workers)
    wts = sw[popcounts(bits)] * kernel_weights(kernel, ep, bits)

    phi = np.zeros(n)
    z = np.ones(n)
    for i in active:
        sel = feats == i
        num = math.fsum(wts[sel] * igs[sel])
        z[i] = 1.0 if kernel.is_uniform else math.fsum(wts[sel])
        phi[i] = num / z[i]
    return AttributionResult(
        phi,
        _residual(phi, m, ep),
        z,
        "exact",
        m_used=0,
        k_used=quad.k,
        diagnostics={"gradient_evaluations": int(bits.size * quad.k)},
    )


def _ig_parallel(m, ep, bits, feats, quad, path, workers) -> np.ndarray:
    spans = [(lo, min(lo + CHUNK, bits.size)) for lo in range(0, bits.size, CHUNK)]
    parts = ordered_map(
        lambda s: conditioned_ig_batch(m, ep, bits[s[0] : s[1]], feats[s[0] : s[1]], quad, path),
        spans,
        workers,
    )
    return np.concatenate(parts) if parts else np.empty(0)


def _orderings(seed: int, m: int, n: int, antithetic: bool, workers: int) -> np.ndarray:
    draws = m // 2 if antithetic else m
    spans = [(lo, min(PERM_CHUNK, draws - lo)) for lo in range(0, draws, PERM_CHUNK)]
    parts = ordered_map(lambda s: sample_permutations(seed, s[0], s[1], n), spans, workers)
    perms = np.concatenate(parts) if parts else np.empty((0, n), dtype=np.int64)
    if antithetic:
        paired = np.empty((2 * draws, n), dtype=perms.dtype)
        paired[0::2] = perms
        paired[1::2] = perms[:, ::-1]
        perms = paired
    return perms


def _run_mc(m: Model, ep: EvalPoint, cfg: McConfig, workers: int) -> AttributionResult:
    n = ep.dim
    if n > MAX_FEATURES:
        raise CapacityError(f"at most {MAX_FEATURES} features are supported")
    if m.dim != n:
        raise ConfigurationError("model and point dimensions differ")
    if not np.any(ep.gap):
        return _degenerate(n, "mc", m_used=cfg.m, k_used=cfg.quad.k, seed=cfg.seed)

    perms = _orderings(cfg.seed, cfg.m, n, cfg.antithetic, workers)
    pred = predecessor_bits(perms)
    feats = np.broadcast_to(np.arange(n), pred.shape)
    active = ep.gap != 0.0

    # Each (coalition, feature) pair is integrated once and reused.
    pairs = np.stack([pred[:, active].ravel(), feats[:, active].ravel().astype(np.uint64)], axis=1)
    uniq, inverse = np.unique(pairs, axis=0, return_inverse=True)
    ig_u = _ig_parallel(m, ep, uniq[:, 0], uniq[:, 1].astype(np.int64), cfg.quad, cfg.path, workers)

    ig = np.zeros(pred.shape)
    ig[:, active] = ig_u[inverse.ravel()].reshape(pred.shape[0], -1)
    pw = kernel_weights(cfg.kernel, ep, pred)
    contrib = pw * ig

    num = np.array([math.fsum(contrib[:, i]) for i in range(n)])
    if cfg.normalization == "feature":
        z = np.array([math.fsum(pw[:, i]) for i in range(n)])
        phi = num / z
    else:
        z = math.fsum(pw.ravel())
        phi = num / z if z > 0 else num
    b_est = np.abs(contrib).max(axis=0)
    return AttributionResult(
        phi,
        _residual(phi, m, ep),
        z,
        "mc",
        m_used=cfg.m,
        k_used=cfg.quad.k,
        seed=cfg.seed,
        diagnostics={
            "antithetic": cfg.antithetic,
            "normalization": cfg.normalization,
            "b_estimate": b_est,
            "gradient_evaluations": int(cfg.m * int(active.sum()) * cfg.quad.k),
            "distinct_pairs": int(uniq.shape[0]),
        },
    )


def gralis_mc(m: Model, ep: EvalPoint, cfg: McConfig = McConfig(), workers: int = 1) -> AttributionResult:
    """GRALIS-MC over ``cfg.m`` seeded random orderings.

    Per-feature normalisation divides each feature's kernel-weighted sum by
    that feature's own kernel-weight total; ``global`` divides everything by a
    single total over all features and draws. Output is a pure function of
    ``(m, ep, cfg)``; ``workers`` only changes scheduling.
    """
    if cfg.antithetic:
        return gralis_mc_antithetic(m, ep, cfg, workers)
    return _run_mc(m, ep, cfg, workers)


def gralis_mc_antithetic(m: Model, ep: EvalPoint, cfg: McConfig, workers: int = 1) -> AttributionResult:
    """GRALIS-MC where each drawn ordering is paired with its reverse."""
    if not cfg.antithetic:
        raise ConfigurationError("gralis_mc_antithetic requires cfg.antithetic = True")
    return _run_mc(m, ep, cfg, workers)


def mc_error_bound(
    B: float,
    m: int,
    delta: float,
    x_i_gap: float,
    l1_gap: float,
    hess_sup: float,
    k: int,
) -> float:
    """Chebyshev Monte-Carlo term ``B / sqrt(m delta)`` plus the right-Riemann
    term ``|x_i - x'_i| ||x - x'||_1 ||hess F||_inf / 2k``."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if B < 0 or m < 1 or k < 1 or hess_sup < 0 or l1_gap < 0:
        raise DomainError("need B >= 0, m >= 1, k >= 1 and non-negative norms")
    return B / math.sqrt(m * delta) + abs(x_i_gap) * l1_gap * hess_sup / (2.0 * k)
