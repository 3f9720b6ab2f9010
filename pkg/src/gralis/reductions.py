"""Attribution methods written as ``(Q, w, delta)`` triples.

Each method here has two routes: the triple form evaluated by
:func:`triple_eval`, and the method's usual direct formula. Tests compare
the two.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .coalitions import (
    Coalition,
    Kernel,
    kernel_weights,
    mask_points,
    popcounts,
    shapley_weight_table,
)
from .engine import gralis_exact
from .errors import ConfigurationError, DomainError, RankDeficiencyError, WitnessUnavailableError
from .games import CooperativeGame, kernel_table, kernel_weighted_shapley, shapley_values
from .models import EvalPoint, Model
from .paths import PathMode, QuadratureRule, conditioned_ig, conditioned_ig_batch

COND_LIMIT = 1e12
MAX_REDUCE = 10
MAX_PERMUTATION_TRIPLE = 8


@dataclass(frozen=True, eq=False)
class CanonicalTriple:
    """Weights ``w`` over a finite index set and contributions ``delta``.

    ``delta`` has shape ``(|Q|,)`` for one feature or ``(|Q|, n)`` for all.
    """

    w: np.ndarray
    delta: np.ndarray
    label: str = ""

    def __post_init__(self):
        w = np.array(self.w, dtype=float).ravel()
        delta = np.array(self.delta, dtype=float)
        if delta.ndim not in (1, 2) or delta.shape[0] != w.size:
            raise ConfigurationError(f"delta must have {w.size} rows, got shape {delta.shape}")
        if w.size == 0:
            raise ConfigurationError("index set must be non-empty")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "delta", delta)

    @property
    def q_size(self) -> int:
        return self.w.size

    def constitutive_residual(self, total: float) -> float:
        """``max_q |sum_i delta[q, i] - total|`` for the matrix form."""
        if self.delta.ndim != 2:
            raise ConfigurationError("constitutive check needs the matrix form of delta")
        return max(abs(math.fsum(list(row) + [-total])) for row in self.delta)


def triple_eval(t: CanonicalTriple):
    """``sum_q w[q] delta[q]``; a float, or a vector for matrix ``delta``."""
    if t.delta.ndim == 1:
        out = math.fsum(t.w * t.delta)
    else:
        out = np.array([math.fsum(t.w * t.delta[:, i]) for i in range(t.delta.shape[1])])
    if not np.all(np.isfinite(out)):
        raise DomainError("triple evaluation is not finite")
    return out


# -- GradCAM with the ReLU removed --------------------------------------------


@dataclass(frozen=True, eq=False)
class FeatureMapStack:
    """Activations ``A`` and gradients ``G``, both ``K x H x W``."""

    A: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        G = np.array(self.G, dtype=float)
        if A.ndim != 3 or A.shape != G.shape:
            raise ConfigurationError(f"A and G must both be K x H x W, got {A.shape} and {G.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "G", G)

    @property
    def shape(self) -> tuple:
        return self.A.shape

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureMapStack":
        try:
            shape = (int(data["K"]), int(data["H"]), int(data["W"]))
            return cls(np.reshape(data["A"], shape), np.reshape(data["G"], shape))
        except (KeyError, ValueError) as exc:
            raise ConfigurationError(f"feature-map file needs K, H, W, A, G: {exc}") from None

    def scaled_gradients(self, lam: float) -> "FeatureMapStack":
        return FeatureMapStack(self.A, lam * self.G)


def channel_weights(fm: FeatureMapStack) -> np.ndarray:
    """``alpha_k``: spatial mean of channel ``k``'s gradient."""
    K, H, W = fm.shape
    return np.array([math.fsum(fm.G[k].ravel()) / (H * W) for k in range(K)])


def gradcam_lin_map(fm: FeatureMapStack) -> np.ndarray:
    """``sum_k alpha_k A^k`` over every position."""
    return np.tensordot(channel_weights(fm), fm.A, axes=1)


def gradcam_lin(fm: FeatureMapStack, p: int, q: int) -> float:
    K, H, W = fm.shape
    if not (0 <= p < H and 0 <= q < W):
        raise DomainError(f"position ({p}, {q}) is outside the {H}x{W} map")
    return math.fsum(channel_weights(fm) * fm.A[:, p, q])


def gradcam_triple(fm: FeatureMapStack, p: int, q: int) -> CanonicalTriple:
    """Index set ``(k, i, j)``, weight ``1/(H W)``, contribution ``G^k_ij A^k_pq``."""
    K, H, W = fm.shape
    if not (0 <= p < H and 0 <= q < W):
        raise DomainError(f"position ({p}, {q}) is outside the {H}x{W} map")
    delta = (fm.G * fm.A[:, p, q][:, None, None]).ravel()
    return CanonicalTriple(np.full(delta.size, 1.0 / (H * W)), delta, "gradcam-lin")


def _positive_map(fm: FeatureMapStack, lam: float) -> np.ndarray:
    if not lam < 0:
        raise DomainError(f"the witness needs a negative scale, got {lam}")
    L = gradcam_lin_map(fm)
    if not np.any(L > 0):
        raise WitnessUnavailableError("the linear map has no positive position")
    return L


def relu_homogeneity_defect(fm: FeatureMapStack, lam: float) -> float:
    """``max |ReLU(lam L) - lam ReLU(L)|`` over positions."""
    L = _positive_map(fm, lam)
    return float(np.max(np.abs(np.maximum(lam * L, 0.0) - lam * np.maximum(L, 0.0))))


def relu_nonlinearity_witness(fm: FeatureMapStack, lam: float) -> bool:
    """True when rectified GradCAM fails ``ReLU(lam L) = lam ReLU(L)``."""
    return relu_homogeneity_defect(fm, lam) > 0.0


def lin_homogeneity_defect(fm: FeatureMapStack, lam: float) -> float:
    """``max |L(lam G) - lam L(G)|`` for the unrectified map."""
    return float(np.max(np.abs(gradcam_lin_map(fm.scaled_gradients(lam)) - lam * gradcam_lin_map(fm))))


# -- LIME ----------------------------------------------------------------------


def _design(designs, weights, fvals, intercept: bool):
    Z = np.atleast_2d(np.array(designs, dtype=float))
    w = np.array(weights, dtype=float).ravel()
    y = np.array(fvals, dtype=float).ravel()
    if not (Z.shape[0] == w.size == y.size):
        raise ConfigurationError("designs, weights and fvals need one entry per sample")
    if np.any(w < 0):
        raise DomainError("proximity weights must be non-negative")
    X = np.hstack([np.ones((Z.shape[0], 1)), Z]) if intercept else Z
    return X, np.sqrt(w), y


def lime_coefficients(designs, weights, fvals, intercept: bool = True) -> np.ndarray:
    """Weighted least-squares fit solved directly with ``lstsq``.

    Returns the per-feature slopes (the intercept is dropped).
    """
    X, sw, y = _design(designs, weights, fvals, intercept)
    Xw = sw[:, None] * X
    if np.linalg.cond(Xw) ** 2 >= COND_LIMIT:
        raise RankDeficiencyError("weighted normal equations are singular or ill-conditioned")
    coef = np.linalg.lstsq(Xw, sw * y, rcond=None)[0]
    return coef[1:] if intercept else coef


def lime_triple(designs, weights, fvals, i: int, intercept: bool = True):
    """Hat-matrix row of feature ``i`` as weights, sample outputs as contributions.

    Parameters
    ----------
    designs : array_like, shape (T, n)
        Binary coalition masks.
    weights : array_like, shape (T,)
        Proximity weight of each sample.
    fvals : array_like, shape (T,)
        Model output on each sample.
    i : int
        Feature whose coefficient is represented.
    intercept : bool
        Prepend a column of ones.

    Returns
    -------
    (CanonicalTriple, float)
        The triple and the fitted coefficient of feature ``i``.

    Raises
    ------
    RankDeficiencyError
        If ``cond(X^T W X) >= 1e12``.
    """
    X, sw, y = _design(designs, weights, fvals, intercept)
    n = X.shape[1] - int(intercept)
    if not 0 <= i < n:
        raise DomainError(f"feature index {i} out of range for {n} features")
    Qm, R = np.linalg.qr(sw[:, None] * X)
    # cond(X^T W X) = cond(R)^2
    if np.linalg.cond(R) ** 2 >= COND_LIMIT:
        raise RankDeficiencyError("weighted normal equations are singular or ill-conditioned", feature=i)
    hat = np.linalg.solve(R, Qm.T) * sw[None, :]
    row = hat[i + int(intercept)]
    coef = lime_coefficients(designs, weights, fvals, intercept)[i]
    return CanonicalTriple(row, y, "lime"), float(coef)


def lime_samples(m: Model, ep: EvalPoint, bits, kernel: Kernel = Kernel()):
    """Designs, proximity weights and outputs for the given coalition masks."""
    bits = np.asarray(bits, dtype=np.uint64).ravel()
    designs = ((bits[:, None] >> np.arange(ep.dim, dtype=np.uint64)) & np.uint64(1)).astype(float)
    return designs, kernel_weights(kernel, ep, bits), m(mask_points(ep, bits))


# -- Integrated gradients ---------------------------------------------------------


def ig_triple(m: Model, ep: EvalPoint, i: int, k: int):
    """Right-rule IG of feature ``i``: ``w_j = gap_i / k``, ``delta_j = dF/dx_i`` at ``j/k``."""
    if int(k) < 1:
        raise DomainError(f"need k >= 1, got {k}")
    if not 0 <= i < ep.dim:
        raise DomainError(f"feature index {i} out of range")
    alphas = np.arange(1, k + 1) / k
    pts = ep.x_base + alphas[:, None] * ep.gap
    delta = m.gradient(pts)[:, i]
    t = CanonicalTriple(np.full(k, ep.gap[i] / k), delta, "ig")
    return t, triple_eval(t)


def integrated_gradients(m: Model, ep: EvalPoint, k: int = 50, rule: str = "right") -> np.ndarray:
    """Standard IG along the straight line from baseline to input."""
    quad = QuadratureRule(rule, k)
    pts = ep.x_base + quad.nodes[:, None] * ep.gap
    return ep.gap * (quad.weights @ m.gradient(pts))


# -- SHAP ----------------------------------------------------------------------------


def shap_triple(g: CooperativeGame, i: int) -> CanonicalTriple:
    """Coalitions without ``i``, Shapley weights, marginal contributions."""
    if not 0 <= i < g.n:
        raise DomainError(f"player {i} out of range")
    all_bits = np.arange(1 << g.n, dtype=np.int64)
    S = all_bits[(all_bits >> i) & 1 == 0]
    w = shapley_weight_table(g.n)[popcounts(S.astype(np.uint64))]
    return CanonicalTriple(w, g.values[S | (1 << i)] - g.values[S], "shap")


def shap_permutation_triple(g: CooperativeGame) -> CanonicalTriple:
    """All orderings, weight ``1/n!``, per-player marginal contributions."""
    if g.n > MAX_PERMUTATION_TRIPLE:
        raise DomainError(f"permutation form enumerates n!; capped at n = {MAX_PERMUTATION_TRIPLE}")
    perms = list(itertools.permutations(range(g.n)))
    delta = np.empty((len(perms), g.n))
    for r, p in enumerate(perms):
        bits = 0
        for j in p:
            delta[r, j] = g.values[bits | 1 << j] - g.values[bits]
            bits |= 1 << j
    return CanonicalTriple(np.full(len(perms), 1.0 / len(perms)), delta, "shap-permutation")


# -- Limit checks ---------------------------------------------------------------------


def reducibility_suite(
    m: Model,
    ep: EvalPoint,
    quad: QuadratureRule = QuadratureRule("gauss", 16),
    k: int = 32,
    sigma: float = 0.75,
) -> dict:
    """Run the four limit checks and report the largest deviation of each.

    (i) uniform kernel with sequential paths against the exact Shapley value
    of the induced game. (ii) the full-coalition conditioned path against
    standard IG at the same rule and ``k``. (iii) for affine models only, a
    ``sigma`` kernel against the kernel-weighted Shapley difference.
    (iv) a vanishing kernel width against the Shapley-weighted mean of
    conditioned IG over the coalitions closest to the baseline.
    """
    n = ep.dim
    if n > MAX_REDUCE:
        raise DomainError(f"reducibility checks enumerate coalitions; capped at n = {MAX_REDUCE}")
    game = CooperativeGame.from_model(m, ep)
    out = {}

    seq = gralis_exact(m, ep, Kernel(), quad, PathMode.SEQUENTIAL).phi
    out["i_shapley_limit"] = _row(np.max(np.abs(seq - shapley_values(game))))

    right = QuadratureRule("right", k)
    full = [conditioned_ig(m, ep, Coalition.full(n).without_feature(i), i, right) for i in range(n)]
    ig = integrated_gradients(m, ep, k, "right")
    out["ii_ig_limit"] = _row(np.max(np.abs(np.array(full) - ig)))

    if m.affine:
        kern = Kernel(sigma)
        phi = gralis_exact(m, ep, kern, quad).phi
        pi = kernel_table(kern, ep)
        ksh = kernel_weighted_shapley(game, pi)
        w = shapley_weight_table(n)
        all_bits = np.arange(1 << n, dtype=np.int64)
        z = np.array([math.fsum(w[popcounts(S.astype(np.uint64))] * pi[S]) for S in
                      (all_bits[(all_bits >> i) & 1 == 0] for i in range(n))])
        out["iii_kernel_shap_limit"] = _row(np.max(np.abs(phi - ksh / z)))
    else:
        out["iii_kernel_shap_limit"] = {"status": "skipped", "reason": "model is not affine"}

    out["iv_narrow_kernel_limit"] = _row(_narrow_kernel_deviation(m, ep, quad))
    return out


def _row(dev: float) -> dict:
    return {"status": "ran", "max_deviation": float(dev)}


def _narrow_kernel_deviation(m: Model, ep: EvalPoint, quad: QuadratureRule) -> float:
    n = ep.dim
    gaps = np.abs(ep.gap)
    if not np.any(gaps):
        return 0.0
    sigma = 0.02 * float(gaps[gaps > 0].min())
    phi = gralis_exact(m, ep, Kernel(sigma), quad).phi

    # Coalitions of zero-gap features are the ones at minimum distance.
    zero_bits = sum(1 << j for j in range(n) if gaps[j] == 0)
    w = shapley_weight_table(n)
    limit = np.zeros(n)
    for i in range(n):
        if gaps[i] == 0:
            continue
        pool = zero_bits & ~(1 << i)
        subs = np.array([s for s in range(1 << n) if s & ~pool == 0], dtype=np.uint64)
        igs = conditioned_ig_batch(m, ep, subs, np.full(subs.size, i), quad)
        ws = w[popcounts(subs)]
        limit[i] = math.fsum(ws * igs) / math.fsum(ws)
    return float(np.max(np.abs(phi - limit)))
