"""Multi-scale aggregation of per-layer attributions with inverse-variance weights."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

ZERO_VARIANCE = 1e-12
WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LayerAttributions:
    """Attribution vectors ``phi`` of shape ``(L, n)`` and per-layer variances."""

    phi: np.ndarray
    variances: np.ndarray
    variance_method: str = "supplied"

    def __post_init__(self):
        phi = np.atleast_2d(np.array(self.phi, dtype=float))
        var = np.array(self.variances, dtype=float).ravel()
        if phi.ndim != 2 or phi.shape[0] == 0:
            raise ConfigurationError("phi must have shape (layers, features) with at least one layer")
        if var.shape != (phi.shape[0],):
            raise ConfigurationError("need exactly one variance per layer")
        if np.any(~np.isfinite(var)) or np.any(var < 0):
            raise DomainError("layer variances must be finite and non-negative")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "variances", var)

    @property
    def n_layers(self) -> int:
        return self.phi.shape[0]

    @classmethod
    def from_dict(cls, data: dict) -> "LayerAttributions":
        try:
            layers = data["layers"]
            return cls([l["phi"] for l in layers], [l["var"] for l in layers])
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"layer file needs {{'layers': [{{'phi', 'var'}}]}}: {exc}") from None


def optimal_weights(sigmas2: Sequence[float]) -> np.ndarray:
    """Minimum-variance convex weights ``lambda_l proportional to 1 / sigma_l^2``.

    Parameters
    ----------
    sigmas2 : sequence of float
        Per-layer variances. Values below ``1e-12`` are treated as zero: those
        layers share the whole weight uniformly, which is the limit of the
        inverse-variance rule.

    Returns
    -------
    numpy.ndarray
        Weights on the probability simplex.

    Raises
    ------
    DomainError
        If any variance is negative or not finite, or the list is empty.
    """
    s = np.array(sigmas2, dtype=float).ravel()
    if s.size == 0:
        raise DomainError("need at least one layer variance")
    if np.any(~np.isfinite(s)) or np.any(s < 0):
        raise DomainError("layer variances must be finite and non-negative")
    zero = s < ZERO_VARIANCE
    if zero.any():
        return zero / zero.sum()
    inv = 1.0 / s
    return inv / math.fsum(inv)


def _check_lambdas(lambdas, L: int) -> np.ndarray:
    lam = np.array(lambdas, dtype=float).ravel()
    if lam.shape != (L,):
        raise ConfigurationError(f"need {L} weights, got {lam.size}")
    if np.any(lam < 0) or abs(math.fsum(lam) - 1.0) > WEIGHT_SUM_TOL:
        raise DomainError("weights must be non-negative and sum to 1")
    return lam


def ms_aggregate(layers: LayerAttributions, lambdas) -> np.ndarray:
    """Convex combination ``sum_l lambda_l phi^(l)``."""
    lam = _check_lambdas(lambdas, layers.n_layers)
    return np.array([math.fsum(lam * layers.phi[:, i]) for i in range(layers.phi.shape[1])])


def aggregate_variance(sigmas2, lambdas, cov=None) -> float:
    """Variance of the aggregate.

    Without ``cov`` this is the independence value ``sum lambda^2 sigma^2``.
    With a covariance matrix (whose diagonal must equal ``sigmas2``) the
    cross terms ``2 sum_{l<l'} lambda_l lambda_l' cov_ll'`` are added.
    """
    s = np.array(sigmas2, dtype=float).ravel()
    lam = _check_lambdas(lambdas, s.size)
    base = math.fsum(lam**2 * s)
    if cov is None:
        return base
    c = np.array(cov, dtype=float)
    if c.shape != (s.size, s.size):
        raise DomainError(f"covariance must be {s.size}x{s.size}")
    if not np.allclose(c, c.T, rtol=0, atol=1e-12):
        raise DomainError("covariance must be symmetric")
    if not np.allclose(np.diag(c), s, rtol=1e-12, atol=1e-15):
        raise DomainError("covariance diagonal must equal the layer variances")
    if np.linalg.eigvalsh(c).min() < -1e-10 * max(1.0, float(np.abs(c).max())):
        raise DomainError("covariance must be positive semidefinite")
    iu = np.triu_indices(s.size, 1)
    return base + 2.0 * math.fsum(lam[iu[0]] * lam[iu[1]] * c[iu])


def min_variance(sigmas2) -> float:
    """``1 / sum sigma_l^{-2}``, the variance reached by :func:`optimal_weights`."""
    s = np.array(sigmas2, dtype=float).ravel()
    if np.any(s < ZERO_VARIANCE):
        return 0.0
    return 1.0 / math.fsum(1.0 / s)


def kkt_residual(sigmas2, lambdas) -> float:
    """Spread of ``2 lambda_l sigma_l^2`` across layers; zero at the optimum."""
    g = 2.0 * np.asarray(lambdas, dtype=float) * np.asarray(sigmas2, dtype=float)
    return float(g.max() - g.min())


def replicate_variance(attribute: Callable[[int], np.ndarray], seeds: Sequence[int]) -> np.ndarray:
    """Per-feature sample variance (ddof=1) of ``attribute(seed)`` over ``seeds``."""
    if len(seeds) < 2:
        raise DomainError("need at least two replicates to estimate a variance")
    reps = np.array([np.asarray(attribute(s), dtype=float) for s in seeds])
    return reps.var(axis=0, ddof=1)
