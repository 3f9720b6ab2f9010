"""Coalition-conditioned integration paths and the quadrature rules used to
integrate gradients along them."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coalitions import Coalition, bits_to_mask, mask_point
from .errors import ConfigurationError, DomainError, NumericalError
from .models import EvalPoint, Model

CHUNK = 4096

_KIND_ALIASES = {
    "right": "right",
    "right-riemann": "right",
    "mid": "mid",
    "midpoint": "mid",
    "gauss": "gauss",
    "gauss-legendre": "gauss",
}


@lru_cache(maxsize=None)
def _rule(kind: str, k: int):
    j = np.arange(1, k + 1, dtype=float)
    if kind == "right":
        nodes, weights = j / k, np.full(k, 1.0 / k)
    elif kind == "mid":
        nodes, weights = (j - 0.5) / k, np.full(k, 1.0 / k)
    else:
        t, w = np.polynomial.legendre.leggauss(k)
        nodes, weights = (t + 1.0) / 2.0, w / 2.0
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


# Gauss-Legendre tables for the node counts used in practice.
for _p in range(1, 17):
    _rule("gauss", _p)


@dataclass(frozen=True)
class QuadratureRule:
    """Rule on ``[0, 1]``: right Riemann sum, midpoint, or Gauss-Legendre."""

    kind: str = "mid"
    k: int = 10

    def __post_init__(self):
        kind = _KIND_ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise ConfigurationError(f"unknown quadrature {self.kind!r}; use right, mid or gauss")
        if int(self.k) < 1:
            raise DomainError(f"quadrature needs k >= 1, got {self.k}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "k", int(self.k))

    @property
    def nodes(self) -> np.ndarray:
        return _rule(self.kind, self.k)[0]

    @property
    def weights(self) -> np.ndarray:
        return _rule(self.kind, self.k)[1]

    def integrate(self, g) -> float:
        """Apply the rule to a vectorised integrand ``g(alpha)``."""
        vals = np.asarray(g(self.nodes), dtype=float)
        return math.fsum(self.weights * vals)


class PathMode(str, enum.Enum):
    SIMULTANEOUS = "simultaneous"
    SEQUENTIAL = "sequential"

    @classmethod
    def parse(cls, value) -> "PathMode":
        try:
            return cls(value if not isinstance(value, cls) else value.value)
        except ValueError:
            raise ConfigurationError(f"unknown path mode {value!r}") from None


def path_point(ep: EvalPoint, S: Coalition, i: int, alpha: float, mode=PathMode.SIMULTANEOUS) -> np.ndarray:
    """Point on the coalition-conditioned path at parameter ``alpha``.

    Simultaneous: every feature of ``S | {i}`` moves from baseline together.
    Sequential: ``S`` sits at ``x``, only feature ``i`` moves.
    """
    mode = PathMode.parse(mode)
    if i in S:
        raise DomainError(f"feature {i} must not belong to the conditioning coalition")
    pt = mask_point(ep, S) if mode is PathMode.SEQUENTIAL else ep.x_base.copy()
    moving = S.members + (i,) if mode is PathMode.SIMULTANEOUS else (i,)
    idx = list(moving)
    pt[idx] = ep.x_base[idx] + alpha * ep.gap[idx]
    return pt


def conditioned_ig_batch(
    m: Model,
    ep: EvalPoint,
    bits,
    features,
    quad: QuadratureRule,
    mode=PathMode.SIMULTANEOUS,
) -> np.ndarray:
    """Vectorised conditioned integrated gradients for ``(S, i)`` pairs.

    Work is split into fixed-size chunks and the quadrature sum is
    accumulated node by node, so every entry is bitwise independent of how
    many pairs are requested together.
    """
    mode = PathMode.parse(mode)
    bits = np.asarray(bits, dtype=np.uint64).ravel()
    feats = np.asarray(features, dtype=np.int64).ravel()
    if bits.shape != feats.shape:
        raise ConfigurationError("bits and features must have equal length")
    n = ep.dim
    if m.dim != n:
        raise ConfigurationError(f"model dimension {m.dim} does not match point dimension {n}")
    out = np.empty(bits.shape[0])
    nodes, weights = quad.nodes, quad.weights
    d = ep.gap
    for lo in range(0, bits.shape[0], CHUNK):
        b = bits[lo : lo + CHUNK]
        f = feats[lo : lo + CHUNK]
        member = bits_to_mask(b, n)
        rows = np.arange(b.shape[0])
        if member[rows, f].any():
            raise DomainError("target feature must not belong to its conditioning coalition")
        onehot = np.zeros_like(member)
        onehot[rows, f] = True
        if mode is PathMode.SIMULTANEOUS:
            start = np.broadcast_to(ep.x_base, member.shape)
            direction = np.where(member | onehot, d, 0.0)
        else:
            start = np.where(member, ep.x, ep.x_base)
            direction = np.where(onehot, d, 0.0)
        acc = np.zeros(b.shape[0])
        for alpha, w in zip(nodes, weights):
            g = m.gradient(start + alpha * direction)[rows, f]
            if not np.all(np.isfinite(g)):
                r = int(np.flatnonzero(~np.isfinite(g))[0])
                raise NumericalError(
                    f"non-finite gradient for feature {int(f[r])} at alpha={alpha}",
                    coalition=int(b[r]),
                    feature=int(f[r]),
                    alpha=float(alpha),
                )
            acc = acc + w * g
        out[lo : lo + CHUNK] = d[f] * acc
    return out


def conditioned_ig(
    m: Model,
    ep: EvalPoint,
    S: Coalition,
    i: int,
    quad: QuadratureRule = QuadratureRule(),
    mode=PathMode.SIMULTANEOUS,
) -> float:
    """``(x_i - x'_i)`` times the quadrature of ``d F / d x_i`` along the
    path conditioned on ``S``."""
    if S.n != ep.dim:
        raise ConfigurationError("coalition universe does not match point dimension")
    if i in S:
        raise DomainError(f"feature {i} must not belong to the conditioning coalition")
    return float(conditioned_ig_batch(m, ep, [S.bits], [i], quad, mode)[0])


def full_coalition_residual(m: Model, ep: EvalPoint, S: Coalition, quad: QuadratureRule = QuadratureRule()) -> float:
    """``|sum_{j in S} IG_j(S \\ {j}) - (F(x_S) - F(x'))|`` on simultaneous paths."""
    if len(S) == 0:
        raise DomainError("full_coalition_residual needs a non-empty coalition")
    members = S.members
    bits = [S.bits & ~(1 << j) for j in members]
    igs = conditioned_ig_batch(m, ep, bits, members, quad, PathMode.SIMULTANEOUS)
    target = float(m(mask_point(ep, S))) - float(m(ep.x_base))
    return abs(math.fsum(igs) - target)
