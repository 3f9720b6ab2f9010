"""Cooperative games on the coalition lattice.

Games are stored densely: ``values[bits]`` is the worth of the coalition
whose member set is encoded by ``bits``. Möbius and zeta transforms are the
in-place subset-sum sweeps, O(n 2^n).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coalitions import (
    MAX_EXACT,
    Coalition,
    interaction_weight_table,
    kernel_weights,
    mask_points,
    popcounts,
    shapley_weight,
    shapley_weight_table,
)
from .errors import CapacityError, ConfigurationError, DomainError
from .models import EvalPoint, Model


def _check_n(n: int):
    if n > MAX_EXACT:
        raise CapacityError(f"dense games are capped at {MAX_EXACT} players, got {n}")
    if n < 0:
        raise DomainError("number of players must be non-negative")


@dataclass(frozen=True, eq=False)
class CooperativeGame:
    """A set function on ``2^N`` stored as a dense bitmask-indexed array."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        v = np.array(self.values, dtype=float)
        if v.shape != (1 << self.n,):
            raise ConfigurationError(f"a game on {self.n} players needs {1 << self.n} values, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def grounded(self) -> bool:
        """``v(empty) == 0``; games built from projections should satisfy it."""
        return self.values[0] == 0.0

    def __call__(self, S) -> float:
        bits = S.bits if isinstance(S, Coalition) else int(S)
        return float(self.values[bits])

    @classmethod
    def from_function(cls, fn: Callable[[int], float], n: int) -> "CooperativeGame":
        _check_n(n)
        return cls(n, [fn(b) for b in range(1 << n)])

    @classmethod
    def from_model(cls, m: Model, ep: EvalPoint) -> "CooperativeGame":
        """``v(S) = F(x_S) - F(x')`` with ``x_S`` the masked input."""
        n = ep.dim
        _check_n(n)
        pts = mask_points(ep, np.arange(1 << n, dtype=np.uint64))
        vals = m(pts)
        return cls(n, vals - vals[0])

    def to_dict(self) -> dict:
        return {"n": self.n, "values": [float(v) for v in self.values]}


@dataclass(frozen=True, eq=False)
class Projection:
    """Assignment of each index ``q`` in a finite set ``Q`` to a coalition."""

    n: int
    assign: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        a = np.array(self.assign, dtype=np.int64).ravel()
        if a.size and (a.min() < 0 or a.max() >= 1 << self.n):
            raise DomainError("projection targets must be coalitions of the player set")
        a.setflags(write=False)
        object.__setattr__(self, "assign", a)

    @property
    def q_size(self) -> int:
        return self.assign.size

    def relabel(self, sigma) -> "Projection":
        """The projection ``q -> sigma(rho(q))``."""
        sigma = _check_perm(sigma, self.n)
        return Projection(self.n, _image_bits(self.assign, sigma))


@dataclass(frozen=True, eq=False)
class WeightedSignal:
    """Finite signal ``w * Delta`` over ``Q`` with non-negative masses ``mu``."""

    wdelta: np.ndarray
    mu: np.ndarray = None

    def __post_init__(self):
        wd = np.array(self.wdelta, dtype=float).ravel()
        mu = np.ones_like(wd) if self.mu is None else np.array(self.mu, dtype=float).ravel()
        if mu.shape != wd.shape:
            raise ConfigurationError("signal and mass arrays differ in length")
        if np.any(mu < 0):
            raise DomainError("masses must be non-negative")
        if not np.all(np.isfinite(wd * mu)):
            raise DomainError("signal must have finite l1 mass")
        object.__setattr__(self, "wdelta", wd)
        object.__setattr__(self, "mu", mu)

    @property
    def q_size(self) -> int:
        return self.wdelta.size

    def l1_norm(self) -> float:
        return math.fsum(np.abs(self.wdelta) * self.mu)


def p_rho_apply(f, rho: Projection, mu=None) -> np.ndarray:
    """Integrate ``f`` over each exact preimage ``rho^{-1}(S)``."""
    f = np.asarray(f, dtype=float).ravel()
    mu = np.ones_like(f) if mu is None else np.asarray(mu, dtype=float).ravel()
    if f.size != rho.q_size or mu.size != rho.q_size:
        raise ConfigurationError(f"signal over {f.size} indices does not match projection over {rho.q_size}")
    return np.bincount(rho.assign, weights=f * mu, minlength=1 << rho.n)


def push_forward(rho: Projection, mu=None) -> np.ndarray:
    """The coalition masses ``nu(S) = mu(rho^{-1}(S))``."""
    return p_rho_apply(np.ones(rho.q_size), rho, mu)


def induce_game(sig: WeightedSignal, rho: Projection) -> CooperativeGame:
    """The induced game ``v_G(S) = sum_{rho(q) = S} wdelta[q] mu[q]``.

    A non-zero total on the empty coalition is kept and reported through a
    warning and ``game.grounded``.
    """
    if sig.q_size != rho.q_size:
        raise ConfigurationError(f"signal size {sig.q_size} differs from projection size {rho.q_size}")
    g = CooperativeGame(rho.n, p_rho_apply(sig.wdelta, rho, sig.mu))
    if not g.grounded:
        warnings.warn(f"empty coalition carries signal mass {g.values[0]!r}", stacklevel=2)
    return g


def mobius_transform(g: CooperativeGame) -> np.ndarray:
    """Coefficients ``m(T) = sum_{A <= T} (-1)^{|T|-|A|} v(A)``."""
    a = g.values.copy()
    for i in range(g.n):
        view = a.reshape(-1, 2, 1 << i)
        view[:, 1, :] -= view[:, 0, :]
    return a


def inverse_mobius(coef) -> CooperativeGame:
    """Rebuild ``v(S) = sum_{T <= S} m(T)`` from Möbius coefficients."""
    a = np.array(coef, dtype=float).ravel()
    n = a.size.bit_length() - 1
    if a.size != 1 << n:
        raise ConfigurationError(f"coefficient array length {a.size} is not a power of two")
    _check_n(n)
    for i in range(n):
        view = a.reshape(-1, 2, 1 << i)
        view[:, 1, :] += view[:, 0, :]
    return CooperativeGame(n, a)


def _without(n: int, *players) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.int64)
    keep = np.ones(masks.shape, dtype=bool)
    for p in players:
        keep &= (masks >> p) & 1 == 0
    return masks[keep]


def _check_player(g: CooperativeGame, i: int):
    if not 0 <= i < g.n:
        raise DomainError(f"player {i} outside 0..{g.n - 1}")


def shapley_values(g: CooperativeGame) -> np.ndarray:
    """``phi_i = sum_{S <= N \\ i} w(|S|) [v(S | i) - v(S)]``."""
    n = g.n
    if n == 0:
        return np.zeros(0)
    w = shapley_weight_table(n)
    v = g.values
    phi = np.empty(n)
    for i in range(n):
        S = _without(n, i)
        phi[i] = np.dot(w[popcounts(S)], v[S | 1 << i] - v[S])
    return phi


def shapley_from_mobius(g: CooperativeGame) -> np.ndarray:
    """``phi_i = sum_{T containing i} m(T) / |T|``; cross-check path."""
    m = mobius_transform(g)
    masks = np.arange(1 << g.n, dtype=np.int64)
    sizes = popcounts(masks)
    share = np.divide(m, sizes, out=np.zeros_like(m), where=sizes > 0)
    return np.array([share[(masks >> i) & 1 == 1].sum() for i in range(g.n)])


def _check_pair(g: CooperativeGame, i: int, j: int):
    if g.n < 2:
        raise DomainError("interaction indices need at least two players")
    _check_player(g, i)
    _check_player(g, j)
    if i == j:
        raise DomainError("interaction index needs two distinct players")


def siv_grabisch(g: CooperativeGame, i: int, j: int) -> float:
    """Grabisch-Roubens pair interaction from second differences."""
    _check_pair(g, i, j)
    w = interaction_weight_table(g.n)
    v = g.values
    S = _without(g.n, i, j)
    bi, bj = 1 << i, 1 << j
    second = v[S | bi | bj] - v[S | bi] - v[S | bj] + v[S]
    return float(np.dot(w[popcounts(S)], second))


def siv_mobius(g: CooperativeGame, i: int, j: int, coef=None) -> float:
    """The same index as ``sum_{T >= {i, j}} m(T) / (|T| - 1)``."""
    _check_pair(g, i, j)
    m = mobius_transform(g) if coef is None else np.asarray(coef)
    masks = np.arange(1 << g.n, dtype=np.int64)
    both = masks[((masks >> i) & 1 == 1) & ((masks >> j) & 1 == 1)]
    return float(np.sum(m[both] / (popcounts(both) - 1)))


def siv_matrix(g: CooperativeGame, method: str = "grabisch") -> np.ndarray:
    """Symmetric matrix of pair interactions (zero diagonal)."""
    out = np.zeros((g.n, g.n))
    coef = mobius_transform(g) if method == "mobius" else None
    for i in range(g.n):
        for j in range(i + 1, g.n):
            val = siv_mobius(g, i, j, coef) if method == "mobius" else siv_grabisch(g, i, j)
            out[i, j] = out[j, i] = val
    return out


def _check_perm(sigma, n: int) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.int64).ravel()
    if sigma.size != n or sorted(sigma.tolist()) != list(range(n)):
        raise DomainError(f"not a permutation of {n} players: {sigma.tolist()}")
    return sigma


def _image_bits(bits, sigma) -> np.ndarray:
    # sigma(S) = {sigma(i) : i in S}
    bits = np.asarray(bits, dtype=np.int64)
    out = np.zeros_like(bits)
    for i, si in enumerate(sigma):
        out |= ((bits >> i) & 1) << int(si)
    return out


def relabel_game(g: CooperativeGame, sigma) -> CooperativeGame:
    """The game ``v2(S) = v(sigma^{-1}(S))``, i.e. player ``i`` renamed ``sigma[i]``."""
    sigma = _check_perm(sigma, g.n)
    masks = np.arange(1 << g.n, dtype=np.int64)
    out = np.empty_like(g.values)
    out[_image_bits(masks, sigma)] = g.values
    return CooperativeGame(g.n, out)


def kernel_weighted_shapley(g: CooperativeGame, pi) -> np.ndarray:
    """Unnormalised ``sum_S w(|S|) pi(S) [v(S | i) - v(S)]`` per player."""
    pi = np.asarray(pi, dtype=float)
    if pi.shape != g.values.shape:
        raise ConfigurationError("kernel values must cover every coalition")
    w = shapley_weight_table(g.n)
    v = g.values
    phi = np.empty(g.n)
    for i in range(g.n):
        S = _without(g.n, i)
        phi[i] = np.dot(w[popcounts(S)] * pi[S], v[S | 1 << i] - v[S])
    return phi


def incompatibility_coefficient(pi, T: Coalition, n: int) -> float:
    """Coefficient of ``v(T)`` in the kernel-weighted Shapley sum over players.

    ``c(T) = w(|T|-1) sum_{i in T} pi(T \\ i) - (n - |T|) w(|T|) pi(T)``;
    it vanishes for every ``T`` exactly when the kernel is constant on the
    relevant coalitions.
    """
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (1 << n,):
        raise ConfigurationError(f"need {1 << n} kernel values, got {pi.shape}")
    t = len(T)
    if T.n != n or t == 0 or t == n:
        raise DomainError("T must be a non-empty proper coalition")
    inner = math.fsum(pi[T.bits & ~(1 << i)] for i in T.members)
    return shapley_weight(t - 1, n) * inner - (n - t) * shapley_weight(t, n) * pi[T.bits]


def kernel_table(kernel, ep: EvalPoint) -> np.ndarray:
    """Kernel values on every coalition of ``ep``'s features."""
    _check_n(ep.dim)
    return kernel_weights(kernel, ep, np.arange(1 << ep.dim, dtype=np.uint64))
