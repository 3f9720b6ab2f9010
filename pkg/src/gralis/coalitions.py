"""Coalitions as bitmasks, Shapley-type weights, masking, kernels and
counter-based permutation sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import CapacityError, ConfigurationError, DomainError
from .models import EvalPoint

MAX_FEATURES = 64
MAX_EXACT = 20
_EXACT_FACTORIAL_MAX = 18


def popcount(bits: int) -> int:
    return int(bits).bit_count()


def popcounts(bits: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(bits, dtype=np.uint64)).astype(np.int64)


@dataclass(frozen=True)
class Coalition:
    """A subset of ``{0, ..., n-1}`` stored as a bitmask."""

    bits: int
    n: int

    def __post_init__(self):
        if not 0 <= self.n <= MAX_FEATURES:
            raise CapacityError(f"at most {MAX_FEATURES} features are supported, got {self.n}")
        if self.bits < 0 or self.bits >> self.n:
            raise DomainError(f"bitmask {self.bits:#x} has bits outside universe of size {self.n}")

    @classmethod
    def from_members(cls, members: Iterable[int], n: int) -> "Coalition":
        bits = 0
        for j in members:
            if not 0 <= j < n:
                raise DomainError(f"feature {j} outside universe of size {n}")
            bits |= 1 << j
        return cls(bits, n)

    @classmethod
    def empty(cls, n: int) -> "Coalition":
        return cls(0, n)

    @classmethod
    def full(cls, n: int) -> "Coalition":
        return cls((1 << n) - 1, n)

    @property
    def members(self) -> tuple:
        return tuple(j for j in range(self.n) if self.bits >> j & 1)

    def __len__(self) -> int:
        return popcount(self.bits)

    def __contains__(self, j: int) -> bool:
        return bool(self.bits >> j & 1)

    def __iter__(self):
        return iter(self.members)

    def with_feature(self, j: int) -> "Coalition":
        return Coalition(self.bits | 1 << j, self.n)

    def without_feature(self, j: int) -> "Coalition":
        return Coalition(self.bits & ~(1 << j), self.n)

    def complement(self) -> "Coalition":
        return Coalition(((1 << self.n) - 1) ^ self.bits, self.n)


def bits_to_mask(bits, n: int) -> np.ndarray:
    """Boolean membership matrix of shape ``(len(bits), n)``."""
    b = np.asarray(bits, dtype=np.uint64).reshape(-1, 1)
    return ((b >> np.arange(n, dtype=np.uint64)) & np.uint64(1)).astype(bool)


def shapley_weight(s_size: int, n: int) -> float:
    """``|S|! (n-|S|-1)! / n!``, the probability that exactly the coalition
    ``S`` precedes a fixed player in a uniform random ordering."""
    if not 0 <= s_size <= n - 1:
        raise DomainError(f"shapley_weight needs 0 <= |S| <= n-1, got |S|={s_size}, n={n}")
    if n <= _EXACT_FACTORIAL_MAX:
        return math.factorial(s_size) * math.factorial(n - s_size - 1) / math.factorial(n)
    return math.exp(math.lgamma(s_size + 1) + math.lgamma(n - s_size) - math.lgamma(n + 1))


def interaction_weight(s_size: int, n: int) -> float:
    """Grabisch-Roubens pair weight ``|S|! (n-|S|-2)! / (n-1)!``."""
    if n < 2 or not 0 <= s_size <= n - 2:
        raise DomainError(f"interaction_weight needs n >= 2 and 0 <= |S| <= n-2, got {s_size}, {n}")
    if n <= _EXACT_FACTORIAL_MAX:
        return math.factorial(s_size) * math.factorial(n - s_size - 2) / math.factorial(n - 1)
    return math.exp(math.lgamma(s_size + 1) + math.lgamma(n - s_size - 1) - math.lgamma(n))


def shapley_weight_table(n: int) -> np.ndarray:
    return np.array([shapley_weight(s, n) for s in range(n)])


def interaction_weight_table(n: int) -> np.ndarray:
    return np.array([interaction_weight(s, n) for s in range(n - 1)])


def _check_universe(ep: EvalPoint, S: Coalition):
    if S.n != ep.dim:
        raise ConfigurationError(f"coalition universe {S.n} does not match dimension {ep.dim}")


def mask_point(ep: EvalPoint, S: Coalition) -> np.ndarray:
    """``x_j`` for ``j`` in ``S`` and ``x'_j`` elsewhere."""
    _check_universe(ep, S)
    return np.where(bits_to_mask([S.bits], ep.dim)[0], ep.x, ep.x_base)


def mask_points(ep: EvalPoint, bits) -> np.ndarray:
    return np.where(bits_to_mask(bits, ep.dim), ep.x, ep.x_base)


@dataclass(frozen=True)
class Kernel:
    """Gaussian proximity kernel on coalitions; ``sigma=None`` is uniform."""

    sigma: Optional[float] = None

    def __post_init__(self):
        s = self.sigma
        if s is not None:
            if math.isinf(s):
                object.__setattr__(self, "sigma", None)
            elif not s > 0:
                raise DomainError(f"kernel bandwidth must be positive, got {s}")

    @classmethod
    def uniform(cls) -> "Kernel":
        return cls(None)

    @classmethod
    def parse(cls, spec) -> "Kernel":
        if spec is None or (isinstance(spec, str) and spec.strip().lower() in ("uniform", "inf")):
            return cls(None)
        try:
            return cls(float(spec))
        except (TypeError, ValueError):
            raise ConfigurationError(f"kernel must be 'uniform' or a positive float, got {spec!r}") from None

    @property
    def is_uniform(self) -> bool:
        return self.sigma is None

    def __str__(self) -> str:
        return "uniform" if self.sigma is None else repr(float(self.sigma))


def kernel_weight(k: Kernel, ep: EvalPoint, S: Coalition) -> float:
    """``exp(-sum_{j in S} (x_j - x'_j)^2 / 2 sigma^2)``; exactly 1 when uniform."""
    _check_universe(ep, S)
    return float(kernel_weights(k, ep, [S.bits])[0])


def kernel_weights(k: Kernel, ep: EvalPoint, bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint64)
    if k.is_uniform:
        return np.ones(bits.shape)
    sq = bits_to_mask(bits, ep.dim) @ (ep.gap**2)
    return np.exp(-sq / (2.0 * k.sigma**2)).reshape(bits.shape)


# --------------------------------------------------------------------------
# permutations

_TWO53 = 2.0**-53


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 1 << 128:
        raise DomainError(f"seed must be a non-negative integer below 2**128, got {seed}")
    return seed


def sample_permutations(seed: int, t_start: int, count: int, n: int) -> np.ndarray:
    """Permutations for indices ``t_start .. t_start+count-1`` as rows.

    Row ``t`` depends only on ``(seed, t)``: each index owns the Philox
    counter block ``(0, t, 0, 0)`` under key ``seed`` and its ``n-1`` raw
    words drive a Fisher-Yates shuffle.
    """
    seed = _check_seed(seed)
    if n < 1:
        raise DomainError("n must be >= 1")
    if n > MAX_FEATURES:
        raise CapacityError(f"at most {MAX_FEATURES} features are supported")
    perms = np.tile(np.arange(n, dtype=np.int64), (count, 1))
    if n == 1 or count == 0:
        return perms
    bg = np.random.Philox(key=seed)
    state = bg.state
    raw = np.empty((count, n - 1), dtype=np.uint64)
    for r in range(count):
        state["state"]["counter"][:] = (0, t_start + r, 0, 0)
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        bg.state = state
        raw[r] = bg.random_raw(n - 1)
    u = (raw >> np.uint64(11)).astype(np.float64) * _TWO53
    rows = np.arange(count)
    for col, j in enumerate(range(n - 1, 0, -1)):
        r = np.minimum((u[:, col] * (j + 1)).astype(np.int64), j)
        tmp = perms[rows, j].copy()
        perms[rows, j] = perms[rows, r]
        perms[rows, r] = tmp
    return perms


def sample_permutation(seed: int, t: int, n: int) -> np.ndarray:
    """Uniform random ordering of ``0..n-1``, a pure function of ``(seed, t)``."""
    if t < 0:
        raise DomainError("permutation index must be non-negative")
    return sample_permutations(seed, t, 1, n)[0]


def reverse_permutation(p) -> np.ndarray:
    p = np.asarray(p)
    if sorted(p.tolist()) != list(range(p.size)):
        raise DomainError(f"not a permutation: {p.tolist()}")
    return p[::-1].copy()


def predecessor_bits(perms: np.ndarray) -> np.ndarray:
    """For each row ``p`` and position ``r``, the bitmask of ``p[:r]``.

    Returned in feature order: ``out[t, i]`` is the set preceding feature ``i``.
    """
    perms = np.asarray(perms, dtype=np.int64)
    onehot = np.left_shift(np.uint64(1), perms.astype(np.uint64))
    incl = np.bitwise_or.accumulate(onehot, axis=1)
    before = np.zeros_like(incl)
    before[:, 1:] = incl[:, :-1]
    out = np.empty_like(before)
    np.put_along_axis(out, perms, before, axis=1)
    return out
