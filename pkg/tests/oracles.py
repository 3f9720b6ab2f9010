"""Brute-force reference computations used only by the tests.

Everything here follows the textbook definition directly (nested loops,
explicit factorials, plain Romberg) and does not call into the library's
numerical code.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from gralis.errors import CapacityError, NumericalError

MAX_BRUTE = 12


@dataclass(frozen=True)
class OracleResult:
    value: object
    method: str
    cost: int


def _check(n):
    if n > MAX_BRUTE:
        raise CapacityError(f"brute-force oracles stop at n = {MAX_BRUTE}")


def _members(bits, n):
    return [j for j in range(n) if bits >> j & 1]


def brute_shapley(v, n) -> OracleResult:
    """Shapley values of ``v(bits)`` by the subset formula."""
    _check(n)
    calls = 0
    phi = []
    for i in range(n):
        total = 0.0
        for S in range(1 << n):
            if S >> i & 1:
                continue
            s = len(_members(S, n))
            w = math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n)
            total += w * (v(S | 1 << i) - v(S))
            calls += 2
        phi.append(total)
    return OracleResult(phi, "subset-sum", calls)


def brute_shapley_permutations(v, n) -> OracleResult:
    """Shapley values as the average marginal contribution over all orderings."""
    if n > 8:
        raise CapacityError("permutation oracle stops at n = 8")
    phi = [0.0] * n
    count = 0
    for order in itertools.permutations(range(n)):
        S = 0
        for i in order:
            phi[i] += v(S | 1 << i) - v(S)
            S |= 1 << i
        count += 1
    return OracleResult([p / count for p in phi], "permutation-average", 2 * n * count)


def brute_siv(v, n, i, j) -> OracleResult:
    """Pair interaction index from second differences and explicit weights."""
    _check(n)
    total = 0.0
    calls = 0
    for S in range(1 << n):
        if S >> i & 1 or S >> j & 1:
            continue
        s = len(_members(S, n))
        w = math.factorial(s) * math.factorial(n - s - 2) / math.factorial(n - 1)
        total += w * (v(S | 1 << i | 1 << j) - v(S | 1 << i) - v(S | 1 << j) + v(S))
        calls += 4
    return OracleResult(total, "second-difference", calls)


def brute_mobius(values, n) -> list:
    """Möbius coefficients by the alternating subset sum, O(3^n)."""
    out = []
    for T in range(1 << n):
        t = len(_members(T, n))
        acc = 0.0
        A = T
        while True:
            acc += (-1) ** (t - len(_members(A, n))) * values[A]
            if A == 0:
                break
            A = (A - 1) & T
        out.append(acc)
    return out


def high_precision_integral(g, tol=1e-12, max_level=22) -> OracleResult:
    """Romberg integration of ``g`` on [0, 1] until successive diagonal
    estimates differ by less than ``tol``."""
    h = 1.0
    rows = [[0.5 * (g(0.0) + g(1.0))]]
    calls = 2
    for level in range(1, max_level + 1):
        h /= 2
        mids = sum(g((2 * r - 1) * h) for r in range(1, 2 ** (level - 1) + 1))
        calls += 2 ** (level - 1)
        row = [0.5 * rows[-1][0] + h * mids]
        for c in range(1, level + 1):
            row.append(row[c - 1] + (row[c - 1] - rows[-1][c - 1]) / (4**c - 1))
        if abs(row[-1] - rows[-1][-1]) < tol and level >= 3:
            return OracleResult(row[-1], "romberg", calls)
        rows.append(row)
    raise NumericalError("Romberg integration did not converge", levels=max_level)


def telescoping_oracle(m, ep, perm, sequential=True) -> float:
    """Completeness gap of one ordering when each feature's IG is integrated
    along its own segment.

    Sequential: predecessors sit at ``x``, the feature moves alone.
    Simultaneous: predecessors and the feature all move from the baseline.
    """
    x = np.asarray(ep.x, float)
    xb = np.asarray(ep.x_base, float)
    n = x.size
    total = 0.0
    done = []
    for i in perm:
        def grad_i(alpha, i=i, done=tuple(done)):
            pt = xb.copy()
            if sequential:
                pt[list(done)] = x[list(done)]
                pt[i] = xb[i] + alpha * (x[i] - xb[i])
            else:
                idx = list(done) + [i]
                pt[idx] = xb[idx] + alpha * (x[idx] - xb[idx])
            return float(m.gradient(pt)[i])

        total += (x[i] - xb[i]) * high_precision_integral(grad_i).value
        done.append(i)
    assert len(done) == n
    return abs(total - (float(m(x)) - float(m(xb))))


def simplex_grid_minimum(sigmas2, step=1e-3):
    """Smallest ``sum lambda^2 sigma^2`` over a 3-simplex grid of spacing ``step``."""
    s = np.asarray(sigmas2, float)
    if s.size != 3:
        raise ValueError("grid oracle covers three layers")
    N = int(round(1 / step))
    a = np.arange(N + 1)[:, None]
    b = np.arange(N + 1)[None, :]
    ok = a + b <= N
    l1, l2 = (a * step) * ok, (b * step) * ok
    l3 = 1.0 - l1 - l2
    val = np.where(ok, l1**2 * s[0] + l2**2 * s[1] + l3**2 * s[2], np.inf)
    r, c = np.unravel_index(np.argmin(val), val.shape)
    return OracleResult((float(val[r, c]), (r * step, c * step, 1 - r * step - c * step)), "simplex-grid", int(ok.sum()))


def direct_first_order_sobol(f, axes) -> list:
    """``Var[E[F | x_i]] / Var[F]`` by explicit loops over a product grid."""
    pts = [a[0] for a in axes]
    probs = [a[1] for a in axes]
    n = len(axes)
    cells = list(itertools.product(*[range(len(p)) for p in pts]))

    def prob(c):
        return math.prod(probs[d][c[d]] for d in range(n))

    vals = {c: f([pts[d][c[d]] for d in range(n)]) for c in cells}
    mean = sum(prob(c) * vals[c] for c in cells)
    var = sum(prob(c) * (vals[c] - mean) ** 2 for c in cells)
    out = []
    for i in range(n):
        cond = {}
        for c in cells:
            cond[c[i]] = cond.get(c[i], 0.0) + prob(c) * vals[c] / probs[i][c[i]]
        out.append(sum(probs[i][a] * (cond[a] - mean) ** 2 for a in cond) / var)
    return out
