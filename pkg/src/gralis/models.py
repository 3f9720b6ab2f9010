"""Black-box models, evaluation points and the analytic model zoo.

Every model function is vectorised over leading axes: it maps an array of
shape ``(..., n)`` to ``(...)`` and its gradient maps ``(..., n)`` to
``(..., n)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, NumericalError

DEFAULT_STEP = 1e-5

ArrayFn = Callable[[np.ndarray], np.ndarray]
ReferenceFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EvalPoint:
    """Input ``x`` together with its baseline ``x_base``."""

    x: np.ndarray
    x_base: np.ndarray

    def __post_init__(self):
        x = _frozen(np.atleast_1d(self.x))
        xb = _frozen(np.atleast_1d(self.x_base))
        if x.ndim != 1 or x.shape != xb.shape:
            raise ConfigurationError(
                f"x and x_base must be 1-d of equal length, got {x.shape} and {xb.shape}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "x_base", xb)

    @property
    def dim(self) -> int:
        return self.x.shape[0]

    @property
    def gap(self) -> np.ndarray:
        return self.x - self.x_base


@dataclass(frozen=True, eq=False)
class Model:
    """A scalar model on R^n with an optional analytic gradient.

    ``reference`` optionally returns closed-form Shapley values of the game
    ``S -> f(x_S)`` for a given ``(x, x_base)``; ``affine`` marks models whose
    gradient is constant.
    """

    dim: int
    fn: ArrayFn
    grad_fn: Optional[ArrayFn] = None
    label: str = "model"
    reference: Optional[ReferenceFn] = None
    affine: bool = False
    params: tuple = field(default=())

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise ConfigurationError(
                f"{self.label}: expected trailing dimension {self.dim}, got shape {x.shape}"
            )
        return x

    def __call__(self, x) -> np.ndarray:
        return self.fn(self._check(x))

    @property
    def has_grad(self) -> bool:
        return self.grad_fn is not None

    def gradient(self, x, h: float = DEFAULT_STEP) -> np.ndarray:
        """Analytic gradient when available, central differences otherwise."""
        x = self._check(x)
        if self.grad_fn is not None:
            return self.grad_fn(x)
        return finite_diff_grad(self, x, h)


def finite_diff_grad(m: Model, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference gradient ``(f(x + h e_i) - f(x - h e_i)) / 2h``.

    Vectorised over leading axes of ``x``.
    """
    if not h > 0:
        raise DomainError(f"step size must be positive, got {h}")
    x = m._check(x)
    step = h * np.eye(m.dim)
    fp = m.fn(x[..., None, :] + step)
    fm = m.fn(x[..., None, :] - step)
    bad = ~(np.isfinite(fp) & np.isfinite(fm))
    if bad.any():
        idx = np.argwhere(bad)[0]
        raise NumericalError(
            f"{m.label}: non-finite evaluation at feature {int(idx[-1])}",
            index=int(idx[-1]),
        )
    return (fp - fm) / (2.0 * h)


def combine(a: float, f: Model, b: float, g: Model) -> Model:
    """The model ``a*f + b*g`` (gradient kept only if both have one)."""
    if f.dim != g.dim:
        raise ConfigurationError("models must share a dimension")
    grad = None
    if f.has_grad and g.has_grad:
        grad = lambda x: a * f.grad_fn(x) + b * g.grad_fn(x)  # noqa: E731
    return Model(
        dim=f.dim,
        fn=lambda x: a * f.fn(x) + b * g.fn(x),
        grad_fn=grad,
        label=f"{a}*{f.label}+{b}*{g.label}",
        affine=f.affine and g.affine,
    )


# --------------------------------------------------------------------------
# multilinear helpers (shared by several zoo entries)


def _multilinear_shapley(coef: np.ndarray, n: int) -> ReferenceFn:
    # Expanding prod_{j in T} (x'_j + [j in S] d_j) gives the unanimity
    # coefficients m(U) = sum_{T >= U} c_T prod_U d_j prod_{T \ U} x'_j and
    # phi_i = sum_{U containing i} m(U) / |U|.
    def ref(x, x_base):
        x = np.asarray(x, float)
        xb = np.asarray(x_base, float)
        d = x - xb
        phi = np.zeros(n)
        for t in range(1 << n):
            if coef[t] == 0.0:
                continue
            members = [j for j in range(n) if t >> j & 1]
            for r in range(1, len(members) + 1):
                for sub in itertools.combinations(members, r):
                    rest = [j for j in members if j not in sub]
                    val = coef[t] * np.prod(d[list(sub)]) * np.prod(xb[rest])
                    for i in sub:
                        phi[i] += val / r
        return phi

    return ref


def _multilinear(n: int, coef: Sequence[float], label: str, params) -> Model:
    coef = _frozen(coef)
    if coef.shape != (1 << n,):
        raise ConfigurationError(f"{label}: need 2^{n} coefficients, got {coef.size}")
    masks = [[j for j in range(n) if t >> j & 1] for t in range(1 << n)]

    def fn(x):
        out = np.zeros(x.shape[:-1])
        for t, members in enumerate(masks):
            if coef[t] != 0.0:
                out = out + coef[t] * np.prod(x[..., members], axis=-1)
        return out

    def grad(x):
        g = np.zeros(x.shape)
        for t, members in enumerate(masks):
            if coef[t] == 0.0:
                continue
            for i in members:
                rest = [j for j in members if j != i]
                g[..., i] += coef[t] * np.prod(x[..., rest], axis=-1)
        return g

    affine = all(coef[t] == 0.0 for t in range(1 << n) if len(masks[t]) > 1)
    return Model(n, fn, grad, label, _multilinear_shapley(coef, n), affine, tuple(params))


# --------------------------------------------------------------------------
# zoo builders


def _linear(params):
    p = list(params) or [1.0, 2.0, 3.0]
    if len(p) < 2:
        raise ConfigurationError("linear: params are (a, b_1, ..., b_n) with n >= 1")
    a, b = float(p[0]), _frozen(p[1:])
    n = b.size
    return Model(
        n,
        fn=lambda x: a + x @ b,
        grad_fn=lambda x: np.broadcast_to(b, x.shape).copy(),
        label="linear",
        reference=lambda x, xb: b * (np.asarray(x, float) - np.asarray(xb, float)),
        affine=True,
        params=tuple(p),
    )


def _product(params):
    p = list(params) or [2]
    n = int(p[0])
    if n < 1 or n > 12:
        raise ConfigurationError("product: n must be in 1..12")
    coef = np.zeros(1 << n)
    coef[-1] = 1.0
    return _multilinear(n, coef, "product", p)


def _multilinear_model(params):
    p = list(params) or [2, 0.0, 1.0, 1.0, 1.0]
    n = int(p[0])
    if n < 1 or n > 12:
        raise ConfigurationError("multilinear: n must be in 1..12")
    return _multilinear(n, p[1:], "multilinear", p)


def _additive_interaction(params):
    p = list(params) or [1.0, 1.0, 1.0]
    if len(p) != 3:
        raise ConfigurationError("additive-interaction: params are (a, b, c)")
    a, b, c = map(float, p)
    return _multilinear(2, [0.0, a, b, c], "additive-interaction", p)


def _quadratic(params):
    p = list(params) or [1, 1.0]
    n = int(p[0])
    A = np.array(p[1:], dtype=float)
    if n < 1 or A.size != n * n:
        raise ConfigurationError(f"quadratic: need n followed by n*n={n * n} matrix entries")
    A = _frozen(A.reshape(n, n))
    sym = _frozen(A + A.T)
    return Model(
        n,
        fn=lambda x: np.einsum("...i,ij,...j->...", x, A, x),
        grad_fn=lambda x: x @ sym.T,
        label="quadratic",
        params=tuple(p),
    )


def _ishigami(params):
    p = list(params) or [7.0, 0.1]
    if len(p) != 2:
        raise ConfigurationError("ishigami-like: params are (a, b)")
    a, b = map(float, p)

    def fn(x):
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        return np.sin(x1) + a * np.sin(x2) ** 2 + b * x3**4 * np.sin(x1)

    def grad(x):
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        return np.stack(
            [
                np.cos(x1) * (1.0 + b * x3**4),
                2.0 * a * np.sin(x2) * np.cos(x2),
                4.0 * b * x3**3 * np.sin(x1),
            ],
            axis=-1,
        )

    return Model(3, fn, grad, "ishigami-like", params=tuple(p))


ZOO = {
    "linear": _linear,
    "product": _product,
    "multilinear": _multilinear_model,
    "quadratic": _quadratic,
    "additive-interaction": _additive_interaction,
    "ishigami-like": _ishigami,
}


def zoo_model(name: str, params: Sequence[float] = ()) -> Model:
    """Build a zoo model by name.

    ``params`` per model (empty selects the defaults shown):

    ========================  =============================================
    linear                    a, b_1..b_n            f = a + b.x   (1, 2, 3)
    product                   n                      f = prod x_j  (2)
    multilinear               n, c_0..c_{2^n-1}      f = sum_T c_T prod_T x_j
    quadratic                 n, A (row-major n*n)   f = x^T A x   (1, 1)
    additive-interaction      a, b, c                f = a x1 + b x2 + c x1 x2
    ishigami-like             a, b                   sin x1 + a sin^2 x2 + b x3^4 sin x1
    ========================  =============================================
    """
    try:
        builder = ZOO[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown model {name!r}; choose from {sorted(ZOO)}"
        ) from None
    return builder(params)
