"""Self-checks for the brute-force references, against hand-derived values."""

import math

import numpy as np
import pytest

from gralis import EvalPoint, zoo_model
from gralis.errors import CapacityError, NumericalError
from oracles import (
    brute_mobius,
    brute_shapley,
    brute_shapley_permutations,
    brute_siv,
    direct_first_order_sobol,
    high_precision_integral,
    simplex_grid_minimum,
    telescoping_oracle,
)


def sq(b):
    return bin(b).count("1") ** 2


def test_romberg_closed_forms():
    assert high_precision_integral(lambda a: a).value == pytest.approx(0.5, abs=1e-14)
    assert high_precision_integral(lambda a: 3.0).value == pytest.approx(3.0, abs=1e-14)
    assert high_precision_integral(lambda a: a * a).value == pytest.approx(1 / 3, abs=1e-13)
    assert high_precision_integral(math.exp).value == pytest.approx(math.e - 1, abs=1e-12)


def test_romberg_gives_up():
    with pytest.raises(NumericalError):
        high_precision_integral(lambda a: math.sin(1 / (a + 1e-9)), max_level=6)


@pytest.mark.parametrize(
    "name,params",
    [("product", [3]), ("additive-interaction", [1, -2, 0.5]), ("ishigami-like", [7, 0.1]),
     ("quadratic", [2, 1, 0.5, -0.5, 2])],
)
def test_sequential_path_telescopes(name, params):
    m = zoo_model(name, params)
    ep = EvalPoint(np.linspace(0.5, 1.5, m.dim), np.linspace(-0.3, 0.2, m.dim))
    assert telescoping_oracle(m, ep, list(range(m.dim))[::-1]) <= 1e-10


def test_simultaneous_path_gap_on_product():
    # x1 x2 from 0 to (1, 1): first feature alone contributes 0, second gets 1/2
    m = zoo_model("product", [2])
    gap = telescoping_oracle(m, EvalPoint([1, 1], [0, 0]), [0, 1], sequential=False)
    assert gap == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("sequential", [True, False])
def test_linear_telescopes_on_either_path(sequential):
    m = zoo_model("linear", [1, 2, -3, 0.5])
    ep = EvalPoint([1.0, 2.0, -1.0], [0.5, 0.0, 1.0])
    assert telescoping_oracle(m, ep, [2, 0, 1], sequential) <= 1e-12


def test_shapley_oracles_agree():
    assert brute_shapley(sq, 3).value == pytest.approx([3, 3, 3])
    assert brute_shapley_permutations(sq, 3).value == pytest.approx([3, 3, 3])
    with pytest.raises(CapacityError):
        brute_shapley(sq, 13)


def test_siv_and_mobius_by_hand():
    assert brute_siv(sq, 3, 0, 1).value == pytest.approx(2.0)
    coef = brute_mobius([sq(b) for b in range(8)], 3)
    assert coef == pytest.approx([0, 1, 1, 2, 1, 2, 2, 0])


def test_grid_oracle():
    best, arg = simplex_grid_minimum([1.0, 1.0, 1.0]).value
    assert best == pytest.approx(1 / 3, abs=1e-5)
    assert max(abs(a - 1 / 3) for a in arg) <= 1e-3


def test_sobol_loop_oracle():
    s = direct_first_order_sobol(lambda x: x[0] + x[1] + x[0] * x[1], [([-1, 1], [0.5, 0.5])] * 2)
    assert s == pytest.approx([1 / 3, 1 / 3])
