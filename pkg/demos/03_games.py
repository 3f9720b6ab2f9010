"""
Coalition games and pairwise interactions
=========================================

Turn a signal over an index set into a set function, then read off Möbius
coefficients and pair interactions two independent ways.
"""

import numpy as np

from gralis import (CooperativeGame, EvalPoint, Projection, WeightedSignal, induce_game, mobius_transform,
                    shapley_values, siv_matrix, zoo_model)

# Six indices mapped onto coalitions of three players
rho = Projection(3, [0b001, 0b010, 0b011, 0b011, 0b111, 0b100])
game = induce_game(WeightedSignal([1.0, 2.0, 0.5, 0.5, 3.0, -1.0]), rho)
print("v on the subset lattice:", game.values)
print("Möbius coefficients:   ", mobius_transform(game))
print("Shapley values:         ", shapley_values(game))

# The two interaction routes agree to rounding.
print(siv_matrix(game, "grabisch") - siv_matrix(game, "mobius"))

# The same machinery on the game a model induces at one point
model = zoo_model("ishigami-like", [7, 0.1])
g = CooperativeGame.from_model(model, EvalPoint([1.0, -0.5, 2.0], [0.0, 0.0, 0.0]))
print("model game interactions:\n", np.round(siv_matrix(g), 4))
