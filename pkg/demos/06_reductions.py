"""
Familiar methods as weighted sums
=================================

Shapley values, integrated gradients, weighted least-squares surrogates and
linearised class-activation maps all evaluate as a weight times a
contribution summed over an index set.
"""

import numpy as np

from gralis import (CooperativeGame, EvalPoint, FeatureMapStack, gradcam_lin, gradcam_triple, ig_triple,
                    integrated_gradients, lime_triple, reducibility_suite, relu_nonlinearity_witness, shap_triple,
                    triple_eval, zoo_model)
from gralis.reductions import lime_samples

model = zoo_model("ishigami-like", [7, 0.1])
point = EvalPoint([1.0, -0.5, 2.0], [0.2, 0.3, -0.1])

game = CooperativeGame.from_model(model, point)
print("shap  :", [round(triple_eval(shap_triple(game, i)), 6) for i in range(3)])
print("ig    :", [round(ig_triple(model, point, i, 32)[1], 6) for i in range(3)],
      "direct", np.round(integrated_gradients(model, point, 32, "right"), 6))

d, w, y = lime_samples(model, point, np.arange(8))
print("lime  :", [round(lime_triple(d, w, y, i)[1], 6) for i in range(3)])

rng = np.random.default_rng(0)
maps = FeatureMapStack(rng.normal(size=(4, 3, 3)), rng.normal(size=(4, 3, 3)))
print("cam   :", triple_eval(gradcam_triple(maps, 1, 1)), "direct", gradcam_lin(maps, 1, 1))
print("rectified map is not homogeneous:", relu_nonlinearity_witness(maps, -1.0))

# Limits in which the kernel-weighted attribution collapses onto each method
for name, row in reducibility_suite(zoo_model("product", [3]), EvalPoint([0.5, 1, 1.5], [0, 0, 0])).items():
    print(f"{name:<24} {row['status']:<8} {row.get('max_deviation', float('nan')):.1e}")
