"""
Combining layers
================

Average attributions from several layers with weights that minimise the
variance of the blend.
"""

import numpy as np

from gralis import EvalPoint, LayerAttributions, McConfig, gralis_mc, ms_aggregate, optimal_weights, zoo_model
from gralis.multiscale import aggregate_variance, replicate_variance

point = EvalPoint([0.5, 1.0, 1.5], [0.0, 0.0, 0.0])
# two estimates of the same attribution, one cheap and one ten times dearer
models = [zoo_model("product", [3])] * 2
budgets = [40, 400]

phis, sig2 = [], []
for model, m in zip(models, budgets):
    phis.append(gralis_mc(model, point, McConfig(m=m, seed=0)).phi)
    var = replicate_variance(lambda s, model=model, m=m: gralis_mc(model, point, McConfig(m=m, seed=s)).phi, range(1, 31))
    sig2.append(float(var.mean()))

lam = optimal_weights(sig2)
print("layer variances:", np.round(sig2, 6), "weights:", np.round(lam, 3))
# the blend sums to 0.25, not 0.75: the default simultaneous path is not complete on a product
print("blend:", ms_aggregate(LayerAttributions(phis, sig2), lam))
print("blend variance", aggregate_variance(sig2, lam), "vs equal weights", aggregate_variance(sig2, [0.5, 0.5]))
