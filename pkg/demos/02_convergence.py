"""
Convergence rates
=================

Sampling error shrinks like m^(-1/2); the path-integral error shrinks at the
order of the quadrature rule.
"""

from gralis import EvalPoint, QuadratureRule, run_convergence_sweep, zoo_model

model = zoo_model("product", [3])
point = EvalPoint([0.5, 1.0, 1.5], [0.0, 0.0, 0.0])

out = run_convergence_sweep(model, point, m_grid=(100, 1000, 10000), n_seeds=20)
for row in out["rows"]:
    if row["sweep"] == "m":
        print(f"m={row['m']:>6}  rmse={row['rmse']:.2e}")
print("fitted m slope:", round(out["slopes"]["m"], 3))

for kind in ("right", "mid", "gauss"):
    out = run_convergence_sweep(model, point, m_grid=(10,), n_seeds=1, k_grid=(2, 4, 8, 16),
                                quad=QuadratureRule(kind, 10))
    slope = out["slopes"]["k_residual"]
    # Gauss-Legendre integrates this cubic path exactly, so there is no slope to fit
    print(f"{kind:>5}:", "exact at every k" if slope is None else f"full-coalition residual slope {slope:+.2f}")
