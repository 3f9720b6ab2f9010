"""Acceptance criteria, one check per criterion.

Each check returns ``(passed, detail)``; the runtime budget is part of the
verdict. Run under pytest (lines appear in the terminal summary) or directly
with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gralis import (  # noqa: E402
    Coalition,
    CooperativeGame,
    DropCurve,
    EvalPoint,
    FeatureMapStack,
    Kernel,
    LayerAttributions,
    McConfig,
    PathMode,
    ProductMeasure,
    Projection,
    QuadratureRule,
    WeightedSignal,
    aggregate_variance,
    deletion_auc,
    gradcam_lin,
    gradcam_triple,
    gralis_exact,
    gralis_mc,
    hoeffding_decompose,
    ig_triple,
    incompatibility_coefficient,
    induce_game,
    integrated_gradients,
    inverse_mobius,
    kernel_weighted_shapley,
    lime_triple,
    mobius_transform,
    ms_aggregate,
    optimal_weights,
    orthogonality_check,
    p_rho_apply,
    push_forward,
    relabel_game,
    relu_nonlinearity_witness,
    run_convergence_sweep,
    shap_triple,
    shapley_values,
    siv_grabisch,
    siv_mobius,
    sobol_indices,
    triple_eval,
    zero_mean_residual,
    zoo_model,
)
from gralis.coalitions import shapley_weight_table  # noqa: E402
from gralis.games import kernel_table  # noqa: E402
from gralis.reductions import lime_coefficients, lin_homogeneity_defect  # noqa: E402
from oracles import brute_mobius, brute_shapley, brute_siv, direct_first_order_sobol, simplex_grid_minimum  # noqa: E402

RESULTS: list[str] = []

ZOO = {
    "linear": [0.5, 2, -1, 3],
    "product": [3],
    "multilinear": [3, 0.2, 1, -1, 2, 0.5, 0, 3, -1.5],
    "quadratic": [3, 1, 0.5, 0, 0.5, 2, -1, 0, -1, 1],
    "additive-interaction": [1, 1, 1],
    "ishigami-like": [7, 0.1],
}


def _point(dim):
    return EvalPoint(np.linspace(0.5, 1.5, dim), np.zeros(dim))


def c01():
    worst, worst_exact = 0.0, Fraction(0)
    for n in range(1, 13):
        worst = max(worst, abs(math.fsum(_counts(n)) - 1))
        exact = sum(Fraction(math.comb(n - 1, s) * math.factorial(s) * math.factorial(n - s - 1), math.factorial(n))
                    for s in range(n))
        worst_exact = max(worst_exact, abs(exact - 1))
    return worst <= 1e-12 and worst_exact == 0, f"max |sum w - 1| = {worst:.2e} (rational oracle exact)", 1e-12


def _counts(n):
    # each size-s coalition of the other n-1 features carries w(s)
    w = shapley_weight_table(n)
    return [math.comb(n - 1, s) * w[s] for s in range(n)]


def c02():
    m = zoo_model("linear", [1.0, 2.0, -3.0, 0.5, 4.0])
    ep = EvalPoint([1.0, -2.0, 0.5, 3.0], [0.5, 1.0, -1.0, 0.0])
    target = np.array([2.0, -3.0, 0.5, 4.0]) * (ep.x - ep.x_base)
    ex, mc = 0.0, 0.0
    for kern in (Kernel(), Kernel(0.5), Kernel(2.0)):
        for path in PathMode:
            for quad in (QuadratureRule("right", 3), QuadratureRule("mid", 10), QuadratureRule("gauss", 8)):
                ex = max(ex, np.max(np.abs(gralis_exact(m, ep, kern, quad, path).phi - target)))
                cfg = McConfig(m=64, seed=3, quad=quad, path=path, kernel=kern)
                mc = max(mc, np.max(np.abs(gralis_mc(m, ep, cfg).phi - target)))
    return ex <= 1e-12 and mc <= 1e-10, f"exact {ex:.2e} (tol 1e-12), mc {mc:.2e} (tol 1e-10)", "1e-12/1e-10"


def c03():
    out = run_convergence_sweep(zoo_model("product", [3]), _point(3), m_grid=(100, 1000, 10000), k_grid=(4,), n_seeds=50)
    s = out["slopes"]["m"]
    return abs(s + 0.5) <= 0.1, f"slope {s:+.3f} (target -0.5)", 0.1


def c04():
    m, ep = zoo_model("product", [3]), _point(3)
    right = run_convergence_sweep(m, ep, m_grid=(10,), n_seeds=1, quad=QuadratureRule("right", 10))["slopes"]["k_residual"]
    mid = run_convergence_sweep(m, ep, m_grid=(10,), n_seeds=1, quad=QuadratureRule("mid", 10))["slopes"]["k_residual"]
    ok = abs(right + 1) <= 0.1 and abs(mid + 2) <= 0.2
    return ok, f"right {right:+.3f} (-1 +/- 0.1), mid {mid:+.3f} (-2 +/- 0.2)", "0.1/0.2"


def c05():
    lines, ok = [], True
    for name, params in ZOO.items():
        m = zoo_model(name, params)
        ep = _point(m.dim)
        for kern in (Kernel(), Kernel(0.75)):
            plain = np.array([gralis_mc(m, ep, McConfig(m=20, seed=s, kernel=kern)).phi for s in range(200)])
            anti = np.array([gralis_mc(m, ep, McConfig(m=20, antithetic=True, seed=s, kernel=kern)).phi for s in range(200)])
            vp, va = plain.var(axis=0, ddof=1), anti.var(axis=0, ddof=1)
            good = bool(np.all(va <= vp + 1e-24))
            ok &= good
            if not good:
                lines.append(f"{name}/{kern}")
    return ok, "anti <= plain on all models and kernels" if ok else "worse on " + ",".join(lines), "<= (+1e-24 floor)"


def c06():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        v = rng.normal(size=256)
        v[0] = 0.0
        g = CooperativeGame(8, v)
        coef = mobius_transform(g)
        for i in range(8):
            for j in range(i + 1, 8):
                a, b = siv_grabisch(g, i, j), siv_mobius(g, i, j, coef)
                c = brute_siv(lambda S: v[S], 8, i, j).value
                worst = max(worst, abs(a - b), abs(a - c))
    return worst <= 1e-10, f"max route gap {worst:.2e}", 1e-10


def c07():
    rng = np.random.default_rng(7)
    worst = 0.0
    for t in range(100):
        v = rng.normal(size=1 << 12)
        g = CooperativeGame(12, v)
        coef = mobius_transform(g)
        worst = max(worst, float(np.max(np.abs(inverse_mobius(coef).values - v))))
        if t < 2:
            small = v[:256]
            worst = max(worst, float(np.max(np.abs(mobius_transform(CooperativeGame(8, small)) - brute_mobius(small, 8)))))
    return worst <= 1e-10, f"max roundtrip error {worst:.2e}", 1e-10


def c08():
    rng = np.random.default_rng(8)
    ok = True
    worst = 0.0
    for _ in range(100):
        n, q = int(rng.integers(1, 6)), int(rng.integers(1, 60))
        rho = Projection(n, rng.integers(0, 1 << n, size=q))
        mu = rng.uniform(0, 2, size=q)
        f = rng.normal(size=q)
        ok &= bool(np.all(p_rho_apply(np.abs(f), rho, mu) >= 0))
        ok &= np.abs(p_rho_apply(f, rho, mu)).sum() <= np.sum(np.abs(f) * mu) + 1e-12
        nu = np.bincount(rho.assign, weights=mu, minlength=1 << n)
        worst = max(worst, float(np.max(np.abs(p_rho_apply(np.ones(q), rho, mu) - nu))))
        worst = max(worst, float(np.max(np.abs(push_forward(rho, mu) - nu))))
    for _ in range(100):
        n, q = int(rng.integers(2, 6)), int(rng.integers(1, 60))
        rho = Projection(n, rng.integers(1, 1 << n, size=q))
        sig = WeightedSignal(rng.normal(size=q), rng.uniform(0, 2, size=q))
        sigma = rng.permutation(n)
        g = induce_game(sig, rho)
        moved = induce_game(sig, rho.relabel(sigma))
        worst = max(worst, float(np.max(np.abs(relabel_game(g, sigma).values - moved.values))))
        worst = max(worst, float(np.max(np.abs(shapley_values(moved)[sigma] - shapley_values(g)))))
    return ok and worst <= 1e-12, f"positivity/contraction {'hold' if ok else 'FAIL'}, identity gap {worst:.2e}", 1e-12


def c09():
    n = 4
    ep = EvalPoint([1.0, 0.5, -1.5, 2.0], [0.0, 0.0, 0.5, 0.0])
    pi = kernel_table(Kernel(0.9), ep)
    defect_gap, any_nonzero, uni = 0.0, False, 0.0
    for bits in range(1, (1 << n) - 1):
        T = Coalition(bits, n)
        v = np.zeros(1 << n)
        v[bits] = 1.0
        c = incompatibility_coefficient(pi, T, n)
        any_nonzero |= abs(c) > 1e-6
        defect = kernel_weighted_shapley(CooperativeGame(n, v), pi).sum() - (v[-1] - v[0])
        defect_gap = max(defect_gap, abs(defect - c))
        uni = max(uni, abs(incompatibility_coefficient(np.ones(1 << n), T, n)))
    ok = defect_gap <= 1e-12 and uni <= 1e-12 and any_nonzero
    return ok, f"defect-c gap {defect_gap:.2e}, uniform max|c| {uni:.2e}", 1e-12


def c10():
    mu = ProductMeasure.uniform([[-1, 1], [-1, 1]])
    m = zoo_model("additive-interaction", [1, 1, 1])
    d = hoeffding_decompose(m, mu)
    s = sobol_indices(d)
    zm, orth = zero_mean_residual(d, mu), orthogonality_check(d, mu)
    total = abs(math.fsum(s.values()) - 1)
    oracle = direct_first_order_sobol(lambda x: x[0] + x[1] + x[0] * x[1], [([-1, 1], [0.5, 0.5])] * 2)
    third = max(abs(s[T] - 1 / 3) for T in [(0,), (1,), (0, 1)])
    third = max(third, abs(s[(0,)] - oracle[0]), abs(s[(1,)] - oracle[1]))
    ok = zm <= 1e-10 and orth <= 1e-8 and total <= 1e-10 and third <= 1e-10
    return ok, f"zero-mean {zm:.1e}, orth {orth:.1e}, |sum S-1| {total:.1e}, |S-1/3| {third:.1e}", "1e-8/1e-10"


def c11():
    rng = np.random.default_rng(11)
    gap, cf, mv = -np.inf, 0.0, 0.0
    for _ in range(10):
        s2 = rng.uniform(0.1, 5, size=3)
        lam = optimal_weights(s2)
        best, _ = simplex_grid_minimum(s2).value
        gap = max(gap, aggregate_variance(s2, lam) - best)
        closed = (1 / s2) / np.sum(1 / s2)
        cf = max(cf, float(np.max(np.abs(lam - closed))))
        mv = max(mv, abs(aggregate_variance(s2, lam) - 1 / np.sum(1 / s2)))
        layers = LayerAttributions(rng.normal(size=(3, 4)), s2)
        cf = max(cf, float(np.max(np.abs(ms_aggregate(layers, lam) - closed @ layers.phi))))
    ok = gap <= 0 and cf <= 1e-10 and mv <= 1e-10
    return ok, f"var(lam*) - grid min {gap:+.2e}, closed-form gap {cf:.1e}, min-var gap {mv:.1e}", 1e-10


def c12():
    rng = np.random.default_rng(12)
    worst = {"shap": 0.0, "ig": 0.0, "lime": 0.0, "gradcam": 0.0}
    for _ in range(20):
        n = int(rng.integers(2, 7))
        v = rng.normal(size=1 << n)
        v[0] = 0.0
        g = CooperativeGame(n, v)
        ref = brute_shapley(lambda S: v[S], n).value
        worst["shap"] = max(worst["shap"], max(abs(triple_eval(shap_triple(g, i)) - ref[i]) for i in range(n)))

        coef = rng.normal(size=9)
        m = zoo_model("multilinear", [3] + coef[:8].tolist())
        ep = EvalPoint(rng.normal(size=3), rng.normal(size=3))
        k = int(rng.integers(1, 40))
        direct = integrated_gradients(m, ep, k, "right")
        for i in range(3):
            t, _ = ig_triple(m, ep, i, k)
            worst["ig"] = max(worst["ig"], abs(triple_eval(t) - direct[i]))

        T = int(rng.integers(n + 4, 40))
        d = rng.integers(0, 2, size=(T, n))
        while np.linalg.matrix_rank(np.hstack([np.ones((T, 1)), d])) < n + 1:
            d = rng.integers(0, 2, size=(T, n))
        w = rng.uniform(0.1, 2, size=T)
        y = rng.normal(size=T)
        beta = lime_coefficients(d, w, y)
        for i in range(n):
            t, _ = lime_triple(d, w, y, i)
            worst["lime"] = max(worst["lime"], abs(triple_eval(t) - beta[i]))

        K, H, W = rng.integers(1, 6, size=3)
        fm = FeatureMapStack(rng.normal(size=(K, H, W)), rng.normal(size=(K, H, W)))
        for p in range(H):
            for q in range(W):
                worst["gradcam"] = max(worst["gradcam"], abs(triple_eval(gradcam_triple(fm, p, q)) - gradcam_lin(fm, p, q)))
    ok = max(worst.values()) <= 1e-10
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()), 1e-10


def c13():
    rng = np.random.default_rng(13)
    fm = FeatureMapStack(rng.normal(size=(4, 5, 5)), rng.normal(size=(4, 5, 5)))
    detected = relu_nonlinearity_witness(fm, -1.0)
    defect = max(lin_homogeneity_defect(fm, lam) for lam in (-2.0, -1.0, -0.5, 0.5, 3.0))
    return bool(detected) and defect <= 1e-12, f"relu witness {'found' if detected else 'missing'}, lin defect {defect:.1e}", 1e-12


def c14():
    auc = deletion_auc(DropCurve([0, 1, 3, 5], [0, -0.003, 0.025, 0.027]))
    # hand trapezoid: (-0.0015 + 0.022 + 0.052) / 5
    hand = (0.5 * (0 - 0.003) + 0.5 * 2 * (-0.003 + 0.025) + 0.5 * 2 * (0.025 + 0.027)) / 5
    return abs(auc - 0.015) <= 0.005 and abs(auc - hand) <= 1e-15, f"DelAUC {auc:+.4f} (hand {hand:+.4f})", 0.005


CLI_RUNS = {
    "attribute": ["--model", "product", "--params", "3", "--mode", "mc", "--m", "400", "--antithetic"],
    "converge": ["--model", "product", "--params", "3", "--m-grid", "100,1000", "--k-grid", "4,8", "--seeds", "8"],
    "interactions": ["--from-attribution", "--model", "ishigami-like"],
    "anova": ["--model", "additive-interaction", "--grid=-1,1;-1,1"],
    "multiscale": ["--layers", "{layers}"],
    "reduce": ["--model", "ishigami-like", "--feature-maps", "{fmaps}"],
    "audit": [],
    "delauc": ["--curve", "0:0,1:-0.003,3:0.025,5:0.027"],
}


def c15(tmp: Path):
    import json

    from gralis.cli import main

    (tmp / "layers.json").write_text(json.dumps({"layers": [{"phi": [1, 0], "var": 1.0}, {"phi": [0, 1], "var": 4.0}]}))
    (tmp / "fm.json").write_text(json.dumps({"K": 1, "H": 2, "W": 2, "A": [1, -2, 3, 4], "G": [1, 1, 1, 1]}))
    bad = []
    for cmd, args in CLI_RUNS.items():
        args = [a.format(layers=tmp / "layers.json", fmaps=tmp / "fm.json") for a in args]
        blobs = []
        for w in (1, 2, 8):
            d = tmp / f"{cmd}-{w}"
            d.mkdir()
            code = main([cmd, *args, "--seed", "21", "--workers", str(w), "--out", str(d / "r.json")])
            blobs.append((code, {p.name: p.read_bytes() for p in sorted(d.iterdir())}))
        if blobs[0][0] != 0 or any(b != blobs[0] for b in blobs[1:]):
            bad.append(cmd)
    return not bad, "all 8 subcommands identical" if not bad else "differs: " + ",".join(bad), "byte-identical"


CRITERIA = [
    (1, "shapley weights sum to one, n=1..12", c01, 1.0),
    (2, "linear model exactness", c02, 1.0),
    (3, "MC rmse slope vs m", c03, 120.0),
    (4, "quadrature order slopes", c04, 30.0),
    (5, "antithetic variance <= plain", c05, 120.0),
    (6, "SIV three-route cross-check", c06, 30.0),
    (7, "Mobius roundtrip n=12", c07, 10.0),
    (8, "projection contract and relabel identity", c08, 10.0),
    (9, "kernel completeness-defect witness", c09, 1.0),
    (10, "ANOVA decomposition and Sobol indices", c10, 5.0),
    (11, "multiscale optimal weights", c11, 30.0),
    (12, "canonical triples match direct methods", c12, 10.0),
    (13, "ReLU witness and linear homogeneity", c13, 1.0),
    (14, "deletion AUC on the reference curve", c14, 1.0),
    (15, "CLI determinism across 1/2/8 workers", c15, 60.0),
]


def run_criterion(no, title, fn, limit, tmp=None):
    t0 = time.perf_counter()
    ok, detail, tol = fn(tmp) if no == 15 else fn()
    dt = time.perf_counter() - t0
    ok = ok and dt < limit
    line = f"AC{no:02d} {'PASS' if ok else 'FAIL'}  {title}: {detail}; tol {tol}; {dt:.2f}s (limit {limit:g}s)"
    RESULTS.append(line)
    print(line)
    return ok, line


@pytest.mark.parametrize("no,title,fn,limit", CRITERIA, ids=[f"AC{c[0]:02d}" for c in CRITERIA])
def test_acceptance(no, title, fn, limit, tmp_path):
    ok, line = run_criterion(no, title, fn, limit, tmp_path)
    assert ok, line


if __name__ == "__main__":
    import tempfile

    failed = 0
    with tempfile.TemporaryDirectory() as d:
        for no, title, fn, limit in CRITERIA:
            failed += not run_criterion(no, title, fn, limit, Path(d))[0]
    sys.exit(1 if failed else 0)
