"""Run configuration, command dispatch and report files.

A report is the merged :class:`RunConfig` plus the command's results, dumped
as JSON with sorted keys. Tabular results also go to CSV files next to it.
Nothing time- or host-dependent is written, so a rerun of the same config
reproduces the report byte for byte.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ._version import __version__
from .anova import ProductMeasure, gralis_sobol_bridge, hoeffding_decompose, orthogonality_check, sobol_indices
from .anova import total_indices, zero_mean_residual
from .audit import DEFAULT_THRESHOLDS, DropCurve, axiomatic_audit, deletion_auc, run_convergence_sweep
from .coalitions import Kernel
from .engine import McConfig, gralis_exact, gralis_mc
from .errors import ConfigurationError, WitnessUnavailableError
from .games import CooperativeGame, shapley_values, siv_grabisch, siv_mobius
from .models import EvalPoint, zoo_model
from .multiscale import LayerAttributions, aggregate_variance, kkt_residual, min_variance, ms_aggregate
from .multiscale import optimal_weights
from .paths import PathMode, QuadratureRule
from .reductions import (
    FeatureMapStack,
    gradcam_lin_map,
    gradcam_triple,
    gradcam_lin,
    ig_triple,
    integrated_gradients,
    lime_samples,
    lime_triple,
    lin_homogeneity_defect,
    reducibility_suite,
    relu_homogeneity_defect,
    shap_permutation_triple,
    shap_triple,
    triple_eval,
)

COMMANDS = ("attribute", "converge", "interactions", "anova", "multiscale", "reduce", "audit", "delauc")


@dataclass
class RunConfig:
    """Everything a command needs. File inputs are stored inline so a report
    carries all the data required to rerun it."""

    command: str = "attribute"
    model: str = "linear"
    params: list = field(default_factory=list)
    x: Optional[list] = None
    baseline: Optional[list] = None
    mode: str = "exact"
    m: int = 1000
    k: int = 10
    quad: str = "mid"
    path: str = "simultaneous"
    sigma: object = "uniform"
    norm: str = "feature"
    seed: int = 0
    antithetic: bool = False
    m_grid: list = field(default_factory=lambda: [100, 1000, 10000])
    k_grid: list = field(default_factory=lambda: [2, 4, 8, 16, 32])
    seeds: int = 50
    pairs: str = "all"
    game: Optional[dict] = None
    grid: Optional[list] = None
    layers: Optional[dict] = None
    lambdas: Optional[list] = None
    feature_maps: Optional[dict] = None
    curve: Optional[dict] = None
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        clean = {k.replace("-", "_"): v for k, v in data.items()}
        unknown = sorted(set(clean) - names)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**clean)

    def kernel(self) -> Kernel:
        return Kernel.parse(self.sigma)

    def quadrature(self, k: Optional[int] = None) -> QuadratureRule:
        return QuadratureRule(self.quad, self.k if k is None else k)

    def build_model(self):
        return zoo_model(self.model, self.params)

    def point(self, dim: int) -> EvalPoint:
        x = np.ones(dim) if self.x is None else self.x
        base = np.zeros(dim) if self.baseline is None else self.baseline
        return EvalPoint(x, base)


# -- commands ---------------------------------------------------------------------


def _attribute(cfg: RunConfig, workers: int) -> dict:
    m = cfg.build_model()
    ep = cfg.point(m.dim)
    if cfg.mode not in ("exact", "mc"):
        raise ConfigurationError(f"mode must be exact or mc, got {cfg.mode!r}")

    def run(path):
        if cfg.mode == "exact":
            return gralis_exact(m, ep, cfg.kernel(), cfg.quadrature(), path, workers)
        mc = McConfig(cfg.m, cfg.antithetic, cfg.norm, cfg.seed, cfg.quadrature(), path, cfg.kernel())
        return gralis_mc(m, ep, mc, workers)

    chosen = PathMode.parse(cfg.path)
    res = run(chosen)
    out = res.to_dict()
    # completeness under both path readings, everything else held fixed
    out["path_residuals"] = {
        p.value: float(res.completeness_residual if p is chosen else run(p).completeness_residual) for p in PathMode
    }
    return out


def _converge(cfg: RunConfig, workers: int):
    m = cfg.build_model()
    out = run_convergence_sweep(
        m, cfg.point(m.dim), cfg.m_grid, cfg.k_grid, cfg.seeds, cfg.seed, cfg.quadrature(), cfg.path,
        cfg.kernel(), workers,
    )
    return {"slopes": out["slopes"]}, {"convergence": out["rows"]}


def _parse_pairs(spec: str, n: int) -> list:
    if spec == "all":
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    try:
        i, j = (int(v) for v in spec.split(","))
    except ValueError:
        raise ConfigurationError(f"pairs must be 'all' or 'i,j', got {spec!r}") from None
    return [(i, j)]


def _interactions(cfg: RunConfig, workers: int) -> dict:
    if cfg.game is not None:
        try:
            g = CooperativeGame(int(cfg.game["n"]), cfg.game["values"])
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"game needs 'n' and 'values': {exc}") from None
    else:
        m = cfg.build_model()
        g = CooperativeGame.from_model(m, cfg.point(m.dim))
    rows = [
        {"i": i, "j": j, "grabisch": siv_grabisch(g, i, j), "mobius": siv_mobius(g, i, j)}
        for i, j in _parse_pairs(cfg.pairs, g.n)
    ]
    return {"n": g.n, "grounded": g.grounded, "shapley": [float(v) for v in shapley_values(g)], "siv": rows}


def parse_grid(spec) -> list:
    """``"p,p@w,w;p,p@w,w"`` (weights optional) into ``[[points, probs], ...]``."""
    if isinstance(spec, list):
        return spec
    axes = []
    for part in str(spec).split(";"):
        pts, _, wts = part.partition("@")
        try:
            p = [float(v) for v in pts.split(",")]
            w = [float(v) for v in wts.split(",")] if wts else [1.0 / len(p)] * len(p)
        except ValueError:
            raise ConfigurationError(f"bad grid axis {part!r}") from None
        axes.append([p, w])
    return axes


def _term_key(T) -> str:
    return ",".join(str(i) for i in T)


def _anova(cfg: RunConfig, workers: int) -> dict:
    if cfg.grid is None:
        raise ConfigurationError("anova needs a grid")
    m = cfg.build_model()
    mu = ProductMeasure(tuple(tuple(a) for a in parse_grid(cfg.grid)))
    d = hoeffding_decompose(m, mu)
    out = {
        "mean": d.mean,
        "total_variance": d.total_variance,
        "term_variances": {_term_key(T): v for T, v in d.variances.items()},
        "orthogonality": orthogonality_check(d, mu),
        "zero_mean": zero_mean_residual(d, mu),
        "variance_additivity": abs(d.total_variance - math.fsum(d.variances.values())),
        "reconstruction": float(np.max(np.abs(d.reconstruct() - d.values))),
    }
    out["sobol"] = {_term_key(T): v for T, v in sobol_indices(d).items()}
    out["sobol_total"] = {_term_key(T): v for T, v in total_indices(d).items()}
    out["bridge"] = gralis_sobol_bridge(m, mu, cfg.quadrature(), cfg.path)
    return out


def _multiscale(cfg: RunConfig, workers: int) -> dict:
    if cfg.layers is None:
        raise ConfigurationError("multiscale needs a layer file")
    layers = LayerAttributions.from_dict(cfg.layers)
    s2 = layers.variances
    opt = optimal_weights(s2)
    lam = opt if cfg.lambdas is None else np.asarray(cfg.lambdas, dtype=float)
    return {
        "variance_method": layers.variance_method,
        "optimal_weights": [float(v) for v in opt],
        "weights_used": [float(v) for v in lam],
        "aggregate": [float(v) for v in ms_aggregate(layers, lam)],
        "independence_variance": aggregate_variance(s2, lam),
        "min_variance": min_variance(s2),
        "kkt_residual": kkt_residual(s2, opt),
    }


def _reduce(cfg: RunConfig, workers: int) -> dict:
    m = cfg.build_model()
    ep = cfg.point(m.dim)
    n = ep.dim
    g = CooperativeGame.from_model(m, ep)
    k = cfg.k
    ig_direct = integrated_gradients(m, ep, k, "right")
    bits = np.arange(1 << n, dtype=np.uint64)
    designs, weights, fvals = lime_samples(m, ep, bits, cfg.kernel())
    perm = shap_permutation_triple(g) if n <= 8 else None
    triples = []
    for i in range(n):
        lt, coef = lime_triple(designs, weights, fvals, i)
        triples.append(
            {
                "feature": i,
                "shap_triple": triple_eval(shap_triple(g, i)),
                "ig_triple": ig_triple(m, ep, i, k)[1],
                "ig_direct": float(ig_direct[i]),
                "lime_triple": triple_eval(lt),
                "lime_direct": coef,
            }
        )
    out = {
        "limits": reducibility_suite(m, ep, k=k),
        "shapley": [float(v) for v in shapley_values(g)],
        "triples": triples,
    }
    if perm is not None:
        out["shap_constitutive"] = perm.constitutive_residual(float(g.values[-1] - g.values[0]))
    if cfg.feature_maps is not None:
        out["gradcam"] = _gradcam(FeatureMapStack.from_dict(cfg.feature_maps))
    return out


def _gradcam(fm: FeatureMapStack) -> dict:
    L = gradcam_lin_map(fm)
    _, H, W = fm.shape
    gap = max(abs(triple_eval(gradcam_triple(fm, p, q)) - gradcam_lin(fm, p, q)) for p in range(H) for q in range(W))
    out = {"map": L.tolist(), "triple_gap": gap, "lin_homogeneity_defect": lin_homogeneity_defect(fm, -1.0)}
    try:
        out["relu_homogeneity_defect"] = relu_homogeneity_defect(fm, -1.0)
    except WitnessUnavailableError as exc:
        out["relu_homogeneity_defect"] = None
        out["witness"] = str(exc)
    return out


def _audit(cfg: RunConfig, workers: int) -> dict:
    sigma = 0.75 if cfg.kernel().is_uniform else cfg.kernel().sigma
    rows = axiomatic_audit(cfg.quadrature(), cfg.path, sigma, cfg.thresholds)
    return {"rows": rows}


def _delauc(cfg: RunConfig, workers: int):
    if cfg.curve is None:
        raise ConfigurationError("delauc needs a curve")
    try:
        curve = DropCurve(cfg.curve["k"], cfg.curve["drop"])
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"curve needs 'k' and 'drop': {exc}") from None
    rows = [{"k": float(k), "drop": float(d)} for k, d in zip(curve.k, curve.drops)]
    return {"delauc": deletion_auc(curve), "k_max": curve.k_max}, {"curve": rows}


_DISPATCH = {
    "attribute": _attribute,
    "converge": _converge,
    "interactions": _interactions,
    "anova": _anova,
    "multiscale": _multiscale,
    "reduce": _reduce,
    "audit": _audit,
    "delauc": _delauc,
}


def execute(cfg: RunConfig, workers: int = 1):
    """Run ``cfg.command``; returns ``(results, tables)``."""
    out = _DISPATCH[cfg.command](cfg, workers)
    return out if isinstance(out, tuple) else (out, {})


# -- files ---------------------------------------------------------------------------


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def render_report(cfg: Optional[RunConfig], results: dict) -> str:
    body = {"config": cfg.to_dict() if cfg else {}, "version": __version__, **results}
    return json.dumps(_clean(body), sort_keys=True, indent=2, allow_nan=False) + "\n"


def render_csv(rows: list) -> str:
    buf = io.StringIO()
    cols = sorted({k for r in rows for k in r})
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in _clean(r).items()})
    return buf.getvalue()


def emit_report(results: dict, path, cfg: Optional[RunConfig] = None, tables: Optional[dict] = None) -> list:
    """Write the JSON report and one ``<stem>.<name>.csv`` per table.

    Returns the written paths. I/O failures are re-raised naming the path.
    """
    path = Path(path)
    written = []
    try:
        path.write_text(render_report(cfg, results))
        written.append(path)
        for name, rows in sorted((tables or {}).items()):
            side = path.with_name(f"{path.stem}.{name}.csv")
            side.write_text(render_csv(rows))
            written.append(side)
    except OSError as exc:
        raise OSError(f"cannot write report to {exc.filename or path}: {exc.strerror}") from exc
    return written


def load_config(path) -> RunConfig:
    return RunConfig.from_dict(read_config_dict(path))


def read_config_dict(path) -> dict:
    """Keys of a JSON config file named like the flags, or a report's ``config`` block."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    if not isinstance(data, dict):
        raise ConfigurationError(f"config {path} must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}
