"""Randomness and structure metrics for measured processes.

For machines whose belief presentation can be enumerated, entropy rate and
statistical complexity come from closed forms on the belief chain.  For
machines whose beliefs fill a fractal subset of the simplex, the entropy rate
is estimated by averaging symbol-distribution entropy along a sampled belief
trajectory (the Blackwell estimator), the statistical complexity diverges,
and its divergence rate is the statistical complexity dimension, estimated by
box-counting the sampled invariant measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientLinearRegime
from .hmc import LabeledHMC
from .msp import (
    EXACT_FINITE,
    SAMPLED,
    TRUNCATED_COUNTABLE,
    _blackwell_walk,
    build_msp,
    msp_metrics,
)

#: Default epsilon grid: 13 log-spaced box sizes from 2^-3 down to 2^-12.
def default_eps_grid() -> np.ndarray:
    return 2.0 ** -np.linspace(3.0, 12.0, 13)


def blackwell_entropy_rate(hmc: LabeledHMC, length: int = 10 ** 6,
                           burn_in: int = 10 ** 4, seed=0):
    """Entropy-rate estimate from one belief trajectory.

    Averages the per-step symbol-distribution entropy -sum_x Pr(x|eta)
    log2 Pr(x|eta) over a sampled trajectory after burn-in.  Returns
    (estimate, standard error); the standard error comes from 100 batch
    means.
    """
    res = _blackwell_walk(hmc, length, burn_in, seed)
    return res.hmu, res.hmu_stderr


def coarse_grained_entropy(points, epsilon: float) -> float:
    """Shannon entropy of the points histogrammed at cell side ``epsilon``.

    The belief simplex is embedded by dropping the last coordinate; cells are
    axis-aligned with index floor(coordinate/epsilon), the 1.0 boundary
    mapping into the top cell.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("points must be a nonempty 2-d array")
    coords = pts[:, :-1] if pts.shape[1] > 1 else pts
    top = int(math.floor((1.0 - 1e-15) / epsilon))
    idx = np.floor(coords / epsilon).astype(np.int64)
    np.clip(idx, 0, top, out=idx)
    d = idx.shape[1]
    base = top + 1
    if d == 1:
        keys = idx[:, 0]
    elif base ** d < 2 ** 62:
        weights = base ** np.arange(d, dtype=np.int64)
        keys = idx @ weights
    else:
        keys = np.unique(idx, axis=0, return_inverse=True)[1]
    counts = np.unique(keys, return_counts=True)[1]
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class DimensionFit:
    """Diagnostics of the box-counting slope fit."""

    slope: float
    r_squared: float
    eps_window: tuple
    eps_values: tuple
    h_values: tuple


def _fit_window(log_inv_eps: np.ndarray, hs: np.ndarray, min_window: int = 4,
                flat_rms: float = 0.01):
    """Best linear window of H_eps against log2(1/eps) by maximal R^2.

    Windows whose residuals are below ``flat_rms`` bits are treated as
    perfectly linear; this keeps flat (dimension-zero) scaling curves, where
    R^2 is ill-conditioned, from being rejected.
    """
    npts = len(log_inv_eps)
    best = None
    for a in range(npts - min_window + 1):
        for b in range(a + min_window, npts + 1):
            xs = log_inv_eps[a:b]
            ys = hs[a:b]
            slope, intercept = np.polyfit(xs, ys, 1)
            resid = ys - (slope * xs + intercept)
            ss_res = float(resid @ resid)
            ss_tot = float(((ys - ys.mean()) ** 2).sum())
            r2 = 1.0 if ss_tot <= 0.0 else 1.0 - ss_res / ss_tot
            # A near-constant window is a legitimate dimension-zero plateau,
            # but R^2 is ill-conditioned there (0/0); accept it outright.
            # The guard must not fire on sloped windows, where R^2 is sound.
            if float(ys.max() - ys.min()) < flat_rms * len(xs):
                r2 = 1.0
            key = (r2, b - a, a)
            if best is None or key > best[0]:
                best = (key, float(slope), float(r2), (a, b))
    _, slope, r2, window = best
    return slope, r2, window


def dimension_from_points(points, eps_grid=None, r2_threshold: float = 0.98):
    """Box-counting information dimension of a point cloud on the simplex.

    Returns (dimension, DimensionFit).  The dimension is the slope of the
    coarse-grained entropy against log2(1/epsilon) over the automatically
    selected maximal-R^2 window of at least 4 grid points, clamped to the
    embedding dimension.
    """
    eps = default_eps_grid() if eps_grid is None else np.asarray(eps_grid, dtype=float)
    if eps.size < 6:
        raise ValueError("the epsilon grid needs at least 6 points")
    pts = np.asarray(points, dtype=float)
    hs = np.array([coarse_grained_entropy(pts, e) for e in eps])
    x = np.log2(1.0 / eps)
    slope, r2, (a, b) = _fit_window(x, hs)
    if r2 < r2_threshold:
        raise InsufficientLinearRegime(
            f"no scaling window of at least 4 points reaches R^2 {r2_threshold}; "
            f"best window R^2 = {r2:.4f}",
            best_r2=r2,
            h_values=[float(v) for v in hs],
        )
    dim_cap = max(pts.shape[1] - 1, 1)
    slope = min(max(slope, 0.0), float(dim_cap))
    fit = DimensionFit(
        slope=float(slope),
        r_squared=float(r2),
        eps_window=(float(eps[a]), float(eps[b - 1])),
        eps_values=tuple(float(e) for e in eps),
        h_values=tuple(float(v) for v in hs),
    )
    return float(slope), fit


def statistical_complexity_dimension(hmc: LabeledHMC, sample: int = 2 * 10 ** 6,
                                     eps_grid=None, seed=0,
                                     burn_in: int = 10 ** 4):
    """Box-counting dimension of the sampled invariant belief measure.

    Samples ``sample`` beliefs along one trajectory (after burn-in) and fits
    the coarse-grained entropy slope.  The result is clamped to [0, N-1] for
    an N-state machine.
    """
    res = _blackwell_walk(hmc, sample, burn_in, seed, collect_points=True)
    dim, fit = dimension_from_points(res.points, eps_grid=eps_grid)
    cap = float(max(hmc.n_states - 1, 0))
    dim = min(dim, cap)
    return dim, fit


FINITE = "finite"
COUNTABLE = "countable"
UNCOUNTABLE = "uncountable"


@dataclass(frozen=True)
class MetricsReport:
    """Full metric report for one machine.

    ``cmu`` is None with ``cmu_divergent`` set when the belief presentation
    has fractal support (statistical complexity diverges); ``dmu`` is exactly
    zero for enumerable presentations, whose coarse-grained entropy is
    bounded.  ``hmu_stderr`` is None when the entropy rate is a closed form.
    """

    hmu: float
    hmu_stderr: float | None
    cmu: float | None
    cmu_divergent: bool
    dmu: float
    dmu_fit: DimensionFit | None
    cardinality_class: str
    msp_states: int
    msp_kind: str
    msp_growth: str
    truncation_mass: float
    sample_size: int | None
    burn_in: int | None
    seed: int | None

    def summary(self) -> str:
        cmu = "divergent" if self.cmu_divergent else f"{self.cmu:.6g}"
        err = "" if self.hmu_stderr is None else f" (+/- {self.hmu_stderr:.2g})"
        return (
            f"hmu={self.hmu:.6g}{err} bits/symbol, cmu={cmu} bits, "
            f"dmu={self.dmu:.6g}, class={self.cardinality_class}, "
            f"msp_states={self.msp_states}"
        )


def process_metrics(hmc: LabeledHMC, *, merge_tol: float = 1e-9,
                    max_states: int = 10 ** 4, mass_threshold: float = 1e-9,
                    length: int = 10 ** 6, burn_in: int = 10 ** 4,
                    dmu_sample: int = 2 * 10 ** 6, eps_grid=None,
                    seed: int = 0) -> MetricsReport:
    """Classify the belief presentation and compute all metrics.

    Enumerable presentations (closed, or truncated chains with subexponential
    frontier growth) get closed-form metrics and dimension zero.  Fractal
    presentations get the Blackwell entropy-rate estimate, a divergent
    statistical complexity, and a box-counting dimension.
    """
    msp = build_msp(hmc, merge_tol=merge_tol, max_states=max_states,
                    mass_threshold=mass_threshold)
    enumerable = msp.kind == EXACT_FINITE or (
        msp.kind == TRUNCATED_COUNTABLE and msp.growth != "exponential"
    )
    if enumerable:
        met = msp_metrics(msp)
        return MetricsReport(
            hmu=met.hmu,
            hmu_stderr=None,
            cmu=met.cmu,
            cmu_divergent=False,
            dmu=0.0,
            dmu_fit=None,
            cardinality_class=FINITE if msp.kind == EXACT_FINITE else COUNTABLE,
            msp_states=msp.n_states,
            msp_kind=msp.kind,
            msp_growth=msp.growth,
            truncation_mass=msp.truncation_mass,
            sample_size=None,
            burn_in=None,
            seed=None,
        )
    ss = np.random.SeedSequence(seed)
    s_hmu, s_dmu = ss.spawn(2)
    hmu, stderr = blackwell_entropy_rate(hmc, length=length, burn_in=burn_in,
                                         seed=s_hmu)
    dmu, fit = statistical_complexity_dimension(hmc, sample=dmu_sample,
                                                eps_grid=eps_grid, seed=s_dmu,
                                                burn_in=burn_in)
    return MetricsReport(
        hmu=hmu,
        hmu_stderr=stderr,
        cmu=None,
        cmu_divergent=True,
        dmu=dmu,
        dmu_fit=fit,
        cardinality_class=UNCOUNTABLE,
        msp_states=msp.n_states,
        msp_kind=SAMPLED,
        msp_growth=msp.growth,
        truncation_mass=msp.truncation_mass,
        sample_size=length,
        burn_in=burn_in,
        seed=seed,
    )
