"""Measurement sweeps, the discrimination-strength study, and optimality
searches over measurement bases.

A sweep derives the measured machine at each basis angle, classifies its
belief presentation, and reports entropy rate plus a structure metric per
row: exact statistical complexity when the presentation is enumerable, the
box-counting dimension when it is fractal.  The optimizer runs a coarse grid
followed by golden-section refinement per coordinate, comparing rows
lexicographically so that enumerable (finite-structure) bases always beat
fractal ones when minimizing structure.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientLinearRegime, NoisyObjectiveWarning
from .hmc import entropy_rate_unifilar, state_entropy, unifilarity
from .measured import CCQS, derive_measured_hmc
from .metrics import (
    blackwell_entropy_rate,
    default_eps_grid,
    statistical_complexity_dimension,
)
from .msp import EXACT_FINITE, build_msp, msp_metrics
from .quantum import projective_basis, qubit_from_bloch, usd_povm


@dataclass(frozen=True)
class EstimatorConfig:
    """Estimator settings applied to every sweep row.

    ``structure`` picks the reported structure metric: "auto" reports exact
    statistical complexity for enumerable rows and the box-counting dimension
    for fractal rows; "dmu" or "cmu" force one metric (enumerable rows have
    dimension exactly zero; fractal rows have no finite complexity and report
    NaN under "cmu").
    """

    hmu_length: int = 200_000
    burn_in: int = 10_000
    dmu_sample: int = 500_000
    eps_grid: tuple | None = None
    merge_tol: float = 1e-9
    max_states: int = 2000
    mass_threshold: float = 1e-9
    structure: str = "auto"

    def eps(self):
        if self.eps_grid is None:
            return default_eps_grid()
        return np.asarray(self.eps_grid, dtype=float)


@dataclass(frozen=True)
class SweepRow:
    theta: float
    phi: float
    hmu: float
    hmu_stderr: float
    structure_metric: str
    structure_value: float
    msp_kind: str
    msp_states: int
    enumerable: bool
    seed: int


@dataclass(frozen=True)
class SweepResult:
    """Rows sorted by (phi, theta) plus the source's generator baseline."""

    rows: tuple
    generator_hmu: float
    generator_cmu: float
    source_name: str

    def row_at(self, theta: float, phi: float = 0.0, tol: float = 1e-12) -> SweepRow:
        for row in self.rows:
            if abs(row.theta - theta) <= tol and abs(row.phi - phi) <= tol:
                return row
        raise KeyError(f"no row at theta={theta}, phi={phi}")

    def cardinality_jumps(self) -> tuple:
        """Angles where neighboring rows change presentation class."""
        jumps = []
        rows = self.rows
        for a, b in zip(rows, rows[1:]):
            if a.phi == b.phi and a.enumerable != b.enumerable:
                jumps.append((a.theta, b.theta))
        return tuple(jumps)


CSV_COLUMNS = ("theta", "phi", "hmu", "hmu_stderr",
               "structure_metric", "structure_value", "msp_kind")


def _generator_baseline(source: CCQS):
    hmc = source.hmc
    if unifilarity(hmc).unifilar:
        return entropy_rate_unifilar(hmc), state_entropy(hmc)
    hmu, _ = blackwell_entropy_rate(hmc, length=200_000, burn_in=10_000, seed=0)
    return hmu, state_entropy(hmc)


def _row_seed(base_seed: int, theta_idx: int, phi_idx: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=base_seed,
                                  spawn_key=(phi_idx, theta_idx))


def _sweep_row(source: CCQS, theta: float, phi: float, cfg: EstimatorConfig,
               seed_seq: np.random.SeedSequence) -> SweepRow:
    measured = derive_measured_hmc(source, projective_basis(theta, phi))
    msp = build_msp(measured, merge_tol=cfg.merge_tol, max_states=cfg.max_states,
                    mass_threshold=cfg.mass_threshold)
    enumerable = msp.kind == EXACT_FINITE or msp.growth != "exponential"
    seed_int = int(seed_seq.generate_state(1)[0])
    if enumerable:
        met = msp_metrics(msp)
        hmu, stderr = met.hmu, 0.0
        cmu = met.cmu
        dmu = 0.0
    else:
        s_hmu, s_dmu = seed_seq.spawn(2)
        hmu, stderr = blackwell_entropy_rate(
            measured, length=cfg.hmu_length, burn_in=cfg.burn_in, seed=s_hmu)
        cmu = math.nan
        dmu = None
        if cfg.structure in ("auto", "dmu"):
            try:
                dmu, _ = statistical_complexity_dimension(
                    measured, sample=cfg.dmu_sample, eps_grid=cfg.eps(),
                    seed=s_dmu, burn_in=cfg.burn_in)
            except InsufficientLinearRegime:
                # A sweep should not die on one marginal scaling fit; the
                # row records NaN and the caller can rerun it at higher
                # resolution.
                dmu = math.nan
    if cfg.structure == "cmu":
        metric, value = "cmu", cmu
    elif cfg.structure == "dmu":
        metric, value = "dmu", dmu
    else:
        metric, value = ("cmu", cmu) if enumerable else ("dmu", dmu)
    return SweepRow(
        theta=float(theta),
        phi=float(phi),
        hmu=float(hmu),
        hmu_stderr=float(stderr),
        structure_metric=metric,
        structure_value=float(value),
        msp_kind=msp.kind,
        msp_states=msp.n_states,
        enumerable=enumerable,
        seed=seed_int,
    )


def _run_rows(source, tasks, cfg, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(
                lambda t: _sweep_row(source, t[0], t[1], cfg, t[2]), tasks))
    return [_sweep_row(source, th, ph, cfg, ss) for th, ph, ss in tasks]


def sweep_theta(source: CCQS, phi: float = 0.0, n: int = 100,
                cfg: EstimatorConfig | None = None, base_seed: int = 0,
                thetas=None, jobs: int = 1) -> SweepResult:
    """Sweep the polar basis angle over [0, pi] at fixed azimuth.

    ``thetas`` overrides the default uniform grid of ``n`` angles (the grid is
    sorted and deduplicated either way).  Per-row seeds derive from
    (base_seed, phi index, theta index), so results do not depend on worker
    scheduling.
    """
    if thetas is None:
        if n < 2:
            raise ValueError("a sweep needs at least 2 angles")
        grid = np.linspace(0.0, math.pi, n)
    else:
        grid = np.sort(np.unique(np.asarray(list(thetas), dtype=float)))
    cfg = cfg or EstimatorConfig()
    tasks = [(float(t), float(phi), _row_seed(base_seed, i, 0))
             for i, t in enumerate(grid)]
    rows = _run_rows(source, tasks, cfg, jobs)
    hmu_g, cmu_g = _generator_baseline(source)
    return SweepResult(rows=tuple(rows), generator_hmu=hmu_g,
                       generator_cmu=cmu_g, source_name=source.name)


def sweep_grid(source: CCQS, n_theta: int, n_phi: int,
               cfg: EstimatorConfig | None = None, base_seed: int = 0,
               jobs: int = 1) -> SweepResult:
    """Full (theta, phi) grid sweep; rows sorted by (phi, theta)."""
    if n_theta < 2 or n_phi < 2:
        raise ValueError("a grid sweep needs at least 2 angles per axis")
    cfg = cfg or EstimatorConfig()
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = np.linspace(0.0, 2.0 * math.pi, n_phi)
    tasks = []
    for pj, ph in enumerate(phis):
        for ti, th in enumerate(thetas):
            tasks.append((float(th), float(ph), _row_seed(base_seed, ti, pj)))
    rows = _run_rows(source, tasks, cfg, jobs)
    hmu_g, cmu_g = _generator_baseline(source)
    return SweepResult(rows=tuple(rows), generator_hmu=hmu_g,
                       generator_cmu=cmu_g, source_name=source.name)


# -- unambiguous-discrimination study -----------------------------------


@dataclass(frozen=True)
class UsdStudyRow:
    alpha: float
    hmu: float
    cmu: float
    msp_states: int
    msp_kind: str


def usd_alpha_study(alpha_grid, msp_truncation: int = 500,
                    source: CCQS | None = None,
                    merge_tol: float = 1e-10) -> list:
    """Discrimination-strength study for a two-state-pair source.

    For each separation angle alpha the source emits |psi> at Bloch angle
    alpha and |phi> = |0>, measured by the unambiguous-discrimination POVM of
    the pair; the belief chain is enumerated (truncated at
    ``msp_truncation`` states) and closed-form metrics are recorded.

    The belief chain contracts geometrically after a conclusive outcome, so
    its enumerable closure depends on the merge tolerance; the default of
    1e-10 resolves the chain finely enough that the complexity-entropy curve
    peaks where published data places it.  Deterministic: no sampling is
    involved.

    When ``source`` is given it must have exactly two symbols; the first (in
    alphabet order) takes the |psi> role, the second the |phi> role.
    """
    base = source if source is not None else _pair_source()
    if base.hmc.n_symbols != 2:
        raise ValueError("the discrimination study needs a two-symbol source")
    sym_psi, sym_phi = base.hmc.alphabet
    rows = []
    for alpha in alpha_grid:
        a = float(alpha)
        if not 0.0 < a <= math.pi + 1e-12:
            raise ValueError("alpha must lie in (0, pi]")
        psi = qubit_from_bloch(a, 0.0)
        phi_state = qubit_from_bloch(0.0, 0.0)
        ccqs = CCQS(base.hmc, {sym_psi: psi, sym_phi: phi_state},
                    name=f"{base.name or 'pair'}@alpha={a:.6g}")
        povm = usd_povm(psi, phi_state)
        measured = derive_measured_hmc(ccqs, povm)
        msp = build_msp(measured, merge_tol=merge_tol,
                        max_states=msp_truncation, mass_threshold=1e-9)
        met = msp_metrics(msp)
        rows.append(UsdStudyRow(alpha=a, hmu=met.hmu, cmu=met.cmu,
                                msp_states=msp.n_states, msp_kind=msp.kind))
    return rows


def _pair_source() -> CCQS:
    from .examples import state_pair

    return state_pair()


# -- measurement optimization -------------------------------------------


@dataclass(frozen=True)
class Evaluation:
    theta: float
    phi: float
    key: tuple
    row: SweepRow


@dataclass
class OptimizeResult:
    theta: float
    phi: float
    value: float
    mode: str
    objective: str
    trace: list = field(default_factory=list)
    stopped_noisy: bool = False
    evaluations: int = 0


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def optimize_measurement(source: CCQS, objective: str, budget: int = 64,
                         cfg: EstimatorConfig | None = None,
                         base_seed: int = 0) -> OptimizeResult:
    """Search measurement angles for an informational optimum.

    ``objective`` is "max_hmu" (maximally random outcomes) or "min_structure"
    (minimally structured outcomes).  A coarse (theta, phi) grid seeds a
    golden-section refinement per coordinate; the objective is assumed only
    piecewise smooth, so the refinement stays inside the best grid cell.

    For "min_structure" rows are compared lexicographically: any enumerable
    presentation (finite complexity) beats any fractal one, then the metric
    value decides within a mode.  Every evaluated point uses a seed derived
    from its angles, so re-evaluations are consistent and the search is
    deterministic.  Emits :class:`NoisyObjectiveWarning` and stops early when
    objective differences inside the refinement bracket fall below the
    estimator noise floor.
    """
    if objective not in ("max_hmu", "min_structure"):
        raise ValueError("objective must be 'max_hmu' or 'min_structure'")
    if budget < 16:
        raise ValueError("budget must be at least 16")
    cfg = cfg or EstimatorConfig()
    cache: dict = {}
    trace: list = []
    counter = {"n": 0}

    def noise_floor(row: SweepRow) -> float:
        if objective == "max_hmu":
            return 3.0 * row.hmu_stderr
        return 0.0 if row.enumerable else 0.01

    def evaluate(theta: float, phi: float) -> Evaluation:
        key = (round(theta, 12), round(phi % (2.0 * math.pi), 12))
        hit = cache.get(key)
        if hit is not None:
            return hit
        seed_seq = np.random.SeedSequence(
            entropy=base_seed,
            spawn_key=(int(round(key[0] * 1e9)) & 0xFFFFFFFF,
                       int(round(key[1] * 1e9)) & 0xFFFFFFFF),
        )
        row = _sweep_row(source, theta, phi, cfg, seed_seq)
        if objective == "max_hmu":
            obj_key = (-row.hmu,)
            mode = "hmu"
        else:
            if row.enumerable:
                obj_key = (0, row.structure_value if row.structure_metric == "cmu"
                           else 0.0)
                mode = "cmu"
            else:
                sval = row.structure_value
                # A failed scaling fit sorts worst among fractal rows.
                obj_key = (1, math.inf if math.isnan(sval) else sval)
                mode = "dmu"
        ev = Evaluation(theta=theta, phi=phi, key=obj_key, row=row)
        cache[key] = ev
        trace.append((theta, phi, mode, row))
        counter["n"] += 1
        return ev

    def budget_left() -> int:
        return budget - counter["n"]

    # Coarse grid.  The azimuth axis only gets points when the budget allows.
    n_phi = 4 if budget >= 48 else 1
    n_theta = max(9, min((budget // 2) // n_phi, 41))
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    evals = [evaluate(float(t), float(p)) for p in phis for t in thetas]
    best = min(evals, key=lambda e: e.key)
    stopped_noisy = False

    def refine(coord: str, best: Evaluation) -> Evaluation:
        nonlocal stopped_noisy
        if coord == "theta":
            grid = thetas
            at = best.theta
            make = lambda v: (v, best.phi)
            span = math.pi
        else:
            grid = phis
            at = best.phi
            make = lambda v: (best.theta, v)
            span = 2.0 * math.pi
        if len(grid) < 2:
            return best
        step = span / (len(grid) - 1) if len(grid) > 1 else span
        lo = max(0.0, at - step)
        hi = min(span, at + step)
        a, b = lo, hi
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        while budget_left() > 0 and (b - a) > 1e-6:
            ec = evaluate(*make(c))
            if budget_left() <= 0:
                break
            ed = evaluate(*make(d))
            floor = max(noise_floor(ec.row), noise_floor(ed.row))
            if objective == "max_hmu":
                noisy = abs(ec.row.hmu - ed.row.hmu) < floor
            else:
                noisy = (not ec.row.enumerable and not ed.row.enumerable
                         and abs(ec.row.structure_value
                                 - ed.row.structure_value) < floor)
            if noisy and floor > 0.0:
                warnings.warn(
                    "objective variation inside the bracket is below the "
                    "noise floor; stopping refinement",
                    NoisyObjectiveWarning,
                    stacklevel=3,
                )
                stopped_noisy = True
                break
            if ec.key <= ed.key:
                b, d = d, c
                c = b - _GOLDEN * (b - a)
            else:
                a, c = c, d
                d = a + _GOLDEN * (b - a)
        candidates = [best] + [e for e in cache.values()
                               if coord != "theta" or abs(e.phi - best.phi) < 1e-9]
        return min(candidates, key=lambda e: e.key)

    best = refine("theta", best)
    if n_phi > 1 and budget_left() > 0:
        best = refine("phi", best)
        best = refine("theta", best)

    value = best.row.hmu if objective == "max_hmu" else best.row.structure_value
    mode = "hmu" if objective == "max_hmu" else (
        "cmu" if best.row.enumerable else "dmu")
    return OptimizeResult(
        theta=best.theta,
        phi=best.phi,
        value=float(value),
        mode=mode,
        objective=objective,
        trace=trace,
        stopped_noisy=stopped_noisy,
        evaluations=counter["n"],
    )
