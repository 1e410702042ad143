"""Mixed-state presentations: belief updates, enumeration, sampling.

A mixed state (belief) is the conditional distribution over hidden states
given the observed word.  Iterating the belief update over all symbols from
the stationary prior enumerates the mixed-state presentation (MSP), a
unifilar machine whose states are beliefs.  Depending on the machine the MSP
closes finitely, forms a countable chain (truncated here by state count and
stationary mass), or fills a fractal subset of the simplex (sampled here by
following one trajectory of the belief dynamic).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, SampledKindUnsupported, ZeroProbabilitySymbol
from .hmc import LabeledHMC, _entropy, ensure_valid, stationary_distribution

#: Symbol probabilities at or below this are treated as impossible.
PROB_TOL = 1e-12

EXACT_FINITE = "exact-finite"
TRUNCATED_COUNTABLE = "truncated-countable"
SAMPLED = "sampled"


def evolve_mixed_state(hmc: LabeledHMC, eta, x):
    """One belief update: returns (eta T^x / Pr(x|eta), Pr(x|eta))."""
    eta = np.asarray(eta, dtype=float)
    raw = eta @ hmc.matrix(x)
    p = float(raw.sum())
    if p <= PROB_TOL:
        raise ZeroProbabilitySymbol(
            f"symbol {x!r} has probability {p:.3g} in this belief", symbol=x
        )
    return raw / p, p


@dataclass
class MixedStatePresentation:
    """A unifilar presentation over belief states.

    ``states`` holds one belief per row; ``successor``/``probability`` give,
    per (state, symbol index), the unique successor index (-1 when the symbol
    has probability zero) and its probability.  ``kind`` records how the
    presentation was obtained; ``truncation_mass`` is the per-step stationary
    probability routed through redirected (truncated) transitions, zero for an
    exact closure.  ``growth`` is a diagnostic of the BFS frontier: "closed",
    "linear", or "exponential".
    """

    states: np.ndarray
    successor: np.ndarray
    probability: np.ndarray
    alphabet: tuple
    kind: str
    merge_tol: float
    growth: str = "closed"
    _redirected: tuple = field(default=(), repr=False)
    _truncation_mass: float | None = field(default=0.0, repr=False)
    _stationary: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_states(self) -> int:
        return self.states.shape[0]

    @property
    def stationary(self) -> np.ndarray:
        if self._stationary is None:
            self._stationary = _msp_stationary(self.successor, self.probability)
        return self._stationary

    @property
    def truncation_mass(self) -> float:
        """Per-step stationary probability routed through redirected
        (truncated) transitions; zero for an exact closure.  Needs the
        stationary distribution, so it is computed on first access."""
        if self._truncation_mass is None:
            pi = self.stationary
            flux = 0.0
            for i, xi in self._redirected:
                flux += float(pi[i] * self.probability[i, xi])
            self._truncation_mass = flux
        return self._truncation_mass

    @property
    def transitions(self) -> dict:
        """Mapping (state index, symbol) -> (successor index, probability)."""
        out = {}
        for i in range(self.n_states):
            for xi, x in enumerate(self.alphabet):
                j = int(self.successor[i, xi])
                if j >= 0:
                    out[(i, x)] = (j, float(self.probability[i, xi]))
        return out

    def word_probability(self, word) -> float:
        """Probability of a word from the start belief (row 0); the MSP is
        unifilar, so this is a single product along one path."""
        i = 0
        p = 1.0
        for x in word:
            xi = self.alphabet.index(x)
            j = int(self.successor[i, xi])
            if j < 0:
                return 0.0
            p *= float(self.probability[i, xi])
            i = j
        return p

    def to_hmc(self, max_states: int = 1500) -> LabeledHMC:
        """Dense labeled-HMC view (for cross-checks on small presentations)."""
        m = self.n_states
        if m > max_states:
            raise ValueError(f"presentation too large for a dense view ({m} states)")
        mats = {x: np.zeros((m, m)) for x in self.alphabet}
        for i in range(m):
            for xi, x in enumerate(self.alphabet):
                j = int(self.successor[i, xi])
                if j >= 0:
                    mats[x][i, j] = self.probability[i, xi]
        return LabeledHMC(tuple(range(m)), self.alphabet, mats)


def _edges(succ: np.ndarray, prob: np.ndarray):
    rows = np.repeat(np.arange(succ.shape[0]), succ.shape[1])
    cols = succ.ravel()
    vals = prob.ravel()
    keep = cols >= 0
    return rows[keep], cols[keep], vals[keep]


def _power_mass(succ: np.ndarray, prob: np.ndarray, tol: float = 1e-13,
                max_iter: int = 20000) -> np.ndarray:
    """Half-lazy power iteration on the sparse belief chain.  Returns the
    current iterate at the cap, so callers needing guarantees must check."""
    m = succ.shape[0]
    rows, cols, vals = _edges(succ, prob)
    pi = np.full(m, 1.0 / m)
    for _ in range(max_iter):
        nxt = np.bincount(cols, weights=pi[rows] * vals, minlength=m)
        nxt = 0.5 * (nxt + pi)
        nxt /= nxt.sum()
        if np.abs(nxt - pi).max() < tol:
            return nxt
        pi = nxt
    return pi


def _msp_stationary(succ: np.ndarray, prob: np.ndarray) -> np.ndarray:
    """Stationary distribution of the belief chain.

    Dense linear solve for small presentations (LU, with a least-squares
    fallback when the chain is reducible); half-lazy sparse power iteration
    otherwise.  Transient states (the start belief before synchronization)
    receive mass zero.
    """
    m = succ.shape[0]
    if m > 2000:
        return _power_mass(succ, prob)
    rows, cols, vals = _edges(succ, prob)
    t = np.zeros((m, m))
    np.add.at(t, (rows, cols), vals)
    a = t.T - np.eye(m)
    a[-1, :] = 1.0
    b = np.zeros(m)
    b[-1] = 1.0
    pi = None
    try:
        cand = np.linalg.solve(a, b)
        if (np.isfinite(cand).all() and cand.min() > -1e-8
                and np.abs(t.T @ cand - cand).max() <= 1e-8):
            pi = cand
    except np.linalg.LinAlgError:
        pass
    if pi is None:
        a2 = np.vstack([t.T - np.eye(m), np.ones((1, m))])
        b2 = np.zeros(m + 1)
        b2[-1] = 1.0
        pi, *_ = np.linalg.lstsq(a2, b2, rcond=None)
    pi = np.maximum(pi, 0.0)
    s = pi.sum()
    if s <= 0.0:
        raise ConvergenceFailure("belief-chain stationary solve failed")
    return pi / s


class _BeliefIndex:
    """Deduplication of beliefs within an L-infinity merge tolerance.

    Beliefs are hashed by their grid cell of side ``tol``; a query point is
    compared against occupants of its own and neighboring cells, so any two
    indexed points closer than ``tol`` share one representative.  Falls back
    to a linear scan in high dimension where the neighbor enumeration would
    explode, and to exact byte equality when ``tol`` is zero.
    """

    def __init__(self, dim: int, tol: float):
        self.tol = tol
        self.dim = dim
        self.cells = {}
        self.points = []
        self.exact = tol <= 0.0
        self.linear = (not self.exact) and dim > 6
        if not self.exact and not self.linear:
            self.offsets = [()]
            for _ in range(dim):
                self.offsets = [o + (d,) for o in self.offsets for d in (-1, 0, 1)]

    def _key(self, point: np.ndarray):
        if self.exact:
            return point.tobytes()
        return tuple(int(math.floor(c / self.tol)) for c in point)

    def find(self, point: np.ndarray) -> int | None:
        if self.exact:
            return self.cells.get(point.tobytes())
        if self.linear:
            for idx, q in enumerate(self.points):
                if np.abs(q - point).max() <= self.tol:
                    return idx
            return None
        base = self._key(point)
        for off in self.offsets:
            idx = self.cells.get(tuple(b + d for b, d in zip(base, off)))
            if idx is not None and np.abs(self.points[idx] - point).max() <= self.tol:
                return idx
        return None

    def insert(self, point: np.ndarray, idx: int) -> None:
        self.points.append(point)
        if not self.linear:
            self.cells[self._key(point)] = idx


def build_msp(hmc: LabeledHMC, merge_tol: float = 1e-9, max_states: int = 10 ** 4,
              mass_threshold: float = 1e-9) -> MixedStatePresentation:
    """Enumerate the mixed-state presentation by breadth-first closure.

    Starts from the stationary prior.  Beliefs within ``merge_tol``
    (L-infinity) of an existing state are identified with it; the tolerance
    decides the finite-versus-countable classification and is therefore
    exposed.  If closure completes within ``max_states`` the presentation is
    exact; otherwise transitions into undiscovered beliefs are redirected to
    the nearest retained state, low-stationary-mass states are dropped while
    the total dropped mass stays below ``mass_threshold``, and the result is
    marked truncated with the redirected stationary flux recorded.
    """
    ensure_valid(hmc)
    pi = stationary_distribution(hmc)
    n = hmc.n_states
    k = hmc.n_symbols
    mats = [hmc.matrix_by_index(xi) for xi in range(k)]
    index = _BeliefIndex(n, merge_tol)
    states = [np.array(pi)]
    index.insert(states[0], 0)
    depth = [0]
    succ_rows = [np.full(k, -1, dtype=np.int64)]
    prob_rows = [np.zeros(k)]
    dangling = []  # (state, symbol index, probability, target belief)
    queue = deque([0])
    while queue:
        i = queue.popleft()
        eta = states[i]
        for xi in range(k):
            raw = eta @ mats[xi]
            p = float(raw.sum())
            if p <= PROB_TOL:
                continue
            nxt = raw / p
            j = index.find(nxt)
            if j is None:
                if len(states) < max_states:
                    j = len(states)
                    states.append(nxt)
                    index.insert(nxt, j)
                    depth.append(depth[i] + 1)
                    succ_rows.append(np.full(k, -1, dtype=np.int64))
                    prob_rows.append(np.zeros(k))
                    queue.append(j)
                else:
                    dangling.append((i, xi, p, nxt))
                    prob_rows[i][xi] = p
                    continue
            succ_rows[i][xi] = j
            prob_rows[i][xi] = p

    state_arr = np.array(states)
    succ = np.array(succ_rows)
    prob = np.array(prob_rows)

    if not dangling:
        return MixedStatePresentation(
            states=state_arr,
            successor=succ,
            probability=prob,
            alphabet=hmc.alphabet,
            kind=EXACT_FINITE,
            merge_tol=merge_tol,
            growth="closed",
        )

    # Truncation: redirect each dangling transition to the nearest retained
    # belief, then drop the lowest-mass states while the dropped mass stays
    # below the threshold.  The mass used for ordering is a capped power
    # iterate (cheap); the exact redirected flux is computed lazily from the
    # final chain's stationary distribution.
    for i, xi, p, target in dangling:
        j = int(np.abs(state_arr - target).max(axis=1).argmin())
        succ[i, xi] = j

    mass = _power_mass(succ, prob, max_iter=1500)
    order = np.argsort(mass)  # ascending
    dropped = np.zeros(len(states), dtype=bool)
    acc = 0.0
    for idx in order:
        if idx == 0:
            continue  # the start belief stays
        if acc + mass[idx] >= mass_threshold:
            break
        acc += mass[idx]
        dropped[idx] = True
    keep = np.nonzero(~dropped)[0]
    remap = np.full(len(states), -1, dtype=np.int64)
    remap[keep] = np.arange(keep.size)
    kept_states = state_arr[keep]
    new_succ = succ[keep].copy()
    new_prob = prob[keep].copy()
    redirected = set((int(i), int(xi)) for i, xi, _, _ in dangling)
    for a in range(keep.size):
        for xi in range(k):
            j = new_succ[a, xi]
            if j < 0:
                continue
            if dropped[j]:
                target = state_arr[j]
                new_j = int(np.abs(kept_states - target).max(axis=1).argmin())
                new_succ[a, xi] = new_j
                redirected.add((int(keep[a]), xi))
            else:
                new_succ[a, xi] = remap[j]
    redirected_pairs = tuple(sorted(
        (int(remap[i]), int(xi)) for i, xi in redirected if remap[i] >= 0))

    counts = np.bincount(depth)
    growth = "linear"
    if counts.size >= 4:
        tail = counts[-4:-1]  # last full depths before the cut-off frontier
        ratios = tail[1:] / np.maximum(tail[:-1], 1)
        if ratios.size and ratios.mean() > 1.2:
            growth = "exponential"

    return MixedStatePresentation(
        states=kept_states,
        successor=new_succ,
        probability=new_prob,
        alphabet=hmc.alphabet,
        kind=TRUNCATED_COUNTABLE,
        merge_tol=merge_tol,
        growth=growth,
        _redirected=redirected_pairs,
        _truncation_mass=None,
    )


@dataclass(frozen=True)
class MspMetrics:
    """Closed-form metrics of an enumerated presentation."""

    hmu: float
    cmu: float
    n_states: int
    kind: str
    truncation_mass: float


def msp_metrics(msp: MixedStatePresentation) -> MspMetrics:
    """Entropy rate and statistical complexity of the presentation.

    Both are closed forms over the belief chain: the entropy rate averages
    the per-state symbol-distribution entropy under the stationary belief
    distribution, and the statistical complexity is the entropy of that
    distribution.  Sampled presentations have no enumerated chain; callers
    hold those to the Blackwell estimator instead.
    """
    if msp.kind == SAMPLED:
        raise SampledKindUnsupported(
            "closed-form presentation metrics need an enumerated presentation; "
            "use the Blackwell estimator for sampled kinds"
        )
    pi = msp.stationary
    hmu = 0.0
    for i in range(msp.n_states):
        if pi[i] <= 0.0:
            continue
        ps = msp.probability[i]
        hmu += pi[i] * _entropy(ps[ps > 0.0])
    return MspMetrics(
        hmu=float(hmu),
        cmu=_entropy(pi),
        n_states=msp.n_states,
        kind=msp.kind,
        truncation_mass=msp.truncation_mass,
    )


def truncation_series(hmc: LabeledHMC, n_values, merge_tol: float = 1e-9,
                      mass_threshold: float = 1e-9):
    """Metrics of the N-state truncated presentation for each N.

    Returns a list of (N, MspMetrics) rows; reproduces the convergence study
    of metrics versus truncation size for countable belief chains.
    """
    out = []
    for n in n_values:
        msp = build_msp(hmc, merge_tol=merge_tol, max_states=int(n),
                        mass_threshold=mass_threshold)
        out.append((int(n), msp_metrics(msp)))
    return out


@dataclass
class BlackwellSample:
    """A sampled belief trajectory with the emitted symbols."""

    points: np.ndarray
    symbols: list
    burn_in: int
    seed: int


@dataclass
class _WalkResult:
    points: np.ndarray | None
    symbols: list | None
    hmu: float
    hmu_stderr: float


def _blackwell_walk(hmc: LabeledHMC, length: int, burn_in: int, seed: int,
                    collect_points: bool = False, collect_symbols: bool = False,
                    n_batches: int = 100) -> _WalkResult:
    """Iterate the belief update with sampled symbols from the stationary
    prior; returns the averaged per-step symbol entropy (the Blackwell
    entropy-rate estimate) with a batch-means standard error, and optionally
    the visited beliefs and symbols after burn-in.

    The inner loop runs on plain Python floats: for the small state counts of
    interest this outruns per-step array dispatch by a wide margin.
    """
    if length <= 0:
        raise ValueError("length must be positive")
    pi = stationary_distribution(hmc)
    n = hmc.n_states
    k = hmc.n_symbols
    cols = []
    wv = []
    for xi in range(k):
        m = hmc.matrix_by_index(xi)
        cols.append(tuple(tuple(float(m[i, j]) for i in range(n)) for j in range(n)))
        wv.append(tuple(float(m[i].sum()) for i in range(n)))
    rng = np.random.default_rng(seed)
    total = length + burn_in
    us = rng.random(total)
    eta = [float(v) for v in pi]
    points = np.empty((length, n)) if collect_points else None
    symbols = [] if collect_symbols else None
    alphabet = hmc.alphabet
    nb = max(1, min(n_batches, length))
    batch_sums = [0.0] * nb
    batch_counts = [0] * nb
    log2 = math.log2
    rng_n = range(n)
    rng_k = range(k)
    for step in range(total):
        ps = [0.0] * k
        s = 0.0
        for x in rng_k:
            w = wv[x]
            acc = 0.0
            for i in rng_n:
                acc += eta[i] * w[i]
            ps[x] = acc
            s += acc
        idx = step - burn_in
        if idx >= 0:
            ent = 0.0
            for x in rng_k:
                p = ps[x] / s
                if p > 0.0:
                    ent -= p * log2(p)
            b = idx * nb // length
            batch_sums[b] += ent
            batch_counts[b] += 1
            if collect_points:
                points[idx] = eta
        u = us[step] * s
        x = 0
        c = ps[0]
        while c <= u and x < k - 1:
            x += 1
            c += ps[x]
        if collect_symbols and idx >= 0:
            symbols.append(alphabet[x])
        px = ps[x]
        colsx = cols[x]
        new = [0.0] * n
        for j in rng_n:
            col = colsx[j]
            acc = 0.0
            for i in rng_n:
                acc += eta[i] * col[i]
            new[j] = acc / px
        eta = new
    means = [batch_sums[b] / batch_counts[b] for b in range(nb) if batch_counts[b]]
    hmu = sum(means) / len(means)
    if len(means) > 1:
        var = sum((v - hmu) ** 2 for v in means) / (len(means) - 1)
        stderr = math.sqrt(var / len(means))
    else:
        stderr = 0.0
    return _WalkResult(points=points, symbols=symbols, hmu=hmu, hmu_stderr=stderr)


def sample_blackwell(hmc: LabeledHMC, length: int, burn_in: int = 10 ** 4,
                     seed: int = 0) -> BlackwellSample:
    """Sample a trajectory of beliefs and symbols from the belief dynamic.

    Beliefs are recorded after discarding ``burn_in`` steps, by which point
    the trajectory distributes as the asymptotic invariant measure of mixed
    states.  Identical seeds give identical trajectories.
    """
    res = _blackwell_walk(hmc, length, burn_in, seed,
                          collect_points=True, collect_symbols=True)
    return BlackwellSample(points=res.points, symbols=res.symbols,
                           burn_in=burn_in, seed=seed)
