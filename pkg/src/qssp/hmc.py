"""Labeled hidden Markov chains.

A labeled HMC is a finite set of hidden states together with one substochastic
transition matrix per alphabet symbol; the matrices sum to a row-stochastic
internal chain.  This module provides representation, validation, stationary
analysis, sampling, word probabilities, closed-form unifilar metrics, and the
brute-force oracles used to cross-check estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BlockTooLarge,
    ConvergenceFailure,
    NegativeEntry,
    NonStochasticRow,
    NotUnifilar,
    ReducibleChain,
    UnknownSymbol,
)

#: Entries below this magnitude are treated as structurally zero transitions.
ZERO_TOL = 1e-12

#: Row sums must match 1 within this tolerance.
ROW_TOL = 1e-12

#: Residual tolerance for the stationary distribution, ||pi T - pi||_inf.
STATIONARY_TOL = 1e-10

LOG2 = math.log(2.0)


def _entropy(probs: np.ndarray) -> float:
    """Shannon entropy in bits with 0 log 0 = 0."""
    p = np.asarray(probs, dtype=float)
    nz = p[p > 0.0]
    if nz.size == 0:
        return 0.0
    return float(-(nz * np.log2(nz)).sum()) + 0.0


class LabeledHMC:
    """A hidden Markov chain with symbol-labeled transition matrices.

    Parameters
    ----------
    states:
        Ordered hidden-state identifiers (hashable, typically strings).
    alphabet:
        Ordered symbol identifiers.
    labeled_matrices:
        Mapping symbol -> N x N array; entry (i, j) is the probability of
        emitting that symbol while moving from state i to state j.
    """

    __slots__ = ("states", "alphabet", "_mats", "_transition", "_stationary")

    def __init__(self, states, alphabet, labeled_matrices):
        self.states = tuple(states)
        self.alphabet = tuple(alphabet)
        n = len(self.states)
        if n == 0:
            raise ValueError("at least one state is required")
        if len(set(self.states)) != n:
            raise ValueError("duplicate state identifiers")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("duplicate alphabet symbols")
        mats = []
        for x in self.alphabet:
            if x not in labeled_matrices:
                raise UnknownSymbol(f"missing matrix for symbol {x!r}", symbol=x)
            m = np.array(labeled_matrices[x], dtype=float)
            if m.shape != (n, n):
                raise ValueError(
                    f"matrix for symbol {x!r} has shape {m.shape}, expected {(n, n)}"
                )
            m.setflags(write=False)
            mats.append(m)
        self._mats = tuple(mats)
        t = np.zeros((n, n))
        for m in mats:
            t = t + m
        t.setflags(write=False)
        self._transition = t
        self._stationary = None

    # -- basic accessors ---------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_symbols(self) -> int:
        return len(self.alphabet)

    @property
    def labeled_matrices(self) -> dict:
        return {x: m for x, m in zip(self.alphabet, self._mats)}

    def matrix(self, symbol) -> np.ndarray:
        """Labeled transition matrix for one symbol."""
        try:
            return self._mats[self.alphabet.index(symbol)]
        except ValueError:
            raise UnknownSymbol(f"symbol {symbol!r} not in alphabet", symbol=symbol) from None

    def matrix_by_index(self, k: int) -> np.ndarray:
        return self._mats[k]

    @property
    def transition_matrix(self) -> np.ndarray:
        """Internal chain T, the sum of all labeled matrices."""
        return self._transition

    def symbol_index(self, symbol) -> int:
        try:
            return self.alphabet.index(symbol)
        except ValueError:
            raise UnknownSymbol(f"symbol {symbol!r} not in alphabet", symbol=symbol) from None

    def state_index(self, state) -> int:
        return self.states.index(state)

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(states={len(self.states)}, "
            f"alphabet={list(self.alphabet)!r})"
        )


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of :func:`validate`; ``error`` holds the first violation found."""

    ok: bool
    error: Exception | None = None

    def raise_if_invalid(self) -> None:
        if not self.ok:
            raise self.error


@dataclass(frozen=True)
class UnifilarityReport:
    """Whether each (state, symbol) pair has at most one successor.

    ``witnesses`` lists every (state, symbol, successors) triple with two or
    more successors of nonzero probability.
    """

    unifilar: bool
    witnesses: tuple = ()


def _strongly_connected(adj: np.ndarray) -> bool:
    """True when the boolean adjacency matrix has a single strongly
    connected component covering all nodes (checked by forward and backward
    reachability from node 0)."""
    n = adj.shape[0]
    for a in (adj, adj.T):
        reached = np.zeros(n, dtype=bool)
        reached[0] = True
        frontier = [0]
        while frontier:
            nxt = a[frontier].any(axis=0) & ~reached
            reached |= nxt
            frontier = np.nonzero(nxt)[0].tolist()
        if not reached.all():
            return False
    return True


def validate(hmc: LabeledHMC) -> ValidationResult:
    """Check all labeled-HMC invariants; returns the first violation found."""
    for x, m in zip(hmc.alphabet, hmc._mats):
        if (m < -ZERO_TOL).any():
            i, j = np.argwhere(m < -ZERO_TOL)[0]
            return ValidationResult(
                False,
                NegativeEntry(
                    f"negative entry {m[i, j]:.3e} in matrix for symbol {x!r} "
                    f"at ({hmc.states[i]!r}, {hmc.states[j]!r})",
                    symbol=x,
                    state=hmc.states[i],
                ),
            )
    row_sums = hmc.transition_matrix.sum(axis=1)
    bad = np.nonzero(np.abs(row_sums - 1.0) > ROW_TOL)[0]
    if bad.size:
        i = int(bad[0])
        return ValidationResult(
            False,
            NonStochasticRow(
                f"outgoing probability of state {hmc.states[i]!r} sums to "
                f"{row_sums[i]:.12g}, expected 1",
                state=hmc.states[i],
                row_sum=float(row_sums[i]),
            ),
        )
    if not _strongly_connected(hmc.transition_matrix > ZERO_TOL):
        return ValidationResult(
            False,
            ReducibleChain(
                "internal chain is not a single communicating class; "
                "reducible chains are rejected",
            ),
        )
    return ValidationResult(True)


def ensure_valid(hmc: LabeledHMC) -> LabeledHMC:
    validate(hmc).raise_if_invalid()
    return hmc


def stationary_distribution(hmc: LabeledHMC, tol: float = 1e-13,
                            max_iter: int = 10 ** 6) -> np.ndarray:
    """Stationary distribution pi with pi T = pi.

    Power iteration from the uniform distribution.  The iteration runs on the
    half-lazy chain (T + I)/2, which has the same stationary vector but is
    aperiodic, so periodic chains converge too.  Falls back to a dense linear
    solve if the residual check fails.  Deterministic; the result is cached on
    the machine.
    """
    if hmc._stationary is not None:
        return hmc._stationary
    t = hmc.transition_matrix
    n = hmc.n_states
    pi = np.full(n, 1.0 / n)
    converged = False
    for _ in range(max_iter):
        nxt = 0.5 * (pi @ t + pi)
        nxt /= nxt.sum()
        if np.abs(nxt - pi).max() < tol:
            pi = nxt
            converged = True
            break
        pi = nxt
    if not converged or np.abs(pi @ t - pi).max() > STATIONARY_TOL:
        pi = _stationary_solve(t)
        if np.abs(pi @ t - pi).max() > STATIONARY_TOL:
            raise ConvergenceFailure(
                "stationary distribution did not converge",
                residual=float(np.abs(pi @ t - pi).max()),
            )
    pi = np.maximum(pi, 0.0)
    pi /= pi.sum()
    pi.setflags(write=False)
    hmc._stationary = pi
    return pi


def _stationary_solve(t: np.ndarray) -> np.ndarray:
    n = t.shape[0]
    a = np.vstack([t.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    return sol


def unifilarity(hmc: LabeledHMC) -> UnifilarityReport:
    """Report every (state, symbol) pair with two or more successors."""
    witnesses = []
    for x, m in zip(hmc.alphabet, hmc._mats):
        for i in range(hmc.n_states):
            succ = np.nonzero(m[i] > ZERO_TOL)[0]
            if succ.size > 1:
                witnesses.append(
                    (hmc.states[i], x, tuple(hmc.states[j] for j in succ))
                )
    return UnifilarityReport(unifilar=not witnesses, witnesses=tuple(witnesses))


def word_probability(hmc: LabeledHMC, word) -> float:
    """Probability of emitting ``word``, pi T^(x1) ... T^(xL) 1."""
    vec = stationary_distribution(hmc).copy()
    for x in word:
        vec = vec @ hmc.matrix(x)
    return float(vec.sum())


def sample_sequence(hmc: LabeledHMC, length: int, seed: int):
    """Sample a symbol sequence of the given length.

    The initial state is drawn from pi; each step draws a (symbol, successor)
    pair from the current state's outgoing distribution.  Identical seeds give
    identical sequences.  Returns a list of alphabet symbols.
    """
    if length < 0:
        raise ValueError("length must be nonnegative")
    if length == 0:
        return []
    pi = stationary_distribution(hmc)
    n, k = hmc.n_states, hmc.n_symbols
    # Flatten each state's outgoing (symbol, successor) pairs once.
    cums, pairs = [], []
    for i in range(n):
        weights, out = [], []
        for xi in range(k):
            row = hmc._mats[xi][i]
            for j in np.nonzero(row > 0.0)[0]:
                weights.append(row[j])
                out.append((xi, int(j)))
        c = np.cumsum(weights)
        c[-1] = 1.0
        cums.append(c.tolist())
        pairs.append(out)
    rng = np.random.default_rng(seed)
    state = int(rng.choice(n, p=pi))
    us = rng.random(length)
    symbols = []
    append = symbols.append
    alphabet = hmc.alphabet
    for step in range(length):
        u = us[step]
        c = cums[state]
        lo = 0
        while c[lo] <= u:
            lo += 1
        xi, state = pairs[state][lo]
        append(alphabet[xi])
    return symbols


def entropy_rate_unifilar(hmc: LabeledHMC, *, allow_nonunifilar: bool = False) -> float:
    """Closed-form entropy rate of a unifilar machine, in bits per symbol.

    Computes -sum_i pi_i sum_{x,j} T^x[i,j] log2 T^x[i,j].  For nonunifilar
    machines this formula overestimates the true entropy rate; pass
    ``allow_nonunifilar=True`` to evaluate it anyway (used as an upper bound),
    otherwise a :class:`NotUnifilar` error directs the caller to the Blackwell
    estimator.
    """
    if not allow_nonunifilar:
        report = unifilarity(hmc)
        if not report.unifilar:
            raise NotUnifilar(
                "closed-form entropy rate requires a unifilar machine; "
                "use the Blackwell estimator instead",
                witnesses=report.witnesses,
            )
    pi = stationary_distribution(hmc)
    total = 0.0
    for m in hmc._mats:
        nz = m > 0.0
        if nz.any():
            contrib = np.where(nz, m * np.log2(np.where(nz, m, 1.0)), 0.0)
            total -= float(pi @ contrib.sum(axis=1))
    return total


def state_entropy(hmc: LabeledHMC) -> float:
    """Shannon entropy of the stationary state distribution, H[pi], in bits.

    Equals the statistical complexity when the machine is a minimal unifilar
    presentation; minimality is the caller's responsibility.
    """
    return _entropy(stationary_distribution(hmc))


#: Guard for exact word enumeration: K^L may not exceed this.
BLOCK_GUARD = 2 ** 24


def block_entropy(hmc: LabeledHMC, length: int) -> float:
    """Exact block entropy H[X_{0:L}] by enumeration of all K^L words.

    Serves as the brute-force oracle for entropy-rate estimators via
    H(L) - H(L-1).
    """
    if length < 0:
        raise ValueError("length must be nonnegative")
    if length == 0:
        return 0.0
    k = hmc.n_symbols
    if k ** length > BLOCK_GUARD:
        raise BlockTooLarge(
            f"{k}^{length} words exceed the enumeration guard {BLOCK_GUARD}",
            alphabet_size=k,
            length=length,
        )
    pi = stationary_distribution(hmc)
    total = 0.0
    stack = [(pi, 0)]
    while stack:
        vec, depth = stack.pop()
        if depth == length:
            p = vec.sum()
            if p > 0.0:
                total -= p * math.log2(p)
            continue
        for m in hmc._mats:
            nxt = vec @ m
            if nxt.any():
                stack.append((nxt, depth + 1))
    return float(total)


def _future_word_matrix(hmc: LabeledHMC, horizon: int) -> np.ndarray:
    """Rows: states; columns: all words of length 1..horizon; entries: the
    probability of emitting the word when started in that state."""
    frontier = [np.ones(hmc.n_states)]
    out = []
    for _ in range(horizon):
        nxt = []
        for vec in frontier:
            for m in hmc._mats:
                v = m @ vec
                nxt.append(v)
                out.append(v)
        frontier = nxt
    return np.array(out).T if out else np.zeros((hmc.n_states, 0))


def minimize_unifilar(hmc: LabeledHMC, horizon: int = 8, tol: float = 1e-9) -> LabeledHMC:
    """Merge states whose future word distributions agree within ``tol``.

    Future distributions are compared in L-infinity over all words up to
    ``horizon`` symbols.  The quotient machine generates the same word
    probabilities up to that horizon (within tol) and stays unifilar.
    """
    report = unifilarity(hmc)
    if not report.unifilar:
        raise NotUnifilar(
            "state minimization by future equivalence requires a unifilar machine",
            witnesses=report.witnesses,
        )
    fut = _future_word_matrix(hmc, horizon)
    n = hmc.n_states
    group_of = np.full(n, -1, dtype=int)
    reps = []
    for i in range(n):
        for g, r in enumerate(reps):
            if np.abs(fut[i] - fut[r]).max() <= tol:
                group_of[i] = g
                break
        else:
            group_of[i] = len(reps)
            reps.append(i)
    if len(reps) == n:
        return hmc
    new_states = tuple(hmc.states[r] for r in reps)
    mats = {}
    for x, m in zip(hmc.alphabet, hmc._mats):
        q = np.zeros((len(reps), len(reps)))
        for g, r in enumerate(reps):
            for j in range(n):
                if m[r, j] > 0.0:
                    q[g, group_of[j]] += m[r, j]
        mats[x] = q
    return LabeledHMC(new_states, hmc.alphabet, mats)
