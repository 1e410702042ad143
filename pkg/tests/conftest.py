"""Shared fixtures: random machine generators and independent oracles.

The oracles deliberately use different algorithms from the library (dense
eigendecomposition, explicit hidden-path sums, word enumeration) so that
agreement is evidence, not tautology.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from qssp import CCQS, LabeledHMC, QubitPureState, qubit_from_bloch


# -- random model generators --------------------------------------------


def random_unifilar_hmc(rng: np.random.Generator, n_states: int = None,
                        n_symbols: int = None) -> LabeledHMC:
    """Random unifilar machine: per state, each symbol either absent or
    pointing at one uniformly chosen successor."""
    n = n_states or int(rng.integers(2, 6))
    k = n_symbols or int(rng.integers(2, 4))
    while True:
        mats = {x: np.zeros((n, n)) for x in range(k)}
        for i in range(n):
            active = rng.random(k) < 0.7
            if not active.any():
                active[int(rng.integers(k))] = True
            w = rng.random(k) * active
            w = w / w.sum()
            for x in range(k):
                if w[x] > 0.0:
                    mats[x][i, int(rng.integers(n))] = w[x]
        try:
            m = LabeledHMC(tuple(range(n)), tuple(range(k)), mats)
            from qssp import ensure_valid

            ensure_valid(m)
            return m
        except Exception:
            continue


def random_hmc(rng: np.random.Generator, n_states: int = None,
               n_symbols: int = None) -> LabeledHMC:
    """Random (generally nonunifilar) machine with dense positive rows."""
    n = n_states or int(rng.integers(2, 5))
    k = n_symbols or int(rng.integers(2, 4))
    full = rng.random((n, k * n)) + 0.05
    full /= full.sum(axis=1, keepdims=True)
    mats = {x: full[:, x * n:(x + 1) * n].copy() for x in range(k)}
    return LabeledHMC(tuple(range(n)), tuple(range(k)), mats)


def random_ccqs(rng: np.random.Generator, n_states: int = None) -> CCQS:
    """Random qubit source driven by a random unifilar controller."""
    hmc = random_unifilar_hmc(rng, n_states=n_states)
    emitted = {
        x: qubit_from_bloch(float(rng.random() * np.pi),
                            float(rng.random() * 2 * np.pi))
        for x in hmc.alphabet
    }
    return CCQS(hmc, emitted, name="random")


def random_ket(rng: np.random.Generator) -> QubitPureState:
    v = rng.normal(size=4)
    a = complex(v[0], v[1])
    b = complex(v[2], v[3])
    norm = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
    return QubitPureState(a / norm, b / norm)


# -- independent oracles -------------------------------------------------


def oracle_stationary(hmc: LabeledHMC) -> np.ndarray:
    """Stationary distribution via dense eigendecomposition of T^T."""
    t = hmc.transition_matrix
    w, v = np.linalg.eig(t.T)
    idx = int(np.argmin(np.abs(w - 1.0)))
    pi = np.real(v[:, idx])
    pi = np.abs(pi)
    return pi / pi.sum()


def oracle_word_probability(hmc: LabeledHMC, word, init=None) -> float:
    """Word probability by explicit sum over hidden state paths."""
    pi = oracle_stationary(hmc) if init is None else np.asarray(init)
    n = hmc.n_states
    total = 0.0
    for path in itertools.product(range(n), repeat=len(word) + 1):
        p = pi[path[0]]
        for step, x in enumerate(word):
            p *= hmc.matrix(x)[path[step], path[step + 1]]
            if p == 0.0:
                break
        else:
            total += p
    return total


def oracle_block_entropy(hmc: LabeledHMC, length: int) -> float:
    """Block entropy by enumerating all words of the given length."""
    total = 0.0
    for word in itertools.product(hmc.alphabet, repeat=length):
        p = oracle_word_probability(hmc, word)
        if p > 0.0:
            total -= p * np.log2(p)
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


# -- acceptance reporting -------------------------------------------------

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One verdict line per headline criterion, printed after the run."""
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
