"""Measured machines: the classical HMC induced by measuring a qubit source.

A classically controlled qubit source (CCQS) is a labeled HMC whose symbols
emit pure qubit states.  Applying a fixed single-state measurement to every
emission yields a classical HMC over measurement outcomes with the same
hidden states and the same stationary distribution:

    T^x = sum_rho  T^(rho) * Tr(E_x rho)

This module builds that machine, constructs the memoryless (pair-bisecting)
bases, and checks the structural conditions under which a measurement
preserves unifilarity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AlphabetMismatch, IdenticalStates
from .hmc import LabeledHMC, ZERO_TOL, ensure_valid, unifilarity
from .quantum import (
    Measurement,
    QubitPureState,
    outcome_probability,
    projective_basis,
    trace_distance,
)


class CCQS:
    """A qubit source: a labeled HMC plus one pure state per symbol.

    The controller is expected to be unifilar; a nonunifilar controller is
    accepted with a warning since the measured-machine construction applies
    unchanged.
    """

    __slots__ = ("hmc", "quantum_alphabet", "name")

    def __init__(self, hmc: LabeledHMC, quantum_alphabet: dict, name: str = ""):
        if set(quantum_alphabet) != set(hmc.alphabet):
            missing = set(hmc.alphabet) - set(quantum_alphabet)
            extra = set(quantum_alphabet) - set(hmc.alphabet)
            raise AlphabetMismatch(
                "quantum alphabet does not match machine alphabet",
                missing=sorted(map(repr, missing)),
                extra=sorted(map(repr, extra)),
            )
        for sym, st in quantum_alphabet.items():
            if not isinstance(st, QubitPureState):
                raise AlphabetMismatch(
                    f"symbol {sym!r} is not mapped to a qubit state", symbol=repr(sym)
                )
        self.hmc = hmc
        self.quantum_alphabet = dict(quantum_alphabet)
        self.name = name
        if not unifilarity(hmc).unifilar:
            warnings.warn(
                "controller is nonunifilar; measured-machine derivation still applies",
                stacklevel=2,
            )

    def emitted_states(self) -> list:
        """Distinct emitted states (by density matrix), in alphabet order."""
        out = []
        for sym in self.hmc.alphabet:
            st = self.quantum_alphabet[sym]
            if not any(st.close_to(o) for o in out):
                out.append(st)
        return out

    def __repr__(self) -> str:
        return f"CCQS(name={self.name!r}, hmc={self.hmc!r})"


class MeasuredHMC(LabeledHMC):
    """A classical HMC derived by measuring a CCQS; carries provenance."""

    __slots__ = ("provenance",)

    def __init__(self, states, alphabet, labeled_matrices, provenance: dict):
        super().__init__(states, alphabet, labeled_matrices)
        self.provenance = dict(provenance)


def derive_measured_hmc(source: CCQS, m: Measurement) -> MeasuredHMC:
    """Apply a measurement to every emission of the source.

    The outcome labels of the measurement become the new alphabet.  Entries
    below the structural-zero tolerance are pruned to exact zero so that
    unifilarity detection and belief branching see no floating-point ghost
    edges.  The result has the same states and stationary distribution as the
    source's internal chain.
    """
    ensure_valid(source.hmc)
    n = source.hmc.n_states
    mats = {x: np.zeros((n, n)) for x in m.outcome_labels}
    for sym in source.hmc.alphabet:
        rho = source.quantum_alphabet[sym]
        t_sym = source.hmc.matrix(sym)
        for x, e in zip(m.outcome_labels, m.operators):
            p = outcome_probability(e, rho)
            if p > 0.0:
                mats[x] += t_sym * p
    for x in m.outcome_labels:
        mat = mats[x]
        mat[mat < ZERO_TOL] = 0.0
    provenance = {
        "source": source.name or "unnamed",
        "measurement_kind": m.kind,
        "measurement_params": dict(m.params),
        "outcome_labels": list(m.outcome_labels),
    }
    return MeasuredHMC(source.hmc.states, m.outcome_labels, mats, provenance)


def _bloch_vector(state: QubitPureState) -> np.ndarray:
    d = state.density
    return np.array(
        [2.0 * d[0, 1].real, -2.0 * d[0, 1].imag, (d[0, 0] - d[1, 1]).real]
    )


def _any_perpendicular(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    helper = np.array([1.0, 0.0, 0.0])
    if abs(v @ helper) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    w = helper - (helper @ v) * v
    return w / np.linalg.norm(w)


def memoryless_basis(rho_a: QubitPureState, rho_b: QubitPureState,
                     circ_angle: float = 0.0) -> Measurement:
    """A projective basis equidistant from both emitted states.

    Measuring in such a basis makes every outcome equally likely for both
    states, so the labeled matrices become proportional to the internal chain
    and the measured process is i.i.d.  The valid bases form a circle on the
    Bloch sphere (directions equidistant from both Bloch vectors);
    ``circ_angle`` parametrizes it, with 0 returning the in-plane bisector of
    the pair as the canonical representative.
    """
    if trace_distance(rho_a, rho_b) <= 1e-9:
        raise IdenticalStates("memoryless basis needs two distinct states")
    na = _bloch_vector(rho_a)
    nb = _bloch_vector(rho_b)
    mid = na + nb
    if np.linalg.norm(mid) < 1e-12:
        # Antipodal (orthogonal) pair: every equatorial direction bisects.
        u = _any_perpendicular(na)
        w = np.cross(na / np.linalg.norm(na), u)
    else:
        u = mid / np.linalg.norm(mid)
        w = np.cross(na, nb)
        w /= np.linalg.norm(w)
    direction = math.cos(circ_angle) * u + math.sin(circ_angle) * w
    theta = math.acos(max(-1.0, min(1.0, direction[2])))
    phi = math.atan2(direction[1], direction[0]) if abs(theta) > 1e-15 else 0.0
    if phi < 0.0:
        phi += 2.0 * math.pi
    return projective_basis(theta, phi)


@dataclass(frozen=True)
class StatePreservation:
    """Structural conditions at one hidden state.

    ``n_targets`` counts distinct successors; ``orthogonal_pair`` and
    ``aligned`` are None when fewer than two successors exist (the conditions
    are vacuous); ``confusing_outcomes`` lists outcome labels that assign
    positive probability to emissions bound for different successors.
    """

    state: object
    n_targets: int
    orthogonal_pair: bool | None
    aligned: bool | None
    confusing_outcomes: tuple


@dataclass(frozen=True)
class PreservationReport:
    """Prediction of measured-machine unifilarity from structural conditions.

    A measurement preserves unifilarity exactly when, at every hidden state,
    no outcome can be produced by emissions leading to two different
    successors.  For a projective measurement this reduces to: at most two
    successors, the emitted pair orthogonal, and the basis aligned with the
    pair.
    """

    predicted_unifilar: bool
    states: tuple


def unifilarity_preservation_check(source: CCQS, m: Measurement) -> PreservationReport:
    ensure_valid(source.hmc)
    hmc = source.hmc
    reports = []
    overall = True
    for i, state in enumerate(hmc.states):
        # Outgoing edges as (emitted state, successor, probability).
        edges = []
        for sym in hmc.alphabet:
            row = hmc.matrix(sym)[i]
            for j in np.nonzero(row > ZERO_TOL)[0]:
                edges.append((source.quantum_alphabet[sym], int(j), float(row[j])))
        targets = sorted({j for _, j, _ in edges})
        confusing = []
        for x, e in zip(m.outcome_labels, m.operators):
            hit = set()
            for rho, j, p in edges:
                if p * outcome_probability(e, rho) > ZERO_TOL:
                    hit.add(j)
            if len(hit) > 1:
                confusing.append(x)
        orthogonal = None
        aligned = None
        if len(targets) >= 2:
            # Distinct emitted states bound for different successors.
            per_target = {}
            for rho, j, _ in edges:
                per_target.setdefault(j, []).append(rho)
            pairs = []
            ts = list(per_target)
            for ai in range(len(ts)):
                for bi in range(ai + 1, len(ts)):
                    for ra in per_target[ts[ai]]:
                        for rb in per_target[ts[bi]]:
                            pairs.append((ra, rb))
            orthogonal = all(trace_distance(ra, rb) > 1.0 - 1e-9 for ra, rb in pairs)
            aligned = all(
                min(outcome_probability(e, ra), outcome_probability(e, rb)) <= ZERO_TOL
                for ra, rb in pairs
                for e in m.operators
            )
        ok = not confusing
        overall = overall and ok
        reports.append(
            StatePreservation(
                state=state,
                n_targets=len(targets),
                orthogonal_pair=orthogonal,
                aligned=aligned,
                confusing_outcomes=tuple(confusing),
            )
        )
    return PreservationReport(predicted_unifilar=overall, states=tuple(reports))
