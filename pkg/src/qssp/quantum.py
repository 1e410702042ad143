"""Pure qubit states and single-state measurements.

States are pairs of complex amplitudes with Bloch-angle construction;
measurements are ordered lists of positive operators summing to identity,
either projective bases or POVMs (including the unambiguous-state-
discrimination POVM for a nonorthogonal pair).  All operators are 2 x 2, so
positivity and orthogonality checks use closed forms instead of an
eigensolver.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import IdenticalStates

#: Tolerance for normalization of kets.
NORM_TOL = 1e-12

#: Tolerance for operator-level checks (completeness, positivity, purity).
OP_TOL = 1e-10


class QubitPureState:
    """A pure qubit state |psi> = a|0> + b|1>.

    The density matrix is derived on construction.  Global phase is
    unobservable: equality tests compare density matrices, not kets.  When the
    state was built from Bloch angles they are kept for round-tripping model
    files.
    """

    __slots__ = ("a", "b", "_density", "bloch_angles")

    def __init__(self, a: complex, b: complex, bloch_angles: tuple | None = None):
        a = complex(a)
        b = complex(b)
        norm = abs(a) ** 2 + abs(b) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"ket not normalized: |a|^2+|b|^2 = {norm:.15g}")
        self.a = a
        self.b = b
        rho = np.array(
            [[a * a.conjugate(), a * b.conjugate()],
             [b * a.conjugate(), b * b.conjugate()]],
            dtype=complex,
        )
        rho.setflags(write=False)
        self._density = rho
        self.bloch_angles = bloch_angles

    @property
    def ket(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=complex)

    @property
    def density(self) -> np.ndarray:
        """Density matrix rho = |psi><psi| (Hermitian, trace 1, idempotent)."""
        return self._density

    def overlap(self, other: "QubitPureState") -> complex:
        """Inner product <self|other>."""
        return self.a.conjugate() * other.a + self.b.conjugate() * other.b

    def perpendicular(self) -> "QubitPureState":
        """The unique state orthogonal to this one (up to phase)."""
        return QubitPureState(-self.b.conjugate(), self.a.conjugate())

    def close_to(self, other: "QubitPureState", tol: float = 1e-10) -> bool:
        return bool(np.abs(self._density - other._density).max() <= tol)

    def __repr__(self) -> str:
        return f"QubitPureState(a={self.a:.6g}, b={self.b:.6g})"


def qubit_from_bloch(theta: float, phi: float) -> QubitPureState:
    """cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>."""
    half = 0.5 * float(theta)
    return QubitPureState(
        math.cos(half),
        complex(math.cos(phi), math.sin(phi)) * math.sin(half),
        bloch_angles=(float(theta), float(phi)),
    )


class Measurement:
    """An ordered list of positive operators summing to identity.

    ``kind`` is "projective" (exactly two mutually orthogonal projectors) or
    "povm".  ``outcome_labels`` supplies one symbol per operator; these become
    the alphabet of the measured machine.
    """

    __slots__ = ("operators", "outcome_labels", "kind", "params")

    def __init__(self, operators, outcome_labels, kind: str, params: dict | None = None):
        ops = []
        for e in operators:
            m = np.array(e, dtype=complex)
            if m.shape != (2, 2):
                raise ValueError("measurement operators must be 2x2")
            if np.abs(m - m.conjugate().T).max() > OP_TOL:
                raise ValueError("measurement operator not Hermitian")
            tr = m[0, 0].real + m[1, 1].real
            det = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).real
            if tr < -OP_TOL or det < -OP_TOL:
                raise ValueError("measurement operator not positive semidefinite")
            m.setflags(write=False)
            ops.append(m)
        labels = tuple(outcome_labels)
        if len(labels) != len(ops):
            raise ValueError("one outcome label per operator is required")
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate outcome labels")
        total = sum(ops)
        if np.abs(total - np.eye(2)).max() > OP_TOL:
            raise ValueError("measurement operators do not sum to identity")
        if kind == "projective":
            if len(ops) != 2:
                raise ValueError("a projective measurement has exactly two operators")
            for i, ei in enumerate(ops):
                for j, ej in enumerate(ops):
                    target = ei if i == j else np.zeros((2, 2))
                    if np.abs(ei @ ej - target).max() > OP_TOL:
                        raise ValueError("projectors not mutually orthogonal/idempotent")
        elif kind != "povm":
            raise ValueError(f"unknown measurement kind {kind!r}")
        self.operators = tuple(ops)
        self.outcome_labels = labels
        self.kind = kind
        #: Construction parameters (angles etc.) carried for provenance.
        self.params = dict(params or {})

    def __len__(self) -> int:
        return len(self.operators)

    def __repr__(self) -> str:
        return f"Measurement(kind={self.kind!r}, outcomes={list(self.outcome_labels)!r})"


def projective_basis(theta: float, phi: float) -> Measurement:
    """Projective measurement onto the Bloch-angle basis.

    |psi_0> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
    |psi_1> = sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>
    Outcome labels are 0 and 1.
    """
    half = 0.5 * float(theta)
    phase = complex(math.cos(phi), math.sin(phi))
    psi0 = QubitPureState(math.cos(half), phase * math.sin(half))
    psi1 = QubitPureState(math.sin(half), -phase * math.cos(half))
    return Measurement(
        [psi0.density, psi1.density],
        [0, 1],
        "projective",
        params={"theta": float(theta), "phi": float(phi)},
    )


def outcome_probability(operator, rho: QubitPureState) -> float:
    """Tr(E rho), clamped into [0, 1]."""
    e = np.asarray(operator, dtype=complex)
    d = rho.density
    val = (e[0, 0] * d[0, 0] + e[0, 1] * d[1, 0]
           + e[1, 0] * d[0, 1] + e[1, 1] * d[1, 1]).real
    return min(1.0, max(0.0, float(val)))


def trace_distance(rho1: QubitPureState, rho2: QubitPureState) -> float:
    """(1/2) Tr |rho1 - rho2|; for pure states sqrt(1 - |<psi1|psi2>|^2)."""
    ov = rho1.overlap(rho2)
    val = 1.0 - (ov.real ** 2 + ov.imag ** 2)
    return math.sqrt(max(0.0, val))


def usd_povm(psi: QubitPureState, phi_state: QubitPureState) -> Measurement:
    """Unambiguous-state-discrimination POVM for a pair of distinct states.

    Outcome 0 certifies |psi>, outcome 1 certifies |phi>, outcome 2 is
    inconclusive:

        E_psi = |phi_perp><phi_perp| / (1 + |<phi|psi>|)
        E_phi = |psi_perp><psi_perp| / (1 + |<phi|psi>|)
        E_?   = I - E_psi - E_phi

    For orthogonal inputs the inconclusive operator vanishes and the POVM
    reduces to the projective basis of the pair.
    """
    c = abs(phi_state.overlap(psi))
    # The overlap deficit 1 - c resolves identity far below what the
    # trace distance can (sqrt amplifies rounding near zero).
    if 1.0 - c <= 1e-12:
        raise IdenticalStates(
            "unambiguous discrimination needs two distinct states"
        )
    scale = 1.0 / (1.0 + c)
    e_psi = scale * phi_state.perpendicular().density
    e_phi = scale * psi.perpendicular().density
    e_inc = np.eye(2, dtype=complex) - e_psi - e_phi
    return Measurement(
        [e_psi, e_phi, e_inc],
        [0, 1, 2],
        "povm",
        params={"povm": "usd", "overlap": c},
    )
