"""Canonical example sources bundled with the package.

Each builder returns a small classically controlled qubit source used
throughout the tests and documentation; the JSON files under
``qssp/models/`` are generated from these builders and round-trip through
the model loader byte-for-byte.
"""

from __future__ import annotations

import math

from .hmc import LabeledHMC
from .measured import CCQS
from .quantum import qubit_from_bloch


def golden_mean_orthogonal() -> CCQS:
    """Two-state source emitting orthogonal states |0> and |1>.

    Measured in the observation basis this generates the Golden Mean process
    (no two |0> outcomes in a row): entropy rate 2/3 bits per symbol,
    statistical complexity 0.918 bits.
    """
    hmc = LabeledHMC(
        ("A", "B"),
        ("z1", "z0"),
        {
            "z1": [[0.5, 0.0], [1.0, 0.0]],
            "z0": [[0.0, 0.5], [0.0, 0.0]],
        },
    )
    return CCQS(
        hmc,
        {"z0": qubit_from_bloch(0.0, 0.0), "z1": qubit_from_bloch(math.pi, 0.0)},
        name="golden_mean_orthogonal",
    )


def golden_mean_nonorthogonal() -> CCQS:
    """Golden-Mean-topology source emitting the nonorthogonal pair |+>, |0>.

    No projective measurement preserves unifilarity; the belief presentation
    is finite, countable, or fractal depending on the basis angle, with a
    memoryless basis at the pair bisector theta = pi/4.
    """
    hmc = LabeledHMC(
        ("A", "B"),
        ("xp", "z0"),
        {
            "xp": [[0.5, 0.0], [1.0, 0.0]],
            "z0": [[0.0, 0.5], [0.0, 0.0]],
        },
    )
    return CCQS(
        hmc,
        {"xp": qubit_from_bloch(math.pi / 2.0, 0.0),
         "z0": qubit_from_bloch(0.0, 0.0)},
        name="golden_mean_nonorthogonal",
    )


def nemo_nonorthogonal() -> CCQS:
    """Three-state Nemo-topology source emitting |+> and |0>.

    Measured in the observation basis the machine has a single
    nonunifilar branching and no finite synchronizing word; its belief
    presentation fills a fractal subset of the 2-simplex.
    """
    hmc = LabeledHMC(
        ("A", "B", "C"),
        ("xp", "z0"),
        {
            "xp": [
                [0.0, 0.5, 0.0],
                [0.0, 0.0, 0.75],
                [2.0 / 3.0, 0.0, 0.0],
            ],
            "z0": [
                [0.0, 0.0, 0.5],
                [0.0, 0.0, 0.25],
                [1.0 / 3.0, 0.0, 0.0],
            ],
        },
    )
    return CCQS(
        hmc,
        {"xp": qubit_from_bloch(math.pi / 2.0, 0.0),
         "z0": qubit_from_bloch(0.0, 0.0)},
        name="nemo_nonorthogonal",
    )


def random_insertion() -> CCQS:
    """Three-state random-insertion source emitting |a> (Bloch angle 2 pi/5)
    and |0>.

    The generator produces 2/3 bits per symbol with uniform stationary
    distribution; its memoryless basis sits at theta = pi/5.
    """
    hmc = LabeledHMC(
        ("A", "B", "C"),
        ("a", "z0"),
        {
            "a": [
                [0.5, 0.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.5, 0.0, 0.0],
            ],
            "z0": [
                [0.0, 0.5, 0.0],
                [0.0, 0.0, 0.0],
                [0.0, 0.5, 0.0],
            ],
        },
    )
    return CCQS(
        hmc,
        {"a": qubit_from_bloch(2.0 * math.pi / 5.0, 0.0),
         "z0": qubit_from_bloch(0.0, 0.0)},
        name="random_insertion",
    )


def state_pair(alpha: float = math.pi / 3.0) -> CCQS:
    """Minimal two-state source emitting a nonorthogonal pair.

    Symbol "psi" emits the state at Bloch angle ``alpha``; symbol "phi"
    emits |0>.  This is the default source of the unambiguous-discrimination
    study, which varies ``alpha`` over its grid.
    """
    hmc = LabeledHMC(
        ("A", "B"),
        ("psi", "phi"),
        {
            "psi": [[0.5, 0.0], [1.0, 0.0]],
            "phi": [[0.0, 0.5], [0.0, 0.0]],
        },
    )
    return CCQS(
        hmc,
        {"psi": qubit_from_bloch(float(alpha), 0.0),
         "phi": qubit_from_bloch(0.0, 0.0)},
        name="state_pair",
    )


BUILDERS = {
    "golden_mean_orthogonal": golden_mean_orthogonal,
    "golden_mean_nonorthogonal": golden_mean_nonorthogonal,
    "nemo_nonorthogonal": nemo_nonorthogonal,
    "random_insertion": random_insertion,
    "state_pair": state_pair,
}
