"""Regenerate the bundled model files from the canonical builders.

Run from the repository root:  python tools/generate_models.py
"""

from __future__ import annotations

from pathlib import Path

from qssp.examples import BUILDERS
from qssp.modelio import save_model


def main() -> None:
    out_dir = Path(__file__).resolve().parent.parent / "src" / "qssp" / "models"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, builder in BUILDERS.items():
        path = out_dir / f"{name}.json"
        save_model(builder(), path)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
