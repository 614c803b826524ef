#!/usr/bin/env -S uv run --script
# /// script
# requires-python = ">=3.11"
# dependencies = [
#     "numpy>=2.2.5",
#     "scipy>=1.13",
#     "tomlkit>=0.12",
#     "tqdm>=4.66",
# ]
# ///

import sys
from pathlib import Path

"""
Runs the simulator straight from a checkout, same as the installed ris-anm-sim command, e.g.

    ./runSimulation.py run --config configs/setup2.toml --trials 10
"""

sys.path.insert(0, str(Path(__file__).resolve().parent / "scripts"))

from hybridris.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
