"""
Run the sketchbound CLI from a source checkout.

Usage:
    python sketchbound_cli.py lemma-suite --seed 0
    python sketchbound_cli.py experiment --config configs/fig2.toml
"""
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from sketchbound.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
