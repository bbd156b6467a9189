"""Rewrite fixtures/ (documents and golden CLI outputs) from the fixture definitions."""

import sys
from pathlib import Path

from probmodels.fixtures import write_fixture_files

if __name__ == "__main__":
    write_fixture_files(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures")
