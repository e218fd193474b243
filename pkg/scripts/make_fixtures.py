#!/usr/bin/env python3
"""Regenerate the committed fixture pack (deterministic).

Usage: python scripts/make_fixtures.py [dest]
"""

import sys
from pathlib import Path

from betaboard.fixtures import write_fixture_pack


def main() -> int:
    dest = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "fixtures"
    manifest = write_fixture_pack(dest)
    print(f"wrote fixture pack to {dest}")
    print(f"  climber stream: {manifest['climber_frames']} frames")
    print(f"  board sequences: {len(manifest['sequences'])}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
