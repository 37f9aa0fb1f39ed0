"""
orbit-bounds launcher for a source checkout.

Usage:
    # Direct execution
    python scripts/orbit_bounds.py tau src/orbit_bounds_cli/tests/data/split_third.yaml

    # With debug logging
    LOG_LEVEL=DEBUG python scripts/orbit_bounds.py oracle

Environment Variables:
    LOG_LEVEL, LOG_FILE, LOG_FORMAT : logging configuration
    ORBIT_BOUNDS_CACHE              : field cache file
"""

import sys
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from orbit_bounds_cli.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
