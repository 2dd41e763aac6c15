"""
Command-line entry point: python backend/main.py <command> [options]
"""

import sys
from pathlib import Path

# Add backend directory to Python path
backend_dir = Path(__file__).parent
sys.path.insert(0, str(backend_dir))

from cli.app import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
