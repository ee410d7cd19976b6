"""
main.py
-------
Entry point for the rank-one preserver toolkit. Equivalent to the
``rank1-preservers`` console script; see `core.cli` for the commands.

Author: infoyouth
Date: 2026-10-18
"""
import sys

from core.cli import main

if __name__ == "__main__":
    sys.exit(main())
