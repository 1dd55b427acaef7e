"""Run the blochobs command line with ``python -m python_blochobs``."""

from python_blochobs.cli import main_entry

main_entry()
