"""
Main entry point for the revival gravimetry package.

This module allows the package to be run as a script using `python -m revival_gravimetry`.
"""

from .cli import main

if __name__ == "__main__":
    exit(main())
