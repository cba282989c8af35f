"""
linksim — Sparse-precoded turbo receiver link simulator.

DFT / sparse-DFT / sparse-Walsh-Hadamard frequency-domain precoding over a
static frequency-selective channel, with two iterative receiver families:
enumeration-based SWH MAP detection and the SILE-EPIC equalizer.

See LOCK.md for the scope contract, guarantees, and non-goals.
"""

__version__ = "0.1.0"
SIMULATOR_VERSION = "v0"
PACKAGE_NAME = "linksim"
SCHEMA_VERSION = "0.1"
