"""Quantum closeness-testing simulator: oracles, estimation, tester, harness."""

__version__ = "0.1.0"
