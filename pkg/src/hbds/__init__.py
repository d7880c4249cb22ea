"""Vehicular delay-tolerant-network simulator with an honesty-based democratic
incentive scheme (HBDS), watchdog monitoring, reputation ledger, and baseline
protocols for comparison experiments."""

__version__ = "0.1.0"
