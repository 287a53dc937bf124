"""Certified cellular C^r parametrizations of semialgebraic sets and functions in dimensions 1 and 2."""

__version__ = "0.1.0"
