"""Interval Taylor jets of semialgebraic expressions."""
