"""Mixing times, static and moving-target hitting times for finite Markov chains."""

__version__ = "0.1.0"
