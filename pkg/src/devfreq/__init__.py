"""Deviation frequencies of Brownian path approximations.

Simulation of Brownian path constructions, event schedules for classical
almost-sure path properties, closed-form tail bounds on how often those events
occur, and Monte Carlo compliance checks comparing the two.
"""

__version__ = "0.1.0"
