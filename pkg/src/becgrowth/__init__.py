"""Condensate growth kinetics in a harmonic trap: rate equation, birth-death
master equation, and numerical cross-checks of the analytic shortcuts."""

__version__ = "0.1.0"
