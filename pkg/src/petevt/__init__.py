"""Bayesian threshold extreme value analysis of traffic-conflict PETs."""

__version__ = "0.1.0"
