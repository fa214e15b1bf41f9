"""Memristive actor-critic simulator for the rotary inverted pendulum."""

__version__ = "0.1.0"
