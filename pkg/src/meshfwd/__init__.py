"""Discrete-event simulation of GSR and AAL2R forwarding in multi-radio mesh networks."""

__version__ = "0.1.0"
