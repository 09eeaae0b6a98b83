"""Exact logical channels of the concatenated Steane code, with and without Pauli twirling."""

__version__ = "0.1.0"
