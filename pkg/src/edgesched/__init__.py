"""Delay-minimising request scheduling over hybrid (public/private) edge servers."""

__version__ = "0.1.0"
