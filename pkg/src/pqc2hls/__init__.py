"""Refactor crypto-kernel C into HLS-ready C with verified, model-assisted transforms."""

__version__ = "0.1.0"
