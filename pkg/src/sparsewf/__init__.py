"""Noisy sparse phase retrieval by thresholded Wirtinger flow."""

__version__ = "0.1.0"
