"""Few-copy probabilistic entanglement detection on noisy graph states."""

__version__ = "0.1.0"
