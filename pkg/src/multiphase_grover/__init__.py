"""Grover search with a multiphase oracle and generalised Householder
diffusion, plus the robustness-analysis pipeline built on it."""

__version__ = "0.1.0"
