"""Sparse SpGEMM and Cholesky with host-side RIR preprocessing and an accelerator model."""

__version__ = "0.1.0"
