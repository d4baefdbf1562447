"""Terminology-constrained MT pipeline toolkit.

Stages: terminology-seeded synthetic data generation, corpus filtering,
dual-direction quality scoring, mixed fine-tuning data preparation,
translation, term-coverage checking, terminology-constrained automatic
post-editing, and sentence-level evaluation.  Every stage runs offline
against deterministic mock backends.
"""

__version__ = "0.1.0"
