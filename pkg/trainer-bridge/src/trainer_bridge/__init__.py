"""Toy-scale seq2seq fine-tuning and serving for line-aligned trainer files."""

__version__ = "0.1.0"
