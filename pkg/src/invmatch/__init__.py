"""Explainable investor/company matching engine.

Hybrid content + collaborative scoring over learned entity vectors, with
parameterized template explanations and an evaluation harness.
"""

__version__ = "0.1.0"
