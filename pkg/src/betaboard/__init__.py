"""Climbing move-sequence toolkit.

Turns pose-landmark streams into hold and move sequences, synthesizes
skeleton animations from move sequences, and trains small from-scratch
models that predict the order in which holds are used.
"""

__version__ = "0.1.0"
