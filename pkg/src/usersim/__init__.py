"""Task-oriented dialogue user simulation toolkit.

Subpackages cover the full loop: ontology loading, user-goal bookkeeping,
JSON-sequence action serialization, graph-constrained semantic decoding,
pluggable generators (rule, stochastic, external process), a dialogue
harness with a scripted system, PPO behaviour shaping, and NLG/semantic
evaluation metrics.
"""

__version__ = "0.1.0"
