"""carecost: cost-aware decision support for binary risk predictions.

Turns risk scores into threshold-level expected-cost curves, decision-curve
net benefit, and patient-level cost narratives assembled for LLM agents.
"""

__version__ = "0.1.0"
