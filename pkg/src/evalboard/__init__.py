"""Evaluation-as-a-service leaderboard with utility-based dynamic ranking."""

__version__ = "0.1.0"
