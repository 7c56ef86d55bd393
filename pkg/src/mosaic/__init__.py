"""Toolkit for exact and fuzzy duplicate analysis of tokenized corpora,
n-gram deduplication simulation, and memorization measurement from
membership-inference scores."""

__version__ = "0.1.0"
