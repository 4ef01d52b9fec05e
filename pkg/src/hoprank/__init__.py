"""Explanation-statement retrieval, re-ranking glue and graded-relevance evaluation."""

__version__ = "0.1.0"
