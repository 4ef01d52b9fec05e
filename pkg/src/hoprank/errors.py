"""Shared exception types. Anything derived from DataError maps to CLI exit code 2."""


class DataError(Exception):
    """Malformed or inconsistent input data."""


class CorpusFormatError(DataError):
    """Structural problem in a corpus file (tables, questions, ratings)."""


class ResourceError(DataError):
    """Bad preprocessing resource file (stopwords, lemma map)."""
