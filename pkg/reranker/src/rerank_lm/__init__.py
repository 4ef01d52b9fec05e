"""Fine-tunes a pretrained encoder to regress expert ratings of
(question+answer, explanation) pairs and emits score files for rank ensembling.

Coordinates with the retrieval pipeline through files only: it consumes the
normalized snapshot and candidate export formats and produces the
question_id/statement_id/score file format.
"""

__version__ = "0.1.0"


class RerankerError(Exception):
    """Fatal data or checkpoint problem."""
