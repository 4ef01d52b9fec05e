from dataclasses import asdict, dataclass

NEGATIVE_SAMPLING_MODES = ("off", "random", "retrieval_hard")


@dataclass(frozen=True)
class RerankerConfig:
    checkpoint_id: str
    seed: int = 42
    epochs: int = 3
    batch_size: int = 16
    learning_rate: float = 2e-5
    max_sequence_length: int = 128
    negative_sampling: str = "off"
    negatives_per_question: int = 0
    # Plain space between question text and correct answer before [SEP];
    # set e.g. " | " to insert an explicit separator instead.
    answer_separator: str = " "

    def __post_init__(self):
        for name in ("epochs", "batch_size", "max_sequence_length"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.negative_sampling not in NEGATIVE_SAMPLING_MODES:
            raise ValueError(f"unknown negative_sampling {self.negative_sampling!r}")
        if self.negative_sampling != "off" and self.negatives_per_question <= 0:
            raise ValueError("negatives_per_question must be positive when sampling is on")

    def to_dict(self) -> dict:
        return asdict(self)
