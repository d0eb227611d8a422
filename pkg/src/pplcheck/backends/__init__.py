from .base import LmBackend, ScoringMode, TokenLogProbs
from .ngram import NgramModel, train_ngram
from .remote import RemoteBackend

__all__ = [
    "LmBackend",
    "ScoringMode",
    "TokenLogProbs",
    "NgramModel",
    "train_ngram",
    "RemoteBackend",
]
