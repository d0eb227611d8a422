"""Few-shot claim verification by evidence-conditioned perplexity.

Score claims with a language model (evidence text as the conditioning
prefix), fit a single perplexity threshold on a handful of labeled
examples, and use it to classify, rank, and stress-test claims.
"""

from .backends import LmBackend, NgramModel, RemoteBackend, ScoringMode, TokenLogProbs, train_ngram
from .classify import GridSearch, MajorityBaseline, ThresholdClassifier, fit_threshold
from .data import ClaimRecord, Dataset, VeracityLabel, load_dataset, save_dataset
from .errors import (
    BackendUnavailableError,
    InputError,
    PplcheckError,
    ProvenanceError,
    ValidationError,
)
from .experiment import DEFAULT_SEEDS, baseline_experiment, experiment_from_scores, run_experiment
from .metrics import EvalReport, evaluate
from .negation import NegationRule, negate_claim, negate_dataset, ppl_gap_report
from .ranking import rank_claims
from .scoring import (
    Provenance,
    ScoredClaim,
    perplexity_from_logprobs,
    read_scores,
    score_claim,
    score_dataset,
    write_scores,
)
from .splits import FewShotSplit, make_split

try:
    from importlib.metadata import version as _version

    __version__ = _version("pplcheck")
except Exception:
    __version__ = "0.0.0+unknown"

__all__ = [
    "BackendUnavailableError",
    "ClaimRecord",
    "Dataset",
    "DEFAULT_SEEDS",
    "EvalReport",
    "FewShotSplit",
    "GridSearch",
    "InputError",
    "LmBackend",
    "MajorityBaseline",
    "NegationRule",
    "NgramModel",
    "PplcheckError",
    "Provenance",
    "ProvenanceError",
    "RemoteBackend",
    "ScoredClaim",
    "ScoringMode",
    "ThresholdClassifier",
    "TokenLogProbs",
    "ValidationError",
    "VeracityLabel",
    "baseline_experiment",
    "evaluate",
    "experiment_from_scores",
    "fit_threshold",
    "load_dataset",
    "make_split",
    "negate_claim",
    "negate_dataset",
    "perplexity_from_logprobs",
    "ppl_gap_report",
    "rank_claims",
    "read_scores",
    "run_experiment",
    "save_dataset",
    "score_claim",
    "score_dataset",
    "train_ngram",
    "write_scores",
]
