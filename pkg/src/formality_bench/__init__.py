"""Formality style-transfer benchmark toolkit.

Corpus preparation, a bidirectional rule engine, a formality scorer, n-gram
language models with Moore-Lewis selection, automatic metrics with
correlation and significance analysis, and augmentation/evaluation pipelines.
"""

from ._io import DataError
from .corpus import CorpusSplit, ParallelExample, PseudoPair
from .formality import LinearFormalityModel, predict_formality, train_formality
from .lm import NgramLanguageModel, cross_entropy, moore_lewis_select, train_lm
from .metrics import bleu, combined_score, meaning_proxy, overall_rank, pinc, spearman, ter
from .pipeline import EvaluationReport, Rewriter, evaluate_systems
from .rules import ReverseRuleProbabilities, RuleLexicons, formalize, informalize
from .textcore import TokenizedSentence, detokenize, tokenize

__version__ = "0.1.0"

__all__ = [
    "CorpusSplit", "DataError", "EvaluationReport", "LinearFormalityModel", "NgramLanguageModel",
    "ParallelExample", "PseudoPair", "ReverseRuleProbabilities", "Rewriter", "RuleLexicons",
    "TokenizedSentence", "bleu", "combined_score", "cross_entropy", "detokenize", "evaluate_systems",
    "formalize", "informalize", "meaning_proxy", "moore_lewis_select", "overall_rank", "pinc",
    "predict_formality", "spearman", "ter", "tokenize", "train_formality", "train_lm",
]
