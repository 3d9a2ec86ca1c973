"""Lexicon induction from sentences paired with tree-structured meanings."""

from .active import ActiveConfig, run_trial, select_batch, sentence_certainty
from .candidates import FractureCapError, SamplerConfig, fracture, lgg_refine, lics
from .corpus import BackgroundLexicon, CorpusError, Example, extract_phrases, load_corpus, preprocess, tokenize
from .evaluate import EvalReport, LexiconStats, learning_curve, lexicon_stats, score_lexicon
from .learner import HeuristicWeights, LearnResult, Lexicon, LexiconEntry, heuristic_value, learn_lexicon
from .synth import GenConfig, GenError, GoldLexicon, gen_corpus, gen_gold_lexicon, zipf_pick
from .terms import (
    Embedding,
    Forest,
    ParseError,
    TermError,
    count_interpretations,
    iso_equal,
    occurrences,
    parse_term,
    render_term,
    subtract,
    vertex_count,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
