"""Scoring learned lexicons against a gold lexicon.

A learned pair is correct when some gold pair has the same phrase and an
isomorphic meaning.  Weighted variants weight each pair by the word's
frequency in the entire corpus and normalize by the summed weights of the
respective denominators.  Gold entries with the empty meaning describe
function words; the learner never proposes empty meanings, so those entries
are excluded from scoring.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from .learner import learn_lexicon
from .terms import derive_rng


@dataclass
class EvalReport:
    precision: float
    recall: float
    weighted_precision: float
    weighted_recall: float
    n_correct: int
    n_learned: int
    n_gold: int

    def to_dict(self):
        return {
            "precision": self.precision,
            "recall": self.recall,
            "weighted_precision": self.weighted_precision,
            "weighted_recall": self.weighted_recall,
            "n_correct": self.n_correct,
            "n_learned": self.n_learned,
            "n_gold": self.n_gold,
        }


def _unique_pairs(lexicon):
    pairs = {}
    for entry in lexicon:
        if not entry.meaning.trees:
            continue
        pairs.setdefault((entry.phrase, entry.meaning.key), entry)
    return pairs


def score_lexicon(learned, gold, freq=None):
    """Pairwise precision/recall of a learned lexicon against gold, plus the
    frequency-weighted variants.  ``freq`` maps words to whole-corpus counts;
    missing words weigh 0."""
    freq = freq or {}
    learned_pairs = _unique_pairs(learned)
    gold_pairs = _unique_pairs(gold)
    correct = set(learned_pairs) & set(gold_pairs)

    def weight(pair):
        phrase, _ = pair
        return freq.get(" ".join(phrase), 0)

    n_learned = len(learned_pairs)
    n_gold = len(gold_pairs)
    n_correct = len(correct)
    w_correct = sum(weight(p) for p in correct)
    w_learned = sum(weight(p) for p in learned_pairs)
    w_gold = sum(weight(p) for p in gold_pairs)
    return EvalReport(
        precision=n_correct / n_learned if n_learned else 0.0,
        recall=n_correct / n_gold if n_gold else 0.0,
        weighted_precision=w_correct / w_learned if w_learned else 0.0,
        weighted_recall=w_correct / w_gold if w_gold else 0.0,
        n_correct=n_correct,
        n_learned=n_learned,
        n_gold=n_gold,
    )


@dataclass
class LexiconStats:
    coverage_pct: float
    ambiguity: float
    n_entries: int

    def to_dict(self):
        return {
            "coverage_pct": self.coverage_pct,
            "ambiguity": self.ambiguity,
            "n_entries": self.n_entries,
        }


def lexicon_stats(lexicon, n_examples, uncovered):
    """Coverage percentage of the training examples, mean meanings per
    phrase, and entry count."""
    phrases = {entry.phrase for entry in lexicon}
    covered = 100.0 if n_examples == 0 else 100.0 * (n_examples - len(uncovered)) / n_examples
    return LexiconStats(
        coverage_pct=covered,
        ambiguity=len(lexicon) / len(phrases) if phrases else 0.0,
        n_entries=len(lexicon),
    )


def _mean_std(values):
    mean = statistics.fmean(values)
    std = statistics.pstdev(values) if len(values) > 1 else 0.0
    return mean, std


def run_curve_trial(corpus, gold, freq, sizes, seed, trial, bg=None, sampler=None,
                    weights=None, max_phrase_len=2):
    """One shuffled pass: train on prefixes of the stated sizes and score
    each against gold."""
    order = list(range(len(corpus)))
    derive_rng(seed, "curve", trial).shuffle(order)
    points = []
    for size in sizes:
        subset = [corpus[i] for i in order[:size]]
        result = learn_lexicon(subset, bg, sampler, weights, max_phrase_len)
        report = score_lexicon(result.lexicon, gold, freq)
        points.append((size, report, result.coverage_pct))
    return points


def learning_curve(corpus, gold, freq, sizes, trials, seed, bg=None, sampler=None,
                   weights=None, max_phrase_len=2, trial_runner=None):
    """Mean and standard deviation of the evaluation metrics per training
    size over seeded shuffles.  ``trial_runner`` may map the per-trial
    closure over workers; results are merged by trial index either way."""
    for size in sizes:
        if size > len(corpus):
            raise ValueError(f"training size {size} exceeds corpus size {len(corpus)}")
    args = [(corpus, gold, freq, sizes, seed, t, bg, sampler, weights, max_phrase_len)
            for t in range(trials)]
    if trial_runner is None:
        per_trial = [run_curve_trial(*a) for a in args]
    else:
        per_trial = trial_runner(run_curve_trial, args)
    rows = []
    for i, size in enumerate(sizes):
        metrics = {}
        for name in ("precision", "recall", "weighted_precision", "weighted_recall"):
            values = [getattr(per_trial[t][i][1], name) for t in range(trials)]
            metrics[f"{name}_mean"], metrics[f"{name}_std"] = _mean_std(values)
        coverage = [per_trial[t][i][2] for t in range(trials)]
        metrics["coverage_mean"], _ = _mean_std(coverage)
        rows.append({"size": size, **{k: v for k, v in sorted(metrics.items())}})
    return rows


def examples_to_reach(corpus, gold, freq, target_precision, step, max_size, seed,
                      bg=None, sampler=None, weights=None, max_phrase_len=2):
    """Smallest training size (scanned in ``step`` increments) at which
    standard precision first reaches the target; math.inf when it never
    does."""
    order = list(range(len(corpus)))
    derive_rng(seed, "reach").shuffle(order)
    size = step
    while size <= min(max_size, len(corpus)):
        subset = [corpus[i] for i in order[:size]]
        result = learn_lexicon(subset, bg, sampler, weights, max_phrase_len)
        report = score_lexicon(result.lexicon, gold, freq)
        if report.precision >= target_precision:
            return size
        size += step
    return math.inf
