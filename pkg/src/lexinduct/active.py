"""Certainty-based selective sampling.

The learner bootstraps on a small annotated pool, scores every unannotated
sentence from the heuristic values of the lexicon entries learned so far,
and asks for the k least certain sentences each round.  A sentence's
certainty averages its phrases' certainties: a phrase with lexicon entries
contributes the mean of their selection scores, an unknown single word
contributes zero, unknown multi-word phrases are not counted, and phrases
known in advance (background entries, stop list) are excluded.  Longer
sentences with few known phrases therefore rank as less certain.  The
random-selection baseline shares the bootstrap so curves pair up.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import BackgroundLexicon, extract_phrases
from .evaluate import score_lexicon
from .learner import learn_lexicon
from .terms import derive_rng


@dataclass
class ActiveConfig:
    n_bootstrap: int = 25
    batch_k: int = 10
    rounds: int = 10
    seed: int = 0


def sentence_certainty(tokens, lexicon, bg=None, max_phrase_len=2):
    """Mean certainty of the sentence's counted phrases; zero when nothing
    counts."""
    known = bg.known_phrases() if bg is not None else set()
    scores = {}
    for entry in lexicon:
        scores.setdefault(entry.phrase, []).append(entry.score_at_selection)
    total = 0.0
    counted = 0
    for phrase in extract_phrases(list(tokens), max_phrase_len):
        if phrase in known:
            continue
        got = scores.get(phrase)
        if got is not None:
            total += sum(got) / len(got)
            counted += 1
        elif len(phrase) == 1:
            counted += 1
    return total / counted if counted else 0.0


def select_batch(pool_ids, corpus_by_id, lexicon, bg, k, rng, max_phrase_len=2):
    """The k pool examples with the lowest certainty; ties broken by a
    seeded shuffle for reproducibility."""
    if not pool_ids:
        raise ValueError("empty pool")
    if k > len(pool_ids):
        raise ValueError("batch size exceeds pool")
    shuffled = list(pool_ids)
    rng.shuffle(shuffled)
    ranked = sorted(
        shuffled,
        key=lambda eid: sentence_certainty(
            corpus_by_id[eid].tokens, lexicon, bg, max_phrase_len
        ),
    )
    return ranked[:k]


def run_trial(corpus, cfg, strategy, gold=None, freq=None, bg=None, sampler=None,
              weights=None, max_phrase_len=2, trial=0):
    """One active-learning run.  Returns [(n_annotated, measurement)]: an
    EvalReport against gold when gold is given, otherwise training coverage
    and lexicon size.  The bootstrap draw depends only on (seed, trial), so
    an active run and a random run with the same seed pair up."""
    if len(corpus) < cfg.n_bootstrap + cfg.batch_k:
        raise ValueError("corpus too small for the bootstrap plus one batch")
    bg = bg if bg is not None else BackgroundLexicon()
    by_id = {ex.id: ex for ex in corpus}
    ids = sorted(by_id)
    boot_rng = derive_rng(cfg.seed, "bootstrap", trial)
    annotated = sorted(boot_rng.sample(ids, cfg.n_bootstrap))
    pool = [eid for eid in ids if eid not in set(annotated)]

    def measure(result):
        if gold is not None:
            return score_lexicon(result.lexicon, gold, freq)
        return {
            "coverage_pct": result.coverage_pct,
            "n_entries": len(result.lexicon),
        }

    result = learn_lexicon([by_id[eid] for eid in annotated], bg, sampler, weights, max_phrase_len)
    curve = [(len(annotated), measure(result))]
    for round_no in range(cfg.rounds):
        if len(pool) < cfg.batch_k:
            break
        if strategy == "active":
            rng = derive_rng(cfg.seed, "tie", trial, round_no)
            batch = select_batch(pool, by_id, result.lexicon, bg, cfg.batch_k, rng, max_phrase_len)
        elif strategy == "random":
            rng = derive_rng(cfg.seed, "random", trial, round_no)
            batch = rng.sample(pool, cfg.batch_k)
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        batch_set = set(batch)
        annotated = sorted(annotated + batch)
        pool = [eid for eid in pool if eid not in batch_set]
        result = learn_lexicon([by_id[eid] for eid in annotated], bg, sampler, weights, max_phrase_len)
        curve.append((len(annotated), measure(result)))
    return curve


def curve_auc(curve, metric="weighted_recall"):
    """Trapezoidal area under (n_annotated, metric)."""
    points = [(n, getattr(m, metric) if not isinstance(m, dict) else m[metric])
              for n, m in curve]
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def examples_to_reach_level(curve, level, metric="weighted_recall"):
    """Smallest annotation count at which the curve reaches ``level``;
    None when it never does."""
    for n, m in curve:
        value = getattr(m, metric) if not isinstance(m, dict) else m[metric]
        if value >= level - 1e-12:
            return n
    return None
