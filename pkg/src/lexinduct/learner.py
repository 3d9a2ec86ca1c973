"""Greedy covering learner.

Candidate (phrase, meaning) pairs are scored by a weighted sum of a fit term
and a generality term and added to the lexicon one at a time.  Learning an
entry marks its meaning occurrence covered in every supporting example and
consumes one occurrence of the phrase there; candidates of phrases sharing
those examples are then generalized to exclude the newly covered vertices,
and phrases whose candidates die are re-derived from the uncovered
remainders.  The loop ends when every representation is covered or no
candidates remain.

Scoring: for a candidate (p, m),

    score = w_fit * |support|^2 / |p|  -  w_gen * vertex_count(m)

where |support| counts examples in which p is still available and m embeds in
the uncovered remainder, and |p| counts examples in which p is still
available and some meaning is still uncovered.  Both shrink as learning
progresses.  Ties are broken by fewer current meanings for the phrase, then
shorter phrases, then candidate insertion order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .candidates import SamplerConfig, fracture_candidates, lics_candidates
from .corpus import BackgroundLexicon, phrase_positions, preprocess
from .terms import (
    Forest,
    assign_vids,
    canonical,
    derive_rng,
    occurrences,
    render_term,
    subtract,
    vertex_count,
)


@dataclass
class HeuristicWeights:
    w_fit: float = 10.0
    w_gen: float = 1.0


def heuristic_value(n_support, n_phrase, n_vertices, weights):
    """Score of one candidate given its support size, its phrase's live
    example count, and its meaning's vertex count."""
    if n_phrase <= 0:
        raise ValueError("phrase must occur in at least one live example")
    return weights.w_fit * (n_support * n_support / n_phrase) + weights.w_gen * (-n_vertices)


@dataclass
class CandidatePair:
    phrase: tuple
    meaning: Forest
    key: str
    vcount: int
    support: set
    seq: int


@dataclass
class LexiconEntry:
    phrase: tuple
    meaning: Forest
    score_at_selection: float

    @property
    def phrase_text(self):
        return " ".join(self.phrase)


class Lexicon:
    def __init__(self, entries=()):
        self.entries = list(entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def by_phrase(self):
        out = {}
        for entry in self.entries:
            out.setdefault(entry.phrase, []).append(entry)
        return out

    def save(self, path):
        with open(path, "w", encoding="utf8") as fh:
            for entry in self.entries:
                fh.write(f"{entry.phrase_text}\t{render_term(entry.meaning)}\n")

    @classmethod
    def load(cls, path):
        from .terms import parse_term

        entries = []
        with open(path, encoding="utf8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                phrase, _, term = line.partition("\t")
                meaning = parse_term(term, allow_empty=True)
                entries.append(LexiconEntry(tuple(phrase.split()), meaning, 0.0))
        return cls(entries)


@dataclass
class TraceStep:
    step: int
    phrase: tuple
    meaning: str
    score: float
    n_support: int
    n_phrase: int
    covered: dict          # example id -> newly covered vertex ids (sorted)
    consumed: dict         # example id -> consumed token positions
    regenerated: list      # phrases re-derived after this selection


@dataclass
class LearnResult:
    lexicon: Lexicon
    trace: list
    uncovered: dict        # example id -> rendered uncovered remainder
    n_examples: int
    n_initial_candidates: int
    examples: list = field(default_factory=list, repr=False)

    @property
    def coverage_pct(self):
        if self.n_examples == 0:
            return 100.0
        return 100.0 * (self.n_examples - len(self.uncovered)) / self.n_examples


class _ExState:
    __slots__ = ("id", "tokens", "forest", "covered", "consumed", "remainder", "phrases")

    def __init__(self, eid, tokens, forest, phrases):
        self.id = eid
        self.tokens = tokens
        self.forest = forest
        self.covered = set()
        self.consumed = set()
        self.remainder = forest
        self.phrases = phrases  # phrase -> occurrence start positions

    def refresh(self):
        self.remainder = subtract(self.forest, self.covered)

    def available(self, phrase):
        length = len(phrase)
        return [
            start
            for start in self.phrases.get(phrase, ())
            if not any(pos in self.consumed for pos in range(start, start + length))
        ]


class _PhraseInfo:
    __slots__ = ("phrase", "order", "example_ids", "np", "cands", "rng")

    def __init__(self, phrase, order, seed):
        self.phrase = phrase
        self.order = order
        self.example_ids = []
        self.np = 0
        self.cands = {}
        self.rng = derive_rng(seed, "phrase", " ".join(phrase))


class _Learner:
    def __init__(self, examples, bg, sampler, weights, max_phrase_len):
        self.sampler = sampler
        self.weights = weights
        self.max_phrase_len = max_phrase_len
        self.embeds_cache = {}
        self.lics_cache = {}
        self.seq = 0
        self.states = []
        self.by_id = {}
        self.phrases = {}
        self.trace = []
        self.entries = []
        self.n_initial_candidates = 0

        for ex in examples:
            reduced, _ = preprocess(ex, bg)
            tokens = list(reduced.tokens)
            occ = {}
            for start in range(len(tokens)):
                for length in range(1, min(max_phrase_len, len(tokens) - start) + 1):
                    phrase = tuple(tokens[start : start + length])
                    occ.setdefault(phrase, []).append(start)
            state = _ExState(reduced.id, reduced.tokens, reduced.meaning, occ)
            self.states.append(state)
            self.by_id[state.id] = state
            for start in range(len(tokens)):
                for length in range(1, min(max_phrase_len, len(tokens) - start) + 1):
                    phrase = tuple(tokens[start : start + length])
                    info = self.phrases.get(phrase)
                    if info is None:
                        info = _PhraseInfo(phrase, len(self.phrases), sampler.seed)
                        self.phrases[phrase] = info
                    if not info.example_ids or info.example_ids[-1] != state.id:
                        info.example_ids.append(state.id)

        for info in self.phrases.values():
            info.np = len(self._live_example_ids(info))

    # -- candidate bookkeeping ------------------------------------------------

    def _embeds(self, meaning, remainder):
        if not remainder.trees:
            return False
        key = (meaning.key, remainder.key)
        got = self.embeds_cache.get(key)
        if got is None:
            got = bool(occurrences(meaning, remainder))
            self.embeds_cache[key] = got
        return got

    def _live_example_ids(self, info):
        return [
            eid
            for eid in info.example_ids
            if self.by_id[eid].remainder.trees and self.by_id[eid].available(info.phrase)
        ]

    def _support(self, info, meaning):
        return {
            eid
            for eid in self._live_example_ids(info)
            if self._embeds(meaning, self.by_id[eid].remainder)
        }

    def _add_candidate(self, info, meaning):
        """Register a candidate meaning for a phrase, with dominance
        pruning: a meaning that embeds into another candidate of the same
        phrase without holding any extra support is a strictly worse
        hypothesis (the generality bonus would otherwise always prefer the
        broken-off fragment), so it is not kept; conversely a newly added
        meaning evicts fragments of itself that hold no extra support."""
        if not meaning.trees or meaning.key in info.cands:
            return None
        support = self._support(info, meaning)
        if not support:
            return None
        for other in info.cands.values():
            if support <= other.support and self._embeds(meaning, other.meaning):
                return None
        for key in list(info.cands):
            other = info.cands[key]
            if other.support <= support and self._embeds(other.meaning, meaning):
                del info.cands[key]
        cand = CandidatePair(info.phrase, meaning, meaning.key, vertex_count(meaning), support, self.seq)
        self.seq += 1
        info.cands[meaning.key] = cand
        return cand

    def _derive(self, info, fallback_isolated):
        reps = [self.by_id[eid].remainder for eid in self._live_example_ids(info)]
        if not reps:
            return []
        if self.sampler.mode == "fracture":
            found = fracture_candidates(reps, self.sampler, info.rng)
        else:
            found = lics_candidates(
                reps, self.sampler, info.rng, cache=self.lics_cache,
                fallback_isolated=fallback_isolated,
            )
        added = []
        for meaning in found:
            cand = self._add_candidate(info, meaning)
            if cand is not None:
                added.append(cand)
        return added

    def generate_initial(self):
        for info in sorted(self.phrases.values(), key=lambda i: i.order):
            if info.np < 1:
                continue
            self._derive(info, fallback_isolated=False)
        self.n_initial_candidates = sum(len(i.cands) for i in self.phrases.values())

    # -- selection --------------------------------------------------------

    def select_best(self):
        best = None
        best_key = None
        best_score = None
        for info in self.phrases.values():
            if info.np < 1 or not info.cands:
                continue
            ambiguity = len(info.cands)
            for cand in info.cands.values():
                if not cand.support:
                    continue
                score = heuristic_value(len(cand.support), info.np, cand.vcount, self.weights)
                key = (score, -ambiguity, -len(cand.phrase), -cand.seq)
                if best_key is None or key > best_key:
                    best, best_key, best_score = cand, key, score
        return best, best_score

    # -- the covering loop --------------------------------------------------

    def all_covered(self):
        return all(not state.remainder.trees for state in self.states)

    def run(self):
        self.generate_initial()
        step = 0
        while not self.all_covered():
            best, score = self.select_best()
            if best is None:
                break
            step += 1
            self.apply_selection(best, score, step)
        uncovered = {
            state.id: render_term(state.remainder)
            for state in self.states
            if state.remainder.trees
        }
        return LearnResult(
            lexicon=Lexicon(self.entries),
            trace=self.trace,
            uncovered=uncovered,
            n_examples=len(self.states),
            n_initial_candidates=self.n_initial_candidates,
            examples=self.states,
        )

    def apply_selection(self, best, score, step):
        info = self.phrases[best.phrase]
        np_at_selection = info.np
        self.entries.append(LexiconEntry(best.phrase, best.meaning, score))
        del info.cands[best.key]

        changed = {}
        consumed = {}
        old_remainders = {}
        for eid in sorted(best.support):
            state = self.by_id[eid]
            starts = state.available(best.phrase)
            if not starts or not state.remainder.trees:
                continue
            hits = occurrences(best.meaning, state.remainder)
            if not hits:
                continue
            old_remainders[eid] = state.remainder
            newly = set(hits[0].image)
            state.covered |= newly
            span = range(starts[0], starts[0] + len(best.phrase))
            state.consumed.update(span)
            state.refresh()
            changed[eid] = newly
            consumed[eid] = sorted(span)

        affected = sorted(
            {phrase for eid in changed for phrase in self.by_id[eid].phrases},
            key=lambda p: self.phrases[p].order,
        )
        for phrase in affected:
            pinfo = self.phrases[phrase]
            pinfo.np = len(self._live_example_ids(pinfo))

        removed_phrases = []
        for phrase in affected:
            pinfo = self.phrases[phrase]
            if pinfo.np < 1:
                pinfo.cands.clear()
                continue
            for key in list(pinfo.cands):
                cand = pinfo.cands.get(key)
                if cand is None or not (cand.support & set(changed)):
                    continue
                lost_structure = []
                for eid in sorted(cand.support & set(changed)):
                    state = self.by_id[eid]
                    if not state.available(phrase):
                        cand.support.discard(eid)
                    elif not self._embeds(cand.meaning, state.remainder):
                        cand.support.discard(eid)
                        lost_structure.append(eid)
                if cand.support and not lost_structure:
                    continue
                replacement = None
                if lost_structure:
                    replacement = self._generalize(cand, lost_structure[0], old_remainders, changed)
                if not cand.support:
                    del pinfo.cands[key]
                    replaced = False
                    if replacement is not None and replacement.trees:
                        if replacement.key in pinfo.cands:
                            replaced = True
                        else:
                            replaced = self._add_candidate(pinfo, replacement) is not None
                    if not replaced:
                        removed_phrases.append(phrase)
                elif replacement is not None and replacement.trees:
                    self._add_candidate(pinfo, replacement)

        regenerated = []
        seen = set()
        for phrase in removed_phrases + [p for p in affected if not self.phrases[p].cands]:
            if phrase in seen:
                continue
            seen.add(phrase)
            pinfo = self.phrases[phrase]
            if pinfo.np < 1:
                continue
            if self._derive(pinfo, fallback_isolated=True):
                regenerated.append(phrase)

        self.trace.append(
            TraceStep(
                step=step,
                phrase=best.phrase,
                meaning=best.key,
                score=score,
                n_support=len(best.support),
                n_phrase=np_at_selection,
                covered={eid: sorted(vids) for eid, vids in changed.items()},
                consumed=consumed,
                regenerated=[" ".join(p) for p in regenerated],
            )
        )

    def _generalize(self, cand, eid, old_remainders, changed):
        """The candidate stopped embedding in example ``eid``: remove the
        newly covered vertices from its meaning."""
        old = old_remainders.get(eid)
        if old is None:
            return None
        hits = occurrences(cand.meaning, old)
        if not hits:
            return None
        covered_pattern = {p for p, t in hits[0].pairs if t in changed[eid]}
        reduced = subtract(cand.meaning, covered_pattern)
        if not reduced.trees:
            return Forest()
        return assign_vids(canonical(reduced))


def learn_lexicon(examples, bg=None, sampler=None, weights=None, max_phrase_len=2):
    """Run the full covering loop over a corpus.  Returns a LearnResult with
    the lexicon (selection order preserved), the per-selection trace, and the
    uncovered residue per example."""
    bg = bg if bg is not None else BackgroundLexicon()
    sampler = sampler or SamplerConfig()
    weights = weights or HeuristicWeights()
    learner = _Learner(examples, bg, sampler, weights, max_phrase_len)
    return learner.run()
