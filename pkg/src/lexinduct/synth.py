"""Synthetic gold lexicons and corpora.

A gold lexicon maps words to simulated meanings built from a pool of
conceptual symbols: noun-like words get variable-free trees, verb-like words
get trees with one to three open argument positions, and a small remainder
are function words with the empty meaning.  Ambiguity (mean meanings per
word) and synonymy (mean words per meaning) are configurable.  Utterances
are generated by picking a verb sense and filling each open position with a
noun sense, words drawn by rank from a Zipf distribution, with a few
function words interleaved.  Every generated meaning is by construction the
composition of its words' gold meanings, so the gold lexicon covers the
corpus.
"""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass, field

from .corpus import Example
from .terms import (
    HOLE,
    Forest,
    Node,
    TermError,
    assign_vids,
    canonical,
    derive_rng,
    embeds,
    render_term,
)


class GenError(TermError):
    pass


@dataclass
class GenConfig:
    n_words: int = 100
    n_symbols: int = 25
    ambiguity: float = 1.0
    synonymy: float = 1.0
    noun_frac: float = 0.475
    verb_frac: float = 0.475
    empty_frac: float = 0.05
    max_depth: int = 2
    max_arity: int = 2
    max_vars: int = 3
    zipf_exponent: float = 1.0
    seed: int = 0

    def validate(self):
        if self.n_words < 1 or self.n_symbols < 1:
            raise GenError("need at least one word and one symbol")
        if self.ambiguity < 1.0 or self.synonymy < 1.0:
            raise GenError("ambiguity and synonymy rates must be >= 1")
        if abs(self.noun_frac + self.verb_frac + self.empty_frac - 1.0) > 1e-6:
            raise GenError("composition fractions must sum to 1")


@dataclass
class GoldLexicon:
    entries: list                      # [(word, Forest)]; empty Forest for function words
    categories: dict                   # word -> "noun" | "verb" | "empty"
    senses: dict                       # word -> [Forest]
    noun_words: list                   # Zipf rank order
    verb_words: list
    empty_words: list
    slots: dict = field(default_factory=dict)   # meaning key -> open positions
    freq: dict = field(default_factory=dict)    # word -> corpus count

    def content_entries(self):
        return [(w, m) for w, m in self.entries if m.trees]

    def realized_ambiguity(self):
        words = {w for w, _ in self.entries}
        return len(self.entries) / len(words) if words else 0.0

    def realized_synonymy(self):
        content = self.content_entries()
        meanings = {m.key for _, m in content}
        return len(content) / len(meanings) if meanings else 0.0

    def save(self, path):
        with open(path, "w", encoding="utf8") as fh:
            for word, meaning in self.entries:
                fh.write(f"{word}\t{render_term(meaning)}\n")

    def save_freq(self, path):
        with open(path, "w", encoding="utf8") as fh:
            for word in sorted(self.freq):
                fh.write(f"{word}\t{self.freq[word]}\n")


def load_freq(path):
    freq = {}
    with open(path, encoding="utf8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            word, _, count = line.partition("\t")
            freq[word] = int(count)
    return freq


# ---------------------------------------------------------------------------
# Zipf sampling


_zipf_tables = {}


def _zipf_cumulative(n_ranks, exponent):
    key = (n_ranks, exponent)
    table = _zipf_tables.get(key)
    if table is None:
        weights = [1.0 / (r ** exponent) for r in range(1, n_ranks + 1)]
        total = sum(weights)
        acc = 0.0
        table = []
        for w in weights:
            acc += w
            table.append(acc / total)
        _zipf_tables[key] = table
    return table


def zipf_pick(n_ranks, rng, exponent=1.0):
    """Rank in 1..n_ranks drawn with probability proportional to
    1 / rank^exponent."""
    if n_ranks < 1:
        raise ValueError("need at least one rank")
    if n_ranks == 1:
        return 1
    table = _zipf_cumulative(n_ranks, exponent)
    return bisect.bisect_left(table, rng.random()) + 1


# ---------------------------------------------------------------------------
# gold lexicon construction


def _split_counts(cfg):
    n_noun = int(cfg.n_words * cfg.noun_frac)
    n_verb = int(cfg.n_words * cfg.verb_frac)
    n_empty = int(cfg.n_words * cfg.empty_frac)
    leftovers = cfg.n_words - n_noun - n_verb - n_empty
    for i in range(leftovers):
        if i % 3 == 0:
            n_noun += 1
        elif i % 3 == 1:
            n_verb += 1
        else:
            n_empty += 1
    return n_noun, n_verb, n_empty


class _MeaningFactory:
    """Random meanings shaped so that a correct covering is unambiguous:
    noun and verb meanings draw from disjoint halves of the symbol pool,
    noun meanings are saturated trees of at least two vertices forming a
    mutual non-embedding set, and verb meanings carry their open positions
    on every branch (no saturated interior beyond leaf constants).  Nouns
    then never match inside verb structure or inside each other, so the
    only interchangeable meaning occurrences are isomorphic ones."""

    def __init__(self, cfg, rng):
        self.cfg = cfg
        self.rng = rng
        self.used = set()
        self.nouns = []
        half = max(1, cfg.n_symbols // 2)
        self.noun_symbols = [f"f{i}" for i in range(half)]
        self.verb_symbols = [f"f{i}" for i in range(half, cfg.n_symbols)]

    def _noun_tree(self, depth_left, force_branch):
        low = 1 if force_branch else 0
        arity = self.rng.randint(low, self.cfg.max_arity) if depth_left > 0 else 0
        name = self.noun_symbols[self.rng.randrange(len(self.noun_symbols))]
        return Node(name, [self._noun_tree(depth_left - 1, False) for _ in range(arity)])

    def _verb_symbol(self):
        if not self.verb_symbols:
            raise GenError("need at least two symbols to build verb-like meanings")
        return self.verb_symbols[self.rng.randrange(len(self.verb_symbols))]

    def _verb_arg(self, n_slots, depth_left):
        """Subtree holding exactly n_slots open positions."""
        if n_slots == 1 and (depth_left <= 0 or self.rng.random() < 0.5):
            return HOLE
        if depth_left <= 0:
            return None
        arity = self.rng.randint(1, self.cfg.max_arity)
        counts = [0] * arity
        for _ in range(n_slots):
            counts[self.rng.randrange(arity)] += 1
        args = []
        for c in counts:
            if c == 0:
                args.append(Node(self._verb_symbol()))
            else:
                sub = self._verb_arg(c, depth_left - 1)
                if sub is None:
                    return None
                args.append(sub)
        return Node(self._verb_symbol(), args)

    def _verb_tree(self, n_slots):
        arity = self.rng.randint(1, self.cfg.max_arity)
        counts = [0] * arity
        for _ in range(n_slots):
            counts[self.rng.randrange(arity)] += 1
        args = []
        for c in counts:
            if c == 0:
                args.append(Node(self._verb_symbol()))
            else:
                sub = self._verb_arg(c, self.cfg.max_depth - 1)
                if sub is None:
                    return None
                args.append(sub)
        return Node(self._verb_symbol(), args)

    def fresh(self, category, attempts=500):
        for _ in range(attempts):
            if category == "noun":
                tree = self._noun_tree(self.cfg.max_depth, force_branch=True)
            else:
                n_slots = self.rng.randint(1, min(self.cfg.max_vars, self.cfg.max_arity ** self.cfg.max_depth))
                tree = self._verb_tree(n_slots)
                if tree is None or sum(1 for _ in _iter_tree(tree)) < 2:
                    continue
            forest = assign_vids(canonical(Forest([tree])))
            if forest.key in self.used:
                continue
            if category == "noun" and any(
                embeds(forest, other) or embeds(other, forest) for other in self.nouns
            ):
                continue
            self.used.add(forest.key)
            if category == "noun":
                self.nouns.append(forest)
            return forest
        raise GenError(
            f"could not generate a fresh {category} meaning; the symbol space "
            f"(n_symbols={self.cfg.n_symbols}, depth<={self.cfg.max_depth}, "
            f"arity<={self.cfg.max_arity}) is exhausted"
        )


def _iter_tree(node):
    yield node
    for arg in node.args:
        if isinstance(arg, Node):
            yield from _iter_tree(arg)


def _open_slots(forest):
    """Depth-first list of (vertex id, argument index) for every absent
    position in the forest."""
    slots = []

    def walk(node):
        for idx, arg in enumerate(node.args):
            if arg is HOLE:
                slots.append((node.vid, idx))
            elif isinstance(arg, Node):
                walk(arg)
    for tree in forest.trees:
        walk(tree)
    return slots


def gen_gold_lexicon(cfg):
    """Build a random gold lexicon honoring the composition fractions and
    the ambiguity/synonymy rates."""
    cfg.validate()
    rng = derive_rng(cfg.seed, "gold")
    n_noun, n_verb, n_empty = _split_counts(cfg)
    words = [f"w{i}" for i in range(cfg.n_words)]
    rng.shuffle(words)
    noun_words = words[:n_noun]
    verb_words = words[n_noun : n_noun + n_verb]
    empty_words = words[n_noun + n_verb :]
    categories = {w: "noun" for w in noun_words}
    categories.update({w: "verb" for w in verb_words})
    categories.update({w: "empty" for w in empty_words})

    n_content = n_noun + n_verb
    if n_content == 0:
        raise GenError("no content words; lower empty_frac")
    target_entries = round(cfg.ambiguity * cfg.n_words)
    extra = target_entries - cfg.n_words
    content_entries = n_content + extra
    distinct_target = max(1, round(content_entries / cfg.synonymy))

    factory = _MeaningFactory(cfg, rng)
    senses = {w: [] for w in words}
    plan = []
    for cat, cat_words in (("noun", noun_words), ("verb", verb_words)):
        if not cat_words:
            continue
        share = len(cat_words) / n_content
        plan.append((cat, cat_words, share))

    assigned = 0
    for p, (cat, cat_words, share) in enumerate(plan):
        if p == len(plan) - 1:
            cat_entries = content_entries - assigned
        else:
            cat_entries = round(content_entries * share)
            assigned += cat_entries
        cat_distinct = max(1, min(cat_entries, round(distinct_target * share)))
        if cat_entries < len(cat_words) or cat_entries > len(cat_words) * cat_distinct:
            raise GenError(
                f"infeasible rates for {cat} words: {cat_entries} entries over "
                f"{len(cat_words)} words and {cat_distinct} meanings"
            )
        pool = [factory.fresh(cat) for _ in range(cat_distinct)]
        pairs = set()
        for i, word in enumerate(cat_words):
            meaning = pool[i % cat_distinct]
            senses[word].append(meaning)
            pairs.add((word, meaning.key))
        for j in range(len(cat_words), cat_distinct):
            word = cat_words[rng.randrange(len(cat_words))]
            senses[word].append(pool[j])
            pairs.add((word, pool[j].key))
        guard = 0
        while len(pairs) < cat_entries:
            word = cat_words[rng.randrange(len(cat_words))]
            meaning = pool[rng.randrange(cat_distinct)]
            if (word, meaning.key) not in pairs:
                senses[word].append(meaning)
                pairs.add((word, meaning.key))
            guard += 1
            if guard > 1000 * cat_entries:
                raise GenError(f"could not reach the entry target for {cat} words")

    entries = []
    slots = {}
    for word in words:
        if categories[word] == "empty":
            senses[word] = [Forest()]
            entries.append((word, Forest()))
            continue
        for meaning in senses[word]:
            entries.append((word, meaning))
            if categories[word] == "verb":
                slots.setdefault(meaning.key, _open_slots(meaning))

    return GoldLexicon(
        entries=entries,
        categories=categories,
        senses=senses,
        noun_words=noun_words,
        verb_words=verb_words,
        empty_words=empty_words,
        slots=slots,
    )


# ---------------------------------------------------------------------------
# corpus generation


def _fill_slots(meaning, fillers):
    """New forest with each open position replaced by the paired filler
    tree; ``fillers`` maps (vertex id, argument index) to a Node."""

    def rebuild(node):
        args = []
        for idx, arg in enumerate(node.args):
            filler = fillers.get((node.vid, idx))
            if filler is not None:
                args.append(filler)
            elif isinstance(arg, Node):
                args.append(rebuild(arg))
            else:
                args.append(arg)
        return Node(node.name, args)

    return Forest(rebuild(t) for t in meaning.trees)


def _copy_tree(node):
    return Node(node.name, [
        _copy_tree(a) if isinstance(a, Node) else a for a in node.args
    ])


def gen_example(gold, cfg, index):
    """Generate one utterance/meaning pair from its derived random stream.
    Argument words are drawn without repetition inside one utterance: a
    doubled content word would need two meaning occurrences, which the
    one-vertex-per-phrase reading of an interpretation rules out."""
    rng = derive_rng(cfg.seed, "ex", index)
    verb_word = gold.verb_words[zipf_pick(len(gold.verb_words), rng, cfg.zipf_exponent) - 1]
    verb_sense = gold.senses[verb_word][rng.randrange(len(gold.senses[verb_word]))]
    tokens = [verb_word]
    fillers = {}
    used = set()
    for slot in gold.slots[verb_sense.key]:
        noun_word = gold.noun_words[zipf_pick(len(gold.noun_words), rng, cfg.zipf_exponent) - 1]
        while noun_word in used and len(used) < len(gold.noun_words):
            noun_word = gold.noun_words[zipf_pick(len(gold.noun_words), rng, cfg.zipf_exponent) - 1]
        used.add(noun_word)
        noun_sense = gold.senses[noun_word][rng.randrange(len(gold.senses[noun_word]))]
        tokens.append(noun_word)
        fillers[slot] = _copy_tree(noun_sense.trees[0])
    meaning = _fill_slots(verb_sense, fillers)
    if gold.empty_words:
        for _ in range(rng.randint(0, 2)):
            word = gold.empty_words[zipf_pick(len(gold.empty_words), rng, cfg.zipf_exponent) - 1]
            tokens.insert(rng.randint(0, len(tokens)), word)
    return Example(index, tuple(tokens), assign_vids(meaning))


def gen_corpus(gold, n_examples, cfg):
    """Generate a corpus and record whole-corpus word frequencies on the
    gold lexicon.  Examples are independent given the seed, so the corpus is
    reproducible example by example."""
    if not gold.verb_words or not gold.noun_words:
        raise GenError("corpus generation needs at least one verb-like and one noun-like word")
    examples = [gen_example(gold, cfg, i) for i in range(n_examples)]
    counts = Counter()
    for ex in examples:
        counts.update(ex.tokens)
    gold.freq = dict(counts)
    return examples
