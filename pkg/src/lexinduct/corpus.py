"""Corpus loading, preprocessing, and phrase extraction.

A training example pairs a token sequence with a meaning forest.  Two file
formats are supported: ``paired`` (sentence line, term line, blank separator)
and ``jsonl`` (one object per line with ``sentence`` and ``meaning`` fields).
A background lexicon supplies phrases whose meanings are known in advance
(e.g. database constants); preprocessing consumes them before learning, and a
stop list removes tokens known to carry no meaning.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .terms import Forest, TermError, occurrences, parse_term, render_term, subtract


class CorpusError(TermError):
    pass


_PUNCT = set("¿¡?!.,;:()\"'«»")


def tokenize(text, lowercase=True):
    """Whitespace split after detaching punctuation into separate tokens."""
    if lowercase:
        text = text.lower()
    out = []
    for raw in text.split():
        buf = []
        for ch in raw:
            if ch in _PUNCT:
                if buf:
                    out.append("".join(buf))
                    buf = []
                out.append(ch)
            else:
                buf.append(ch)
        if buf:
            out.append("".join(buf))
    return out


@dataclass
class Example:
    id: int
    tokens: tuple
    meaning: Forest

    def __repr__(self):
        return f"Example({self.id}, {' '.join(self.tokens)!r}, {render_term(self.meaning)!r})"


def load_corpus(path, fmt="paired", *, strip_answer=False, lowercase=True):
    """Read a corpus file into Examples.  Duplicate records are kept
    (multiset semantics).  Raises CorpusError naming the offending record."""
    with open(path, encoding="utf8") as fh:
        text = fh.read()
    if fmt == "paired":
        records = _parse_paired(text)
    elif fmt == "jsonl":
        records = _parse_jsonl(text)
    else:
        raise CorpusError(f"unknown corpus format {fmt!r}")
    examples = []
    for i, (sentence, term) in enumerate(records):
        try:
            meaning = parse_term(term, strip_answer=strip_answer, allow_empty=True)
        except TermError as exc:
            raise CorpusError(f"record {i + 1}: {exc}") from exc
        examples.append(Example(i, tuple(tokenize(sentence, lowercase)), meaning))
    return examples


def _parse_paired(text):
    records = []
    block = []
    for line in text.splitlines():
        if line.strip():
            block.append(line)
            continue
        if block:
            records.append(_paired_block(block, len(records)))
            block = []
    if block:
        records.append(_paired_block(block, len(records)))
    return records


def _paired_block(block, index):
    if len(block) != 2:
        raise CorpusError(f"record {index + 1}: expected sentence and term lines, got {len(block)} lines")
    return block[0].strip(), block[1].strip()


def _parse_jsonl(text):
    records = []
    for i, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            records.append((obj["sentence"], obj["meaning"]))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CorpusError(f"record {i + 1}: {exc}") from exc
    return records


def save_corpus(path, examples, fmt="paired"):
    lines = []
    if fmt == "paired":
        for ex in examples:
            lines.append(" ".join(ex.tokens))
            lines.append(render_term(ex.meaning))
            lines.append("")
    elif fmt == "jsonl":
        for ex in examples:
            lines.append(json.dumps(
                {"sentence": " ".join(ex.tokens), "meaning": render_term(ex.meaning)},
                ensure_ascii=False, sort_keys=True))
    else:
        raise CorpusError(f"unknown corpus format {fmt!r}")
    with open(path, "w", encoding="utf8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# background lexicon and stop list


@dataclass
class BackgroundLexicon:
    """Phrases known in advance: entries carry a non-empty meaning, stop-list
    phrases have the empty meaning by fiat."""

    entries: list = field(default_factory=list)   # [(phrase tuple, Forest)]
    stop_list: set = field(default_factory=set)   # {phrase tuple}

    @classmethod
    def load(cls, entries_path=None, stop_path=None, lowercase=True):
        bg = cls()
        if entries_path:
            with open(entries_path, encoding="utf8") as fh:
                for i, line in enumerate(fh):
                    line = line.rstrip("\n")
                    if not line.strip():
                        continue
                    try:
                        phrase, term = line.split("\t")
                        meaning = parse_term(term)
                    except (ValueError, TermError) as exc:
                        raise CorpusError(f"background entry {i + 1}: {exc}") from exc
                    bg.entries.append((tuple(tokenize(phrase, lowercase)), meaning))
        if stop_path:
            with open(stop_path, encoding="utf8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        bg.stop_list.add(tuple(tokenize(line, lowercase)))
        return bg

    def known_phrases(self):
        phrases = {p for p, _ in self.entries}
        phrases.update(self.stop_list)
        return phrases


def _find_phrase(tokens, phrase, start=0):
    n = len(phrase)
    for i in range(start, len(tokens) - n + 1):
        if tuple(tokens[i : i + n]) == phrase:
            return i
    return -1


def _remove_span(tokens, start, length):
    return tokens[:start] + tokens[start + length :]


def preprocess(example, bg):
    """Apply the stop list and background lexicon to one example.

    Stop-list phrases are deleted from the sentence.  Each background entry
    whose phrase occurs in the sentence and whose meaning embeds in the
    meaning forest consumes its tokens and one meaning occurrence; entries
    apply longest phrase first, leftmost occurrence first.  Returns the
    reduced example and the list of (phrase, meaning) pairs consumed.
    """
    tokens = list(example.tokens)
    for phrase in sorted(bg.stop_list, key=lambda p: (-len(p), p)):
        while True:
            at = _find_phrase(tokens, phrase)
            if at < 0:
                break
            tokens = _remove_span(tokens, at, len(phrase))
    meaning = example.meaning
    consumed = []
    changed = True
    while changed:
        changed = False
        for phrase, bg_meaning in sorted(bg.entries, key=lambda e: (-len(e[0]), e[0])):
            at = _find_phrase(tokens, phrase)
            if at < 0:
                continue
            hits = occurrences(bg_meaning, meaning) if meaning else []
            if not hits:
                continue
            tokens = _remove_span(tokens, at, len(phrase))
            meaning = subtract(meaning, hits[0])
            consumed.append((phrase, bg_meaning))
            changed = True
            break
    return Example(example.id, tuple(tokens), meaning), consumed


def extract_phrases(tokens, max_len):
    """All contiguous token subsequences of length 1..max_len, with
    multiplicity, ordered by (start position, length)."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    out = []
    for start in range(len(tokens)):
        for length in range(1, min(max_len, len(tokens) - start) + 1):
            out.append(tuple(tokens[start : start + length]))
    return out


def phrase_positions(tokens, phrase):
    """Start offsets of every occurrence of ``phrase`` in ``tokens``."""
    n = len(phrase)
    return [i for i in range(len(tokens) - n + 1) if tuple(tokens[i : i + n]) == phrase]
