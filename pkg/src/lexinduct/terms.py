"""Tree-structured meaning representations and the operations on them.

A meaning is a forest of rooted, labeled trees.  Internal vertices carry a
functor label (name plus arity); leaves are functors of arity zero
(constants), named variables, or absent arguments.  Variables are scoped by
the forest: two occurrences of the same name denote the same existential
variable, which is how structure is shared between trees.  An argument
position may also hold an unordered group of terms (a conjunction), written
``(a,b,c)``; conjunction nesting is flattened.

The textual grammar (whitespace insignificant)::

    forest := term | '(' term (',' term)* ')'
    term   := symbol | symbol '(' arg (',' arg)* ')'
    arg    := forest | VARIABLE | '_'

Symbols are lowercase alphanumerics/underscore; a VARIABLE token starts with
an uppercase letter.  A written ``_`` denotes an absent argument position
(a free argument), not a vertex.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import random
import re
from dataclasses import dataclass


class TermError(Exception):
    """Base class for errors raised by this package."""


class ParseError(TermError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class _Hole:
    __slots__ = ()

    def __repr__(self):
        return "_"


#: The absent-argument marker.  Contributes no vertex.
HOLE = _Hole()


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return self.name


class Node:
    """A functor/constant vertex.  ``args`` holds one entry per argument
    position; each entry is HOLE, a Var, a Node, or a tuple of Nodes (an
    unordered conjunction group).  ``vid`` is a vertex id, unique within the
    forest the node belongs to; structural operations preserve it."""

    __slots__ = ("name", "args", "vid")

    def __init__(self, name, args=(), vid=-1):
        self.name = name
        self.args = tuple(args)
        self.vid = vid

    @property
    def label(self):
        return (self.name, len(self.args))

    def __repr__(self):
        return render_node(self)


class Forest:
    __slots__ = ("trees", "_key", "_exact")

    def __init__(self, trees=()):
        self.trees = tuple(trees)
        self._key = None
        self._exact = None

    def __len__(self):
        return len(self.trees)

    def __bool__(self):
        return bool(self.trees)

    def __iter__(self):
        return iter(self.trees)

    def __repr__(self):
        return f"Forest({render_forest(self)!r})"

    @property
    def key(self):
        """Canonical rendering; equal keys imply isomorphic forests."""
        if self._key is None:
            self._key, self._exact = _canonical_render(self)
        return self._key

    def nodes(self):
        """All functor vertices in tree order, depth first."""
        for tree in self.trees:
            yield from _iter_nodes(tree)


def _iter_nodes(node):
    yield node
    for arg in node.args:
        if isinstance(arg, Node):
            yield from _iter_nodes(arg)
        elif isinstance(arg, tuple):
            for member in arg:
                yield from _iter_nodes(member)


def var_occurrences(forest):
    """Variable name -> number of occurrences across the whole forest."""
    counts = {}
    for node in forest.nodes():
        for arg in node.args:
            if isinstance(arg, Var):
                counts[arg.name] = counts.get(arg.name, 0) + 1
    return counts


def vertex_count(forest):
    """Number of functor vertices.  Variable leaves and absent arguments
    contribute nothing; a bare functor like ``state(_)`` counts 1."""
    return sum(1 for _ in forest.nodes())


def assign_vids(forest):
    """Return an equal forest with vertex ids renumbered 0..n-1 in
    depth-first tree order."""
    counter = itertools.count()

    def rebuild(node):
        vid = next(counter)
        args = []
        for arg in node.args:
            if isinstance(arg, Node):
                args.append(rebuild(arg))
            elif isinstance(arg, tuple):
                args.append(tuple(rebuild(m) for m in arg))
            else:
                args.append(arg)
        return Node(node.name, args, vid)

    return Forest(rebuild(t) for t in forest.trees)


# ---------------------------------------------------------------------------
# parsing


_TOKEN_RE = re.compile(r"\s*([(),]|[a-z0-9_][a-z0-9_]*|[A-Z][A-Za-z0-9_]*)")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stray = text[pos:].strip()
            if not stray:
                break
            raise ParseError(f"unexpected character {stray[0]!r}", pos)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens, counter):
        self.tokens = tokens
        self.i = 0
        self.counter = counter

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def next(self):
        if self.i >= len(self.tokens):
            raise ParseError("unexpected end of input")
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, want):
        tok, pos = self.next()
        if tok != want:
            raise ParseError(f"expected {want!r}, found {tok!r}", pos)

    def parse_group(self):
        """'(' term (',' term)* ')' or a single term; returns a list of
        Nodes with nested groups flattened."""
        if self.peek() == "(":
            self.next()
            members = self.parse_members()
            self.expect(")")
            return members
        return [self.parse_term()]

    def parse_members(self):
        members = []
        while True:
            if self.peek() == "(":
                self.next()
                members.extend(self.parse_members())
                self.expect(")")
            else:
                members.append(self.parse_term())
            if self.peek() == ",":
                self.next()
                continue
            return members

    def parse_term(self):
        tok, pos = self.next()
        if tok in ("(", ")", ","):
            raise ParseError(f"expected a term, found {tok!r}", pos)
        if tok == "_" or tok[0].isupper():
            raise ParseError(f"expected a term, found {tok!r}", pos)
        if self.peek() != "(":
            return Node(tok, (), next(self.counter))
        self.next()
        args = []
        while True:
            args.append(self.parse_arg())
            tok2, pos2 = self.next()
            if tok2 == ",":
                continue
            if tok2 == ")":
                break
            raise ParseError(f"expected ',' or ')', found {tok2!r}", pos2)
        vid = next(self.counter)
        return Node(tok, args, vid)

    def parse_arg(self):
        tok = self.peek()
        if tok == "_":
            self.next()
            return HOLE
        if tok is not None and tok not in "(),)" and tok[0].isupper():
            self.next()
            return Var(tok)
        members = self.parse_group()
        if len(members) == 1:
            return members[0]
        return tuple(members)


def parse_term(text, *, strip_answer=False, allow_empty=False):
    """Parse the textual term syntax into a Forest.

    With ``strip_answer`` a top-level ``answer(Var, Body)`` wrapper is
    removed and Body becomes the forest; variables left with a single
    occurrence by the stripping are erased to absent arguments.
    """
    tokens = _tokenize(text)
    if not tokens:
        if allow_empty:
            return Forest()
        raise ParseError("empty input")
    parser = _Parser(tokens, itertools.count())
    members = parser.parse_group()
    if parser.i != len(parser.tokens):
        tok, pos = parser.tokens[parser.i]
        raise ParseError(f"trailing input {tok!r}", pos)
    forest = Forest(members)
    if strip_answer and len(forest) == 1:
        root = forest.trees[0]
        if root.name == "answer" and len(root.args) == 2:
            body = root.args[1]
            if isinstance(body, Node):
                forest = Forest([body])
            elif isinstance(body, tuple):
                forest = Forest(body)
            elif isinstance(body, Var) or body is HOLE:
                forest = Forest()
            forest = prune_orphan_vars(forest)
    return assign_vids(forest)


def prune_orphan_vars(forest):
    """Erase variables that occur exactly once (they constrain nothing and
    are equivalent to absent arguments)."""
    counts = var_occurrences(forest)
    orphans = {name for name, n in counts.items() if n == 1}
    if not orphans:
        return forest

    def rebuild(node):
        args = []
        for arg in node.args:
            if isinstance(arg, Var) and arg.name in orphans:
                args.append(HOLE)
            elif isinstance(arg, Node):
                args.append(rebuild(arg))
            elif isinstance(arg, tuple):
                args.append(tuple(rebuild(m) for m in arg))
            else:
                args.append(arg)
        return Node(node.name, args, node.vid)

    return Forest(rebuild(t) for t in forest.trees)


# ---------------------------------------------------------------------------
# rendering and canonical form


def _var_name(index):
    if index < 26:
        return chr(65 + index)
    return chr(65 + index % 26) + str(index // 26)


def render_node(node):
    parts = []
    for arg in node.args:
        if arg is HOLE:
            parts.append("_")
        elif isinstance(arg, Var):
            parts.append(arg.name)
        elif isinstance(arg, Node):
            parts.append(render_node(arg))
        else:
            parts.append("(" + ",".join(render_node(m) for m in arg) + ")")
    if not parts:
        return node.name
    return f"{node.name}({','.join(parts)})"


def render_forest(forest):
    """Plain rendering in stored order with original variable names."""
    if not forest.trees:
        return ""
    if len(forest.trees) == 1:
        return render_node(forest.trees[0])
    return "(" + ",".join(render_node(t) for t in forest.trees) + ")"


def _blind(node):
    """Rendering with every variable replaced by '?'; invariant under
    renaming, used to order trees and conjunction members."""
    parts = []
    for arg in node.args:
        if arg is HOLE:
            parts.append("_")
        elif isinstance(arg, Var):
            parts.append("?")
        elif isinstance(arg, Node):
            parts.append(_blind(arg))
        else:
            parts.append("(" + ",".join(sorted(_blind(m) for m in arg)) + ")")
    if not parts:
        return node.name
    return f"{node.name}({','.join(parts)})"


_CANON_BUDGET = 2000


def _tie_groups(members):
    """Members sorted by blind key, grouped; returns (groups, n_orderings)."""
    keyed = sorted(((_blind(m), m) for m in members), key=lambda kv: kv[0])
    groups = []
    for _, grp in itertools.groupby(keyed, key=lambda kv: kv[0]):
        groups.append([m for _, m in grp])
    n = 1
    for g in groups:
        n *= math.factorial(len(g))
    return groups, n


def _orderings(members, budget):
    groups, n = _tie_groups(members)
    if n > budget or n <= 0:
        return [list(itertools.chain.from_iterable(groups))], False
    perms = [list(itertools.permutations(g)) for g in groups]
    out = []
    for combo in itertools.product(*perms):
        out.append(list(itertools.chain.from_iterable(combo)))
    return out, True


def _canonical_render(forest):
    """Minimal rendering over tree/conjunction orderings with variables
    renamed by first appearance.  Ordering ties are resolved by comparing
    complete renderings, so the result is a true canonical form.  Returns
    (text, exact); ``exact`` is False when a tie group was too large to
    search exhaustively, in which case the text is deterministic but
    isomorphic forests may render differently."""
    if not forest.trees:
        return "", True
    exact = [True]

    def enum_arg(arg, names):
        if arg is HOLE:
            yield "_", names
        elif isinstance(arg, Var):
            if arg.name in names:
                yield names[arg.name], names
            else:
                grown = dict(names)
                grown[arg.name] = _var_name(len(names))
                yield grown[arg.name], grown
        elif isinstance(arg, Node):
            yield from enum_node(arg, names)
        else:
            for text, nm in enum_members(list(arg), names):
                yield "(" + text + ")", nm

    def enum_node(node, names):
        if not node.args:
            yield node.name, names
            return
        for texts, nm in enum_seq(node.args, names):
            yield f"{node.name}({','.join(texts)})", nm

    def enum_seq(args, names):
        if not args:
            yield [], names
            return
        for head, nm in enum_arg(args[0], names):
            for rest, nm2 in enum_seq(args[1:], nm):
                yield [head] + rest, nm2

    def enum_members(members, names):
        orders, ok = _orderings(members, _CANON_BUDGET)
        if not ok:
            exact[0] = False
        for order in orders:
            for texts, nm in enum_seq(order, names):
                yield ",".join(texts), nm

    best = None
    count = 0
    for text, _ in enum_members(list(forest.trees), {}):
        if best is None or text < best:
            best = text
        count += 1
        if count >= _CANON_BUDGET:
            exact[0] = False
            break
    if len(forest.trees) > 1:
        best = "(" + best + ")"
    return best, exact[0]


def render_term(forest):
    """Canonical text for a forest; ``parse_term`` of the result is
    renaming-equivalent to the input."""
    return forest.key


def canonical(forest):
    """Canonical Forest: trees and conjunction members in canonical order,
    variables renamed A, B, ... by first appearance, fresh vertex ids."""
    out = parse_term(forest.key, allow_empty=True)
    out._key = forest.key
    out._exact = forest._exact
    return out


def iso_equal(a, b):
    """Label-preserving isomorphism with a consistent variable bijection;
    tree order and conjunction member order are immaterial."""
    if a.key == b.key:
        return True
    if a._exact and b._exact:
        return False
    return _iso_search(a, b)


def _iso_search(a, b):
    if len(a.trees) != len(b.trees):
        return False
    a_blinds = sorted(_blind(t) for t in a.trees)
    b_blinds = sorted(_blind(t) for t in b.trees)
    if a_blinds != b_blinds:
        return False

    def match_arg(pa, pb, fwd, rev):
        if pa is HOLE or pb is HOLE:
            return [(fwd, rev)] if (pa is HOLE and pb is HOLE) else []
        if isinstance(pa, Var) or isinstance(pb, Var):
            if not (isinstance(pa, Var) and isinstance(pb, Var)):
                return []
            if fwd.get(pa.name, pb.name) != pb.name or rev.get(pb.name, pa.name) != pa.name:
                return []
            nfwd = dict(fwd)
            nrev = dict(rev)
            nfwd[pa.name] = pb.name
            nrev[pb.name] = pa.name
            return [(nfwd, nrev)]
        if isinstance(pa, Node) and isinstance(pb, Node):
            return match_node(pa, pb, fwd, rev)
        if isinstance(pa, tuple) and isinstance(pb, tuple):
            if len(pa) != len(pb):
                return []
            return match_sets(list(pa), list(pb), fwd, rev)
        return []

    def match_node(na, nb, fwd, rev):
        if na.label != nb.label:
            return []
        states = [(fwd, rev)]
        for pa, pb in zip(na.args, nb.args):
            nxt = []
            for f, r in states:
                nxt.extend(match_arg(pa, pb, f, r))
            states = _dedup_states(nxt)
            if not states:
                return []
        return states

    def match_sets(xs, ys, fwd, rev):
        if not xs:
            return [(fwd, rev)]
        x = xs[0]
        states = []
        for j, y in enumerate(ys):
            if _blind(x) != _blind(y):
                continue
            for f, r in match_node(x, y, fwd, rev):
                states.extend(match_sets(xs[1:], ys[:j] + ys[j + 1 :], f, r))
        return _dedup_states(states)

    return bool(match_sets(list(a.trees), list(b.trees), {}, {}))


def _dedup_states(states):
    seen = set()
    out = []
    for f, r in states:
        key = tuple(sorted(f.items()))
        if key not in seen:
            seen.add(key)
            out.append((f, r))
    return out


# ---------------------------------------------------------------------------
# embeddings


@dataclass(frozen=True)
class Embedding:
    """An occurrence of a pattern forest inside a target forest.  ``pairs``
    maps pattern vertex ids to target vertex ids; the image is injective and
    each pattern tree lands on a connected subgraph of one target tree."""

    pairs: tuple
    bindings: tuple

    @property
    def image(self):
        return frozenset(t for _, t in self.pairs)


def _arg_binding_value(arg):
    if isinstance(arg, Var):
        return ("v", arg.name)
    if isinstance(arg, Node):
        return ("n", arg.vid)
    if isinstance(arg, tuple):
        return ("c", tuple(m.vid for m in arg))
    return None


def occurrences(pattern, target):
    """All embeddings of ``pattern`` into ``target``, in canonical traversal
    order of the target.  Pattern variables bind consistently across the
    whole pattern and may bind to any argument content; absent pattern
    arguments match anything."""
    if not pattern.trees:
        raise ValueError("pattern must be non-empty")
    targets_by_label = {}
    for node in target.nodes():
        targets_by_label.setdefault(node.label, []).append(node)

    solutions = []

    def match_node(pnode, tnode, pairs, bindings, used):
        if pnode.label != tnode.label or tnode.vid in used:
            return
        states = [(pairs + [(pnode.vid, tnode.vid)], bindings, used | {tnode.vid})]
        for pa, ta in zip(pnode.args, tnode.args):
            nxt = []
            for prs, bnd, usd in states:
                nxt.extend(match_arg(pa, ta, prs, bnd, usd))
            states = nxt
            if not states:
                return
        yield from states

    def match_arg(pa, ta, pairs, bindings, used):
        if pa is HOLE:
            return [(pairs, bindings, used)]
        if isinstance(pa, Var):
            value = _arg_binding_value(ta)
            if value is None:
                return []
            bound = bindings.get(pa.name)
            if bound is not None:
                return [(pairs, bindings, used)] if bound == value else []
            nbnd = dict(bindings)
            nbnd[pa.name] = value
            return [(pairs, nbnd, used)]
        if isinstance(pa, Node):
            out = []
            if isinstance(ta, Node):
                out.extend(match_node(pa, ta, pairs, bindings, used))
            elif isinstance(ta, tuple):
                for member in ta:
                    out.extend(match_node(pa, member, pairs, bindings, used))
            return out
        # pa is a conjunction group: target must be a group with enough members
        if not isinstance(ta, tuple) or len(ta) < len(pa):
            return []
        return match_group(list(pa), list(ta), pairs, bindings, used)

    def match_group(pms, tms, pairs, bindings, used):
        if not pms:
            return [(pairs, bindings, used)]
        head = pms[0]
        out = []
        for j, tm in enumerate(tms):
            for prs, bnd, usd in match_node(head, tm, pairs, bindings, used):
                out.extend(match_group(pms[1:], tms[:j] + tms[j + 1 :], prs, bnd, usd))
        return out

    def solve(tree_idx, pairs, bindings, used):
        if tree_idx == len(pattern.trees):
            solutions.append(
                Embedding(tuple(sorted(pairs)), tuple(sorted(bindings.items())))
            )
            return
        ptree = pattern.trees[tree_idx]
        for anchor in targets_by_label.get(ptree.label, ()):
            for prs, bnd, usd in match_node(ptree, anchor, pairs, bindings, used):
                solve(tree_idx + 1, prs, bnd, usd)

    solve(0, [], {}, frozenset())
    seen = set()
    unique = []
    for emb in sorted(solutions, key=lambda e: e.pairs):
        if emb.pairs not in seen:
            seen.add(emb.pairs)
            unique.append(emb)
    return unique


def embeds(pattern, target):
    if not pattern.trees:
        return False
    return bool(occurrences(pattern, target))


def subtract(target, removed):
    """Remove vertices from a forest.  ``removed`` is an Embedding or a set
    of vertex ids.  Detached subtrees become new top-level trees rooted at
    their shallowest vertex; variables left with a single occurrence are
    erased.  Surviving vertices keep their ids."""
    if isinstance(removed, Embedding):
        vids = set(removed.image)
    else:
        vids = set(removed)
    promoted = []

    def rebuild(node):
        if node.vid in vids:
            for arg in node.args:
                if isinstance(arg, Node):
                    kept = rebuild(arg)
                    if kept is not None:
                        promoted.append(kept)
                elif isinstance(arg, tuple):
                    for member in arg:
                        kept = rebuild(member)
                        if kept is not None:
                            promoted.append(kept)
            return None
        args = []
        for arg in node.args:
            if isinstance(arg, Node):
                kept = rebuild(arg)
                args.append(kept if kept is not None else HOLE)
            elif isinstance(arg, tuple):
                survivors = []
                for member in arg:
                    kept = rebuild(member)
                    if kept is not None:
                        survivors.append(kept)
                if not survivors:
                    args.append(HOLE)
                elif len(survivors) == 1:
                    args.append(survivors[0])
                else:
                    args.append(tuple(survivors))
            else:
                args.append(arg)
        return Node(node.name, args, node.vid)

    trees = []
    for tree in target.trees:
        promoted.clear()
        kept = rebuild(tree)
        if kept is not None:
            trees.append(kept)
        trees.extend(promoted)
    return prune_orphan_vars(Forest(trees))


# ---------------------------------------------------------------------------
# interpretation counting


def count_interpretations(n_phrases, n_vertices):
    """Number of one-to-one maps from a subset of the phrases onto vertex
    subsets that contain the root.  Exact integer arithmetic."""
    if n_vertices < 1:
        raise ValueError("need at least one vertex")
    total = 0
    for i in range(1, min(n_phrases, n_vertices) + 1):
        total += math.comb(n_phrases, i) * math.factorial(i) * math.comb(n_vertices - 1, i - 1)
    return total


def derive_seed(*parts):
    """Stable 64-bit seed derived from the given parts (no builtin hash)."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(*parts):
    return random.Random(derive_seed(*parts))
