"""Candidate meaning generation.

The default generator computes the largest isomorphic connected sub-forests
(LICS) of sampled pairs of example representations.  Matching is label aware
(functor name and arity), treats all variables as equivalent wildcards, and
matches conjunction groups in every order.  Each maximal common structure is
then turned into a meaning by anti-unification: argument positions that
differ between the two sides generalize to a variable, with the same pair of
subterms always mapped to the same variable, and variables left with a single
occurrence erased to free arguments.

The alternative generator fractures sampled representations: it enumerates
every connected substructure as a candidate.  It is exhaustive where LICS is
selective, and grows exponentially with meaning size, so it sits behind a
resource cap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .terms import (
    HOLE,
    Forest,
    Node,
    TermError,
    Var,
    assign_vids,
    canonical,
    prune_orphan_vars,
)


class FractureCapError(TermError):
    def __init__(self, cap):
        super().__init__(f"fracture enumeration exceeded cap of {cap}")
        self.cap = cap


@dataclass
class SamplerConfig:
    pairs_per_phrase: int = 20
    seed: int = 0
    mode: str = "lics"            # "lics" or "fracture"
    fracture_cap: int = 100000


_MAX_OPTIONS = 64

# generalization structures built during matching:
#   ("t", name, [gargs])   matched functor vertex
#   ("p", akey, bkey)      generalization point -> variable
#   ("c", [gterms])        matched conjunction group
#   HOLE                   absent on both sides


def _content_key(arg, side):
    if isinstance(arg, Var):
        return (side, "v", arg.name)
    if isinstance(arg, Node):
        return (side, "n", arg.vid)
    if isinstance(arg, tuple):
        return (side, "c", tuple(m.vid for m in arg))
    return None


class _Matcher:
    def __init__(self, a, b):
        self.a = a
        self.b = b
        self.node_memo = {}
        self.group_memo = {}

    def best_nodes(self, na, nb):
        """Maximal common structures anchored at a same-label vertex pair.
        Returns (vertex count, gterm options, free-link count).  A free link
        is an argument position free on both sides: two variables, a variable
        against an absent argument, or two absent arguments.  Free links are
        the single-vertex equivalent of a shared edge; a lone vertex with no
        free link (a bare constant, or a functor whose arguments conflict on
        both sides) is not a common subgraph worth keeping."""
        key = (na.vid, nb.vid)
        got = self.node_memo.get(key)
        if got is not None:
            return got
        size = 1
        free = 0
        per_position = []
        for aa, ba in zip(na.args, nb.args):
            s, opts, f = self.best_arg(aa, ba)
            size += s
            free += f
            per_position.append(opts)
        options = []
        for combo in itertools.product(*per_position):
            options.append(("t", na.name, list(combo)))
            if len(options) >= _MAX_OPTIONS:
                break
        result = (size, options, free)
        self.node_memo[key] = result
        return result

    def best_arg(self, aa, ba):
        a_free = aa is HOLE or isinstance(aa, Var)
        b_free = ba is HOLE or isinstance(ba, Var)
        if a_free and b_free:
            if aa is HOLE and ba is HOLE:
                return 0, [HOLE], 1
            return 0, [("p", _content_key(aa, "a"), _content_key(ba, "b"))], 1
        if aa is HOLE or ba is HOLE:
            return 0, [HOLE], 0
        pair = ("p", _content_key(aa, "a"), _content_key(ba, "b"))
        a_node = isinstance(aa, Node)
        b_node = isinstance(ba, Node)
        a_conj = isinstance(aa, tuple)
        b_conj = isinstance(ba, tuple)
        if a_node and b_node:
            if aa.label == ba.label:
                return self.best_nodes(aa, ba)
            return 0, [pair], 0
        if a_conj and b_conj:
            size, opts, free = self.best_group(aa, ba)
            if size == 0:
                return 0, [pair], 0
            groups = [("c", members) for members in opts]
            return size, groups, free
        if a_conj and b_node:
            return self._conj_vs_node(aa, ba, swap=False, pair=pair)
        if b_conj and a_node:
            return self._conj_vs_node(ba, aa, swap=True, pair=pair)
        # variable against structure: a generalization point, not a shared edge
        return 0, [pair], 0

    def _conj_vs_node(self, members, node, swap, pair):
        best_size = 0
        best_free = 0
        best_opts = []
        for member in members:
            if member.label != node.label:
                continue
            size, opts, free = self.best_nodes(member, node) if not swap else self.best_nodes(node, member)
            if size > best_size:
                best_size, best_free, best_opts = size, free, list(opts)
            elif size == best_size and size > 0:
                best_opts.extend(opts)
                best_free = max(best_free, free)
        if best_size == 0:
            return 0, [pair], 0
        return best_size, best_opts[:_MAX_OPTIONS], best_free

    def best_group(self, amembers, bmembers):
        """Maximal matchings between two conjunction groups.  Unmatched
        members are dropped.  Returns (total size, member list options,
        free-link count)."""
        key = (tuple(m.vid for m in amembers), tuple(m.vid for m in bmembers))
        got = self.group_memo.get(key)
        if got is not None:
            return got
        sizes = {}
        for i, ma in enumerate(amembers):
            for j, mb in enumerate(bmembers):
                if ma.label == mb.label:
                    sizes[(i, j)] = self.best_nodes(ma, mb)[0]

        best_total = [0]
        matchings = set()

        def search(i, used, pairs, total, bound):
            if total + bound < best_total[0]:
                return
            if i == len(amembers):
                if total > best_total[0]:
                    best_total[0] = total
                    matchings.clear()
                if total == best_total[0] and total > 0:
                    matchings.add(tuple(sorted(pairs)))
                return
            remaining = sum(
                max((sizes.get((k, j), 0) for j in range(len(bmembers))), default=0)
                for k in range(i + 1, len(amembers))
            )
            search(i + 1, used, pairs, total, remaining)
            for j in range(len(bmembers)):
                if j in used or (i, j) not in sizes:
                    continue
                search(i + 1, used | {j}, pairs + [(i, j)], total + sizes[(i, j)], remaining)

        search(0, frozenset(), [], 0, sum(s for s in sizes.values()))

        options = []
        free = 0
        for matching in sorted(matchings):
            per_pair = []
            match_free = 0
            for i, j in matching:
                _, opts, f = self.best_nodes(amembers[i], bmembers[j])
                per_pair.append(opts)
                match_free += f
            free = max(free, match_free)
            for combo in itertools.product(*per_pair):
                options.append(list(combo))
                if len(options) >= _MAX_OPTIONS:
                    break
            if len(options) >= _MAX_OPTIONS:
                break
        result = (best_total[0], options, free)
        self.group_memo[key] = result
        return result


def _materialize(gterm, names):
    if gterm is HOLE:
        return HOLE
    kind = gterm[0]
    if kind == "p":
        key = (gterm[1], gterm[2])
        if key not in names:
            names[key] = Var(f"G{len(names)}")
        return names[key]
    if kind == "t":
        return Node(gterm[1], [_materialize(g, names) for g in gterm[2]])
    if kind == "c":
        members = [_materialize(g, names) for g in gterm[1]]
        if len(members) == 1:
            return members[0]
        return tuple(members)
    raise AssertionError(gterm)


def _finalize(member_gterms, *, prune=True):
    names = {}
    trees = []
    for g in member_gterms:
        built = _materialize(g, names)
        if isinstance(built, tuple):
            trees.extend(built)
        else:
            trees.append(built)
    forest = Forest(trees)
    if prune:
        forest = prune_orphan_vars(forest)
    return assign_vids(canonical(forest))


def _conj_slots(forest):
    slots = [tuple(forest.trees)]
    for node in forest.nodes():
        for arg in node.args:
            if isinstance(arg, tuple):
                slots.append(arg)
    return slots


def lics(a, b):
    """All largest isomorphic connected sub-forests of two forests, as
    canonical meanings.  Ties are all returned; connectivity runs through
    conjunction groups; with no common structure at all the result is empty.
    """
    if not a.trees or not b.trees:
        raise ValueError("lics requires non-empty forests")
    if a.key == b.key:
        return [assign_vids(canonical(prune_orphan_vars(a)))]
    a = assign_vids(a)
    b = assign_vids(b)
    matcher = _Matcher(a, b)

    a_by_label = {}
    for node in a.nodes():
        a_by_label.setdefault(node.label, []).append(node)
    b_by_label = {}
    for node in b.nodes():
        b_by_label.setdefault(node.label, []).append(node)

    candidates = []  # (size, member gterm list); gated: a single matched
    # vertex only counts with a free link standing in for a shared edge
    for label, a_nodes in a_by_label.items():
        for na in a_nodes:
            for nb in b_by_label.get(label, ()):
                size, opts, free = matcher.best_nodes(na, nb)
                if size < 2 and free < 1:
                    continue
                for opt in opts:
                    candidates.append((size, [opt]))
    for ga in _conj_slots(a):
        for gb in _conj_slots(b):
            size, opts, free = matcher.best_group(ga, gb)
            if size < 2 and free < 1:
                continue
            for members in opts:
                candidates.append((size, members))

    if not candidates:
        return []
    best = max(size for size, _ in candidates)
    if best < 1:
        return []
    results = {}
    for size, members in candidates:
        if size == best:
            forest = _finalize(members)
            results.setdefault(forest.key, forest)
    return [results[k] for k in sorted(results)]


def lgg_refine(a, b):
    """Anti-unification of two forests under the best conjunct ordering:
    common structure is kept, differing subterms generalize to shared
    variables (the same pair of subterms always maps to the same variable),
    unmatched conjuncts are dropped.  Variables are preserved even when they
    end up with a single occurrence."""
    if not a.trees or not b.trees:
        return Forest()
    a = assign_vids(a)
    b = assign_vids(b)
    matcher = _Matcher(a, b)
    size, opts, _ = matcher.best_group(tuple(a.trees), tuple(b.trees))
    if size < 1 or not opts:
        return Forest()
    built = [_finalize(members, prune=False) for members in opts]
    built.sort(key=lambda f: f.key)
    return built[0]


# ---------------------------------------------------------------------------
# fracturing


def fracture(forest, cap=100000):
    """Every connected substructure of a forest (connectivity runs through
    conjunction groups), canonicalized and deduplicated, plus the empty
    forest.  Raises FractureCapError when enumeration exceeds ``cap``."""
    produced = [0]

    def tick():
        produced[0] += 1
        if produced[0] > cap:
            raise FractureCapError(cap)

    def pieces(node):
        per_position = []
        for arg in node.args:
            if arg is HOLE:
                per_position.append([HOLE])
            elif isinstance(arg, Var):
                per_position.append([arg])
            elif isinstance(arg, Node):
                per_position.append([HOLE] + pieces(arg))
            else:
                options = [HOLE]
                member_pieces = [pieces(m) for m in arg]
                n = len(arg)
                for mask in range(1, 1 << n):
                    chosen = [member_pieces[i] for i in range(n) if mask & (1 << i)]
                    for combo in itertools.product(*chosen):
                        options.append(combo[0] if len(combo) == 1 else tuple(combo))
                per_position.append(options)
        out = []
        for combo in itertools.product(*per_position):
            tick()
            out.append(Node(node.name, list(combo)))
        return out

    results = {"": Forest()}
    all_pieces = {}
    for node in forest.nodes():
        all_pieces[node.vid] = pieces(node)
        for piece in all_pieces[node.vid]:
            built = assign_vids(canonical(prune_orphan_vars(Forest([piece]))))
            results.setdefault(built.key, built)
    for group in _conj_slots(forest):
        if len(group) < 2:
            continue
        member_pieces = [all_pieces[m.vid] for m in group]
        n = len(group)
        for mask in range(1, 1 << n):
            chosen = [member_pieces[i] for i in range(n) if mask & (1 << i)]
            for combo in itertools.product(*chosen):
                tick()
                built = assign_vids(canonical(prune_orphan_vars(Forest(combo))))
                results.setdefault(built.key, built)
    return [results[k] for k in sorted(results)]


# ---------------------------------------------------------------------------
# per-phrase generation


def sample_pairs(n, limit, rng):
    """Up to ``limit`` distinct index pairs (i < j) out of n items, all of
    them when they fit."""
    total = n * (n - 1) // 2
    if total <= limit:
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    picks = sorted(rng.sample(range(total), limit))
    pairs = []
    for rank in picks:
        # unrank: pairs ordered (0,1), (0,2), ... (0,n-1), (1,2), ...
        i = 0
        before = 0
        while before + (n - i - 1) <= rank:
            before += n - i - 1
            i += 1
        j = i + 1 + (rank - before)
        pairs.append((i, j))
    return pairs


def lics_candidates(reps, cfg, rng, cache=None, fallback_isolated=False):
    """Candidate meanings for one phrase from its example representations.

    ``reps`` is a list of non-empty forests.  With two or more, LICS is
    taken over sampled distinct pairs; a single representation becomes the
    candidate itself.  With ``fallback_isolated``, any sampled representation
    that shares no structure with any of its sampled partners contributes its
    entire representation as a candidate.
    """
    if not reps:
        return []
    if len(reps) == 1:
        return [assign_vids(canonical(prune_orphan_vars(reps[0])))]
    results = {}
    produced_any = {}
    for i, j in sample_pairs(len(reps), cfg.pairs_per_phrase, rng):
        key = (reps[i].key, reps[j].key)
        if cache is not None and key in cache:
            found = cache[key]
        else:
            found = lics(reps[i], reps[j])
            if cache is not None:
                cache[key] = found
        produced_any[i] = produced_any.get(i, False) or bool(found)
        produced_any[j] = produced_any.get(j, False) or bool(found)
        for forest in found:
            results.setdefault(forest.key, forest)
    if fallback_isolated:
        for i, ok in sorted(produced_any.items()):
            if not ok:
                whole = assign_vids(canonical(prune_orphan_vars(reps[i])))
                results.setdefault(whole.key, whole)
    return [results[k] for k in sorted(results)]


def fracture_candidates(reps, cfg, rng):
    """Candidate meanings from fracturing sampled representations: the union
    of every representation's non-empty fractures."""
    if not reps:
        return []
    chosen = reps if len(reps) <= cfg.pairs_per_phrase else rng.sample(reps, cfg.pairs_per_phrase)
    results = {}
    for rep in chosen:
        for forest in fracture(rep, cfg.fracture_cap):
            if forest.trees:
                results.setdefault(forest.key, forest)
    return [results[k] for k in sorted(results)]
