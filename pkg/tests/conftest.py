import os

import pytest
from hypothesis import strategies as st

from lexinduct.corpus import BackgroundLexicon, load_corpus
from lexinduct.terms import HOLE, Forest, Node, Var, assign_vids

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
SPANISH = os.path.join(FIXTURES, "spanish")


@pytest.fixture(scope="session")
def spanish_paths():
    return {
        "corpus": os.path.join(SPANISH, "corpus.txt"),
        "background": os.path.join(SPANISH, "background.tsv"),
        "stoplist": os.path.join(SPANISH, "stoplist.txt"),
    }


@pytest.fixture(scope="session")
def spanish_corpus(spanish_paths):
    return load_corpus(spanish_paths["corpus"], "paired", strip_answer=True)


@pytest.fixture(scope="session")
def spanish_bg(spanish_paths):
    return BackgroundLexicon.load(spanish_paths["background"], spanish_paths["stoplist"])


# The ten lexicon entries the seven-sentence fixture must produce, with the
# pinned scores of the first two selections.
SPANISH_GOLDEN = {
    ("estado", "state(_)"),
    ("grande", "largest(_,_)"),
    ("area", "area(_,_)"),
    ("punta", "high_point(_,_)"),
    ("población", "population(_,_)"),
    ("capital", "capital(_,_)"),
    ("encuentra", "loc(_,_)"),
    ("alta", "loc(_,_)"),
    ("bordean", "next_to(_,_)"),
    ("capital", "capital(_)"),
}


# ---------------------------------------------------------------------------
# random forests for property tests; sized to keep canonicalization exact


_SYMBOLS = ["f", "g", "h", "k"]
_VARS = ["X", "Y", "Z"]


def _tree(depth):
    if depth == 0:
        return st.builds(lambda n: Node(n, ()), st.sampled_from(_SYMBOLS))
    arg = st.one_of(
        st.just(HOLE),
        st.builds(Var, st.sampled_from(_VARS)),
        _tree(depth - 1),
    )
    if depth >= 2:
        arg = st.one_of(arg, st.tuples(_tree(depth - 1), _tree(depth - 1)))
    return st.builds(
        lambda n, args: Node(n, args),
        st.sampled_from(_SYMBOLS),
        st.lists(arg, min_size=0, max_size=2).map(tuple),
    )


@st.composite
def forests(draw, max_trees=3, depth=2):
    trees = draw(st.lists(_tree(depth), min_size=1, max_size=max_trees))
    return assign_vids(Forest(trees))


@st.composite
def nonempty_forests(draw):
    return draw(forests())
