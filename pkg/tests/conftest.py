import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from embridge.corpus import DocumentNetwork


@pytest.fixture
def tiny_net() -> DocumentNetwork:
    """Five documents: a triangle (p0 p1 p2), a pendant (p3), an isolate (p4)."""
    ids = ("p0", "p1", "p2", "p3", "p4")
    edges = ((0, 1), (0, 2), (1, 2), (2, 3))
    content = {
        "p0": ("alpha", "beta", "gamma"),
        "p1": ("alpha", "beta", "delta"),
        "p2": ("gamma", "delta", "epsilon"),
        "p4": ("zeta",),
    }
    return DocumentNetwork(ids, edges, content)


@pytest.fixture(scope="session")
def cliques_net():
    """Two disjoint 5-cliques with disjoint vocabularies."""
    from synthdata import two_cliques

    return two_cliques(clique=5, seed=2)
