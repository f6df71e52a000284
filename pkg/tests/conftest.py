import json
import random
from pathlib import Path

import pytest

from kgraph.graphs import InvolutionData, KGraph, load_graph

CORPUS = Path(__file__).resolve().parents[1] / "src" / "kgraph" / "corpus"


def corpus_graph(name):
    return load_graph(json.loads((CORPUS / f"{name}.json").read_text()))


def random_matrix(rng: random.Random, n: int, max_mult: int = 3, density: float = 0.4):
    """Source-free nonnegative matrix: every row has a nonzero entry."""
    M = [[rng.randint(1, max_mult) if rng.random() < density else 0 for _ in range(n)] for _ in range(n)]
    for r in M:
        if not any(r):
            r[rng.randrange(n)] = rng.randint(1, max_mult)
    return M


def random_equivariant(rng: random.Random, nfixed: int, npairs: int, max_mult: int = 3, density: float = 0.4):
    """Rank-1 graph with an involution fixing ``nfixed`` vertices and swapping ``npairs`` pairs."""
    verts = [f"f{i}" for i in range(nfixed)] + [f"g{i}" for i in range(npairs)] + [f"h{i}" for i in range(npairs)]
    gamma = {v: v for v in verts[:nfixed]}
    for i in range(npairs):
        gamma[f"g{i}"], gamma[f"h{i}"] = f"h{i}", f"g{i}"
    idx = {v: k for k, v in enumerate(verts)}
    n = len(verts)
    M = [[0] * n for _ in range(n)]
    for v in verts:
        for w in verts:
            if rng.random() < density:
                x = rng.randint(1, max_mult)
                M[idx[v]][idx[w]] = x
                M[idx[gamma[v]]][idx[gamma[w]]] = x
    for v in verts:
        if not any(M[idx[v]]):
            w = rng.choice(verts)
            M[idx[v]][idx[w]] = 1
            M[idx[gamma[v]]][idx[gamma[w]]] = 1
    G = KGraph(1, verts, [M])
    return G, InvolutionData(gamma)


@pytest.fixture
def rng():
    return random.Random(20261016)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(verdicts):
        terminalreporter.write_line(verdicts[n])
