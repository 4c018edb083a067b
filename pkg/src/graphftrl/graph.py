"""Undirected feedback graphs and clique covers.

Graphs carry an explicit symmetric adjacency matrix; self-loops are always
present. A clique cover is a partition of the arms into cliques of the graph.

Text format accepted by :func:`parse_graph` (whitespace separated, ``#`` starts
a comment that runs to the end of the line)::

    n = 6
    edge 0 1
    edge 1 2
    clique 0 1
    clique 2
    clique 3 4 5

``n = <N>`` must appear before any ``edge``/``clique`` line. ``edge i j`` adds
the undirected edge {i, j}; ``edge i i`` is accepted and ignored. ``clique``
lines are optional; when present they define the cover in order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DimensionError, SizeLimitError

EXACT_COVER_MAX_ARMS = 12


@dataclass(frozen=True, eq=False)
class FeedbackGraph:
    """Undirected graph over ``num_arms`` arms with implicit self-loops."""

    num_arms: int
    adjacency: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.num_arms < 1:
            raise ValueError("a feedback graph needs at least one arm")
        adj = np.array(self.adjacency, dtype=bool)
        if adj.shape != (self.num_arms, self.num_arms):
            raise DimensionError(
                f"adjacency has shape {adj.shape}, expected {(self.num_arms,) * 2}")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        np.fill_diagonal(adj, True)
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_edges(cls, num_arms: int, edges: Iterable[tuple[int, int]]) -> "FeedbackGraph":
        adj = np.zeros((num_arms, num_arms), dtype=bool)
        for i, j in edges:
            if not (0 <= i < num_arms and 0 <= j < num_arms):
                raise IndexError(f"edge ({i}, {j}) out of range for {num_arms} arms")
            adj[i, j] = adj[j, i] = True
        return cls(num_arms, adj)

    def neighbors(self, arm: int) -> np.ndarray:
        """Sorted indices of N(arm), including ``arm`` itself."""
        return np.flatnonzero(self.adjacency[arm])

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i, j])

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges (i < j), self-loops omitted."""
        rows, cols = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(rows.tolist(), cols.tolist()))

    def __eq__(self, other):
        if not isinstance(other, FeedbackGraph):
            return NotImplemented
        return self.num_arms == other.num_arms and np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash((self.num_arms, self.adjacency.tobytes()))


@dataclass(frozen=True, eq=False)
class CliqueCover:
    """Ordered list of disjoint, nonempty arm sets.

    ``arm_to_clique[i]`` is the index of the clique holding arm ``i``, or -1 for
    an arm no clique covers (such a cover fails :func:`validate_cover`).
    """

    num_arms: int
    cliques: tuple[tuple[int, ...], ...]
    arm_to_clique: np.ndarray = field(repr=False)

    @classmethod
    def from_cliques(cls, cliques: Sequence[Iterable[int]], num_arms: Optional[int] = None) -> "CliqueCover":
        blocks = tuple(tuple(sorted(int(i) for i in c)) for c in cliques)
        if num_arms is None:
            num_arms = 1 + max((max(b) for b in blocks if b), default=-1)
        labels = np.full(num_arms, -1, dtype=np.int64)
        for k, block in enumerate(blocks):
            if not block:
                raise ValueError(f"clique {k} is empty")
            for i in block:
                if not 0 <= i < num_arms:
                    raise IndexError(f"arm {i} in clique {k} is out of range for {num_arms} arms")
                if labels[i] != -1:
                    raise ValueError(f"arm {i} appears in cliques {labels[i]} and {k}")
                labels[i] = k
        labels.setflags(write=False)
        return cls(num_arms, blocks, labels)

    @classmethod
    def singletons(cls, num_arms: int) -> "CliqueCover":
        return cls.from_cliques([[i] for i in range(num_arms)], num_arms)

    @property
    def num_cliques(self) -> int:
        return len(self.cliques)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.cliques], dtype=np.int64)

    @property
    def is_partition(self) -> bool:
        return bool(np.all(self.arm_to_clique >= 0))

    def __eq__(self, other):
        if not isinstance(other, CliqueCover):
            return NotImplemented
        return self.num_arms == other.num_arms and self.cliques == other.cliques

    def __hash__(self):
        return hash((self.num_arms, self.cliques))


@dataclass(frozen=True)
class CoverValidation:
    valid: bool
    violating_pair: Optional[tuple[int, int]] = None
    uncovered_arm: Optional[int] = None
    message: str = ""

    def __bool__(self):
        return self.valid


def validate_cover(graph: FeedbackGraph, cover: CliqueCover) -> CoverValidation:
    """Check that ``cover`` partitions the arms into cliques of ``graph``.

    Uncovered arms are reported before non-adjacent pairs. Pairs are scanned
    clique by clique in index order, so the reported pair is the first one.
    """
    if graph.num_arms != cover.num_arms:
        raise DimensionError(
            f"graph has {graph.num_arms} arms but cover has {cover.num_arms}")
    missing = np.flatnonzero(cover.arm_to_clique < 0)
    if missing.size:
        i = int(missing[0])
        return CoverValidation(False, uncovered_arm=i, message=f"arm {i} is not covered")
    for k, block in enumerate(cover.cliques):
        for i, j in combinations(block, 2):
            if not graph.adjacency[i, j]:
                return CoverValidation(
                    False, violating_pair=(i, j),
                    message=f"clique {k} is not complete: no edge between {i} and {j}")
    return CoverValidation(True, message="ok")


def greedy_clique_cover(graph: FeedbackGraph) -> CliqueCover:
    """Deterministic greedy cover; valid but not necessarily minimum."""
    adj = graph.adjacency
    uncovered = np.ones(graph.num_arms, dtype=bool)
    cliques = []
    while uncovered.any():
        seed = int(np.argmax(uncovered))
        clique = [seed]
        uncovered[seed] = False
        candidates = uncovered & adj[seed]
        while candidates.any():
            nxt = int(np.argmax(candidates))
            clique.append(nxt)
            uncovered[nxt] = False
            candidates &= adj[nxt]
            candidates[nxt] = False
        cliques.append(clique)
    return CliqueCover.from_cliques(cliques, graph.num_arms)


def exact_min_cover(graph: FeedbackGraph) -> CliqueCover:
    """Minimum clique cover by branch-and-bound over set partitions.

    Arms are placed in index order, each either joining an existing block it is
    fully adjacent to (tried in block order) or opening a new block. This walks
    restricted-growth strings lexicographically, and only strictly better covers
    replace the incumbent, so ties resolve to the lexicographically first one.
    """
    n = graph.num_arms
    if n > EXACT_COVER_MAX_ARMS:
        raise SizeLimitError(f"exact_min_cover handles at most {EXACT_COVER_MAX_ARMS} arms, got {n}")
    adj = graph.adjacency
    # bitmask of neighbors, self excluded, for quick compatibility checks
    nbr = [sum(1 << j for j in range(n) if adj[i, j] and j != i) for i in range(n)]
    best: list = [n + 1, None]
    blocks: list[int] = []
    members: list[list[int]] = []

    def place(i: int):
        if len(blocks) >= best[0]:
            return
        if i == n:
            best[0] = len(blocks)
            best[1] = [list(m) for m in members]
            return
        for b in range(len(blocks)):
            if blocks[b] & ~nbr[i] == 0:
                blocks[b] |= 1 << i
                members[b].append(i)
                place(i + 1)
                members[b].pop()
                blocks[b] &= ~(1 << i)
        if len(blocks) + 1 < best[0]:
            blocks.append(1 << i)
            members.append([i])
            place(i + 1)
            members.pop()
            blocks.pop()

    place(0)
    return CliqueCover.from_cliques(best[1], n)


def clique_of(cover: CliqueCover, arm: int) -> int:
    if not 0 <= arm < cover.num_arms:
        raise IndexError(f"arm {arm} out of range for {cover.num_arms} arms")
    k = int(cover.arm_to_clique[arm])
    if k < 0:
        raise ValueError(f"arm {arm} is not covered")
    return k


# -- generators ---------------------------------------------------------------

def complete_graph(n: int) -> FeedbackGraph:
    return FeedbackGraph(n, np.ones((n, n), dtype=bool))


def edgeless_graph(n: int) -> FeedbackGraph:
    return FeedbackGraph(n, np.eye(n, dtype=bool))


def disjoint_cliques(sizes: Sequence[int]) -> FeedbackGraph:
    """Disjoint union of complete graphs with the given sizes, arms numbered blockwise."""
    n = int(sum(sizes))
    adj = np.zeros((n, n), dtype=bool)
    start = 0
    for s in sizes:
        adj[start:start + s, start:start + s] = True
        start += s
    return FeedbackGraph(n, adj)


def cycle_graph(n: int) -> FeedbackGraph:
    return FeedbackGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_bipartite(a: int, b: int) -> FeedbackGraph:
    return FeedbackGraph.from_edges(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def erdos_renyi(n: int, p: float, rng: np.random.Generator) -> FeedbackGraph:
    upper = np.triu(rng.random((n, n)) < p, k=1)
    return FeedbackGraph(n, upper | upper.T)


def block_cover(sizes: Sequence[int]) -> CliqueCover:
    """The natural cover of :func:`disjoint_cliques` with the same sizes."""
    bounds = np.cumsum([0, *sizes])
    return CliqueCover.from_cliques(
        [range(bounds[k], bounds[k + 1]) for k in range(len(sizes))], int(bounds[-1]))


# -- text format ----------------------------------------------------------------

def parse_graph(text: str) -> tuple[FeedbackGraph, Optional[CliqueCover]]:
    n = None
    edges = []
    cliques = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.replace("=", " = ").split()
        head = tokens[0].lower()
        try:
            if head == "n":
                if len(tokens) != 3 or tokens[1] != "=":
                    raise ValueError("expected 'n = <N>'")
                if n is not None:
                    raise ValueError("'n' given twice")
                n = int(tokens[2])
            elif head in ("edge", "clique"):
                if n is None:
                    raise ValueError(f"'{head}' before 'n = <N>'")
                idx = [int(tok) for tok in tokens[1:]]
                if head == "edge":
                    if len(idx) != 2:
                        raise ValueError("expected 'edge i j'")
                    edges.append((idx[0], idx[1]))
                else:
                    if not idx:
                        raise ValueError("empty clique")
                    cliques.append(idx)
            else:
                raise ValueError(f"unknown directive '{tokens[0]}'")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if n is None:
        raise ValueError("missing 'n = <N>'")
    graph = FeedbackGraph.from_edges(n, edges)
    cover = CliqueCover.from_cliques(cliques, n) if cliques else None
    return graph, cover


def read_graph(path) -> tuple[FeedbackGraph, Optional[CliqueCover]]:
    return parse_graph(Path(path).read_text())


def format_graph(graph: FeedbackGraph, cover: Optional[CliqueCover] = None) -> str:
    lines = [f"n = {graph.num_arms}"]
    lines += [f"edge {i} {j}" for i, j in graph.edges()]
    if cover is not None:
        lines += ["clique " + " ".join(map(str, c)) for c in cover.cliques]
    return "\n".join(lines) + "\n"
