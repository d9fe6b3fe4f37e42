"""Directed-graph bookkeeping for pairs of permutations.

For a pair (sigma, rho) and a start index m, the cycle of
``inverse(sigma) o rho`` through m is read off as two aligned index
sequences: ``i_seq`` walks the cycle starting at m and ``j_seq`` holds
the rho-images of the walk. These sequences induce two small directed
graphs, one contained in the functional graph of sigma and one in the
functional graph of rho:

* the sigma-side graph has edges (i_{l+1}, j_l) for l < k plus the wrap
  edge (i_1, j_k), and each edge (a, b) records the constraint
  sigma(a) = b;
* the rho-side graph has edges (i_l, j_l), recording rho(a) = b.

Everything downstream, equivalence classes under relabeling, the
single-edge matching classes, counts of realizable graph couples, is
exact combinatorics on these graphs. Vertices are labelled 1..n and
edges are ordered pairs; a loop (i, i) is a component with one vertex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from permprod.perms import Permutation, inverse

__all__ = [
    "DirectedGraph",
    "GraphClass",
    "TraversalRecord",
    "GraphProfile",
    "traversal",
    "graphs_from_traversal",
    "graphs_from_record",
    "union_graphs",
    "canonical_class",
    "membership",
    "profile",
    "is_T_class",
    "t_class",
    "enumerate_B",
    "no_two_cycles_when_components_small",
    "shared_cycle_graphs_match",
    "reversal_identities_hold",
    "relabel_dichotomy_holds",
    "joint_membership_consistent",
]

# Lexicographic canonicalization is brute force over relabelings, so the
# number of non-isolated vertices is capped.
_CANON_MAX_VERTICES = 9


@dataclass(frozen=True)
class DirectedGraph:
    """Directed graph on the vertex set {1, ..., n}, edges as ordered pairs."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("graph needs n >= 1")
        for edge in self.edges:
            if len(edge) != 2:
                raise ValueError(f"malformed edge {edge!r}")
            a, b = edge
            if not (1 <= a <= self.n and 1 <= b <= self.n):
                raise ValueError(f"edge {edge!r} outside 1..{self.n}")

    @classmethod
    def of(cls, n: int, edges: Iterable[tuple[int, int]]) -> "DirectedGraph":
        return cls(n, frozenset((int(a), int(b)) for a, b in edges))

    def non_isolated(self) -> frozenset[int]:
        verts: set[int] = set()
        for a, b in self.edges:
            verts.add(a)
            verts.add(b)
        return frozenset(verts)

    def reversed_edges(self) -> "DirectedGraph":
        """The graph with every edge reversed (adjacency-matrix transpose)."""
        return DirectedGraph(self.n, frozenset((b, a) for a, b in self.edges))

    def relabel(self, t: Permutation) -> "DirectedGraph":
        """Rename vertex x to t(x) everywhere."""
        if t.n != self.n:
            raise ValueError(f"size mismatch: {t.n} vs {self.n}")
        return DirectedGraph(self.n, frozenset((t(a), t(b)) for a, b in self.edges))

    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        rows = [[0] * self.n for _ in range(self.n)]
        for a, b in self.edges:
            rows[a - 1][b - 1] = 1
        return tuple(tuple(r) for r in rows)

    def to_text(self) -> str:
        lines = [f"n={self.n}"]
        for a, b in sorted(self.edges):
            lines.append(f"{a} {b}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DirectedGraph":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("n="):
            raise ValueError("graph text must start with an 'n=<int>' header")
        n = int(lines[0][2:])
        edges = []
        for ln in lines[1:]:
            a, b = ln.split()
            edges.append((int(a), int(b)))
        return cls.of(n, edges)


@dataclass(frozen=True)
class TraversalRecord:
    """The aligned index sequences of one traversal.

    ``i_seq`` is the cycle of ``inverse(sigma) o rho`` through ``m`` and
    ``j_seq[l]`` is rho applied to ``i_seq[l]``. Both sequences have
    length ``k`` and pairwise distinct entries, and ``i_seq[0] == m``.
    """

    m: int
    k: int
    i_seq: tuple[int, ...]
    j_seq: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.k != len(self.i_seq) or self.k != len(self.j_seq) or self.k < 1:
            raise ValueError("sequence lengths disagree with k")
        if self.i_seq[0] != self.m:
            raise ValueError("i_seq must start at m")
        if len(set(self.i_seq)) != self.k or len(set(self.j_seq)) != self.k:
            raise ValueError("traversal sequences must have distinct entries")


@dataclass(frozen=True)
class GraphProfile:
    """Component-level summary used by the probability bounds.

    ``nontrivial`` lists the edge-bearing weakly connected components as
    (vertex frozenset, edge frozenset) pairs; isolated vertices are not
    listed. ``loop_count`` counts edges (i, i) anywhere in the graph.
    """

    loop_count: int
    non_isolated: frozenset[int]
    nontrivial: tuple[tuple[frozenset[int], frozenset[tuple[int, int]]], ...]

    @property
    def component_count(self) -> int:
        return len(self.nontrivial)

    @property
    def vertex_count(self) -> int:
        return len(self.non_isolated)


def traversal(sigma: Permutation, rho: Permutation, m: int) -> TraversalRecord:
    """Walk the cycle of ``inverse(sigma) o rho`` through m, recording rho-images."""
    if sigma.n != rho.n:
        raise ValueError(f"size mismatch: {sigma.n} vs {rho.n}")
    if not 1 <= m <= sigma.n:
        raise ValueError(f"start index {m} outside 1..{sigma.n}")
    sinv = inverse(sigma)
    i_seq = [m]
    j_seq = [rho(m)]
    x = sinv(j_seq[-1])
    while x != m:
        i_seq.append(x)
        j_seq.append(rho(x))
        x = sinv(j_seq[-1])
    return TraversalRecord(m=m, k=len(i_seq), i_seq=tuple(i_seq), j_seq=tuple(j_seq))


def graphs_from_record(record: TraversalRecord, n: int) -> tuple[DirectedGraph, DirectedGraph]:
    """Build the sigma-side and rho-side graphs of one traversal."""
    k = record.k
    i_seq, j_seq = record.i_seq, record.j_seq
    first = {(i_seq[0], j_seq[k - 1])}
    for l in range(k - 1):
        first.add((i_seq[l + 1], j_seq[l]))
    second = {(i_seq[l], j_seq[l]) for l in range(k)}
    return DirectedGraph(n, frozenset(first)), DirectedGraph(n, frozenset(second))


def graphs_from_traversal(
    sigma: Permutation, rho: Permutation, m: int
) -> tuple[DirectedGraph, DirectedGraph]:
    return graphs_from_record(traversal(sigma, rho, m), sigma.n)


def union_graphs(
    sigma: Permutation, rho: Permutation, index_set: Sequence[int]
) -> tuple[DirectedGraph, DirectedGraph]:
    """Union of the per-index graphs over ``index_set``, sigma side and rho side."""
    indices = list(index_set)
    if not indices:
        raise ValueError("index_set must not be empty")
    if len(set(indices)) != len(indices):
        raise ValueError(f"duplicate indices in {indices!r}")
    first: set[tuple[int, int]] = set()
    second: set[tuple[int, int]] = set()
    for m in indices:
        g1, g2 = graphs_from_traversal(sigma, rho, m)
        first |= g1.edges
        second |= g2.edges
    return DirectedGraph(sigma.n, frozenset(first)), DirectedGraph(sigma.n, frozenset(second))


@lru_cache(maxsize=None)
def _lex_min_form(v: int, edges: frozenset) -> tuple[tuple[int, int], ...]:
    # Smallest sorted edge tuple over all relabelings of 1..v.
    if v > _CANON_MAX_VERTICES:
        raise ValueError(
            f"canonicalization capped at {_CANON_MAX_VERTICES} non-isolated vertices, got {v}"
        )
    edge_list = list(edges)
    best: tuple[tuple[int, int], ...] | None = None
    for phi in itertools.permutations(range(1, v + 1)):
        cand = tuple(sorted((phi[a - 1], phi[b - 1]) for a, b in edge_list))
        if best is None or cand < best:
            best = cand
    assert best is not None
    return best


@dataclass(frozen=True)
class GraphClass:
    """A graph up to deleting isolated vertices and relabeling the rest.

    Stored as the representative on {1, ..., vertex_count} whose sorted
    edge tuple is lexicographically least over all relabelings. Two
    graphs get equal GraphClass values exactly when they agree after
    stripping isolated vertices, up to isomorphism.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        touched: set[int] = set()
        for a, b in self.edges:
            if not (1 <= a <= self.vertex_count and 1 <= b <= self.vertex_count):
                raise ValueError(f"edge ({a}, {b}) outside 1..{self.vertex_count}")
            touched.add(a)
            touched.add(b)
        if self.vertex_count and touched != set(range(1, self.vertex_count + 1)):
            raise ValueError("class representative must have no isolated vertices")
        if self.edges != _lex_min_form(self.vertex_count, frozenset(self.edges)):
            raise ValueError("class representative is not in canonical form")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def to_graph(self, n: int | None = None) -> DirectedGraph:
        n = self.vertex_count if n is None else n
        if n < self.vertex_count:
            raise ValueError("target ground set smaller than the representative")
        return DirectedGraph.of(max(n, 1), self.edges)

    def to_text(self) -> str:
        return self.to_graph().to_text()


def canonical_class(g: DirectedGraph) -> GraphClass:
    """Strip isolated vertices, then relabel to the lexicographically least form."""
    verts = sorted(g.non_isolated())
    index = {x: pos for pos, x in enumerate(verts, start=1)}
    stripped = frozenset((index[a], index[b]) for a, b in g.edges)
    return GraphClass(len(verts), _lex_min_form(len(verts), stripped))


def membership(sigma: Permutation, g: DirectedGraph) -> bool:
    """Whether sigma satisfies every edge constraint sigma(i) = j of ``g``."""
    if sigma.n != g.n:
        raise ValueError(f"size mismatch: {sigma.n} vs {g.n}")
    return all(sigma(a) == b for a, b in g.edges)


def profile(g: DirectedGraph) -> GraphProfile:
    """Weakly connected components of the edge-bearing part of ``g``."""
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    loops = 0
    for a, b in g.edges:
        if a == b:
            loops += 1
        for v in (a, b):
            parent.setdefault(v, v)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comp_verts: dict[int, set[int]] = {}
    for v in parent:
        comp_verts.setdefault(find(v), set()).add(v)
    comp_edges: dict[int, set[tuple[int, int]]] = {root: set() for root in comp_verts}
    for a, b in g.edges:
        comp_edges[find(a)].add((a, b))
    nontrivial = tuple(
        sorted(
            (
                (frozenset(comp_verts[root]), frozenset(comp_edges[root]))
                for root in comp_verts
            ),
            key=lambda pair: min(pair[0]),
        )
    )
    return GraphProfile(
        loop_count=loops,
        non_isolated=g.non_isolated(),
        nontrivial=nontrivial,
    )


def _has_two_cycle(edges: Iterable[tuple[int, int]]) -> bool:
    edge_set = set(edges)
    return any(a != b and (b, a) in edge_set for a, b in edge_set)


def is_T_class(g: DirectedGraph, k: int) -> bool:
    """Whether ``g`` has exactly k non-trivial components, each a single
    edge between two distinct vertices."""
    if k < 0:
        raise ValueError("component count must be >= 0")
    prof = profile(g)
    if prof.component_count != k:
        return False
    for verts, edges in prof.nontrivial:
        if len(verts) != 2 or len(edges) != 1:
            return False
        (a, b), = edges
        if a == b:
            return False
    return True


def t_class(k: int) -> GraphClass:
    """The class of k pairwise disjoint single edges."""
    if k < 1:
        raise ValueError("t_class needs k >= 1")
    edges = [(2 * i + 1, 2 * i + 2) for i in range(k)]
    return canonical_class(DirectedGraph.of(2 * k, edges))


def _partial_bijection(edges: Iterable[tuple[int, int]]) -> tuple[dict, dict] | None:
    forward: dict[int, int] = {}
    backward: dict[int, int] = {}
    for a, b in edges:
        if forward.get(a, b) != b or backward.get(b, a) != a:
            return None
        forward[a] = b
        backward[b] = a
    return forward, backward


def joint_membership_consistent(e1: Iterable[tuple[int, int]], e2: Iterable[tuple[int, int]]) -> bool:
    """Whether some permutation satisfies every constraint of both edge sets."""
    return _partial_bijection(list(e1) + list(e2)) is not None


def _trace_realizes(
    v_vec: Sequence[int],
    e1: frozenset[tuple[int, int]],
    e2: frozenset[tuple[int, int]],
) -> bool:
    """Decide whether some pair (sigma, rho) produces exactly the union
    graphs (e1, e2) over start indices 1..k with prescribed cycle lengths.

    The union edges force partial values of sigma and rho, and those
    forced values determine every traversal step, so the decision is a
    replay: walk from each start index using only forced edges, demand
    that each walk closes at its start after exactly the prescribed
    number of steps, and at the end demand that every edge was consumed.
    """
    maps1 = _partial_bijection(e1)
    maps2 = _partial_bijection(e2)
    if maps1 is None or maps2 is None:
        return False
    _, s_inv = maps1
    r, _ = maps2
    used1: set[tuple[int, int]] = set()
    used2: set[tuple[int, int]] = set()
    cycle_len: dict[int, int] = {}
    for m, want in enumerate(v_vec, start=1):
        if m in cycle_len:
            if cycle_len[m] != want:
                return False
            continue
        walk = [m]
        i = m
        for step in range(1, want + 1):
            j = r.get(i)
            if j is None:
                return False
            used2.add((i, j))
            nxt = s_inv.get(j)
            if nxt is None:
                return False
            used1.add((nxt, j))
            if nxt == m:
                if step != want:
                    return False
                break
            if nxt in cycle_len or nxt in walk:
                return False
            walk.append(nxt)
            i = nxt
        else:
            return False
        for x in walk:
            cycle_len[x] = want
    return used1 == e1 and used2 == e2


def enumerate_B(
    n: int,
    v_vec: Sequence[int],
    class1: GraphClass,
    class2: GraphClass,
    return_couples: bool = False,
):
    """Count the realizable graph couples on {1, ..., n} for the given classes.

    A couple (g1, g2) is counted when: both graphs have the same
    non-isolated vertex set including every start index 1..k, their
    classes are ``class1`` and ``class2``, and some pair (sigma, rho)
    produces exactly (g1, g2) as union graphs over start indices 1..k
    with cycle lengths ``v_vec``.
    """
    k = len(v_vec)
    if k < 1:
        raise ValueError("v_vec must not be empty")
    if any(v < 1 for v in v_vec):
        raise ValueError(f"cycle lengths must be >= 1: {v_vec!r}")
    if n < 1:
        raise ValueError("enumerate_B needs n >= 1")
    couples: set[tuple[frozenset, frozenset]] = set()
    w = class1.vertex_count
    starts = set(range(1, k + 1))
    if w == class2.vertex_count and w <= n:
        for verts in itertools.permutations(range(1, n + 1), w):
            if not starts.issubset(verts):
                continue
            e1 = frozenset((verts[a - 1], verts[b - 1]) for a, b in class1.edges)
            for phi in itertools.permutations(verts):
                e2 = frozenset((phi[a - 1], phi[b - 1]) for a, b in class2.edges)
                key = (e1, e2)
                if key in couples:
                    continue
                if _trace_realizes(v_vec, e1, e2):
                    couples.add(key)
    if return_couples:
        graphs = sorted(
            ((DirectedGraph(n, e1), DirectedGraph(n, e2)) for e1, e2 in couples),
            key=lambda pair: (sorted(pair[0].edges), sorted(pair[1].edges)),
        )
        return len(couples), graphs
    return len(couples)


def no_two_cycles_when_components_small(
    sigma: Permutation, rho: Permutation, m: int
) -> bool:
    """If every non-trivial component of both traversal graphs has exactly
    two vertices, neither graph may contain a 2-cycle. Returns True when
    that implication holds for this (sigma, rho, m)."""
    g1, g2 = graphs_from_traversal(sigma, rho, m)
    for g in (g1, g2):
        for verts, _ in profile(g).nontrivial:
            if len(verts) != 2:
                return True
    return not (_has_two_cycle(g1.edges) or _has_two_cycle(g2.edges))


def shared_cycle_graphs_match(
    sigma: Permutation, rho: Permutation, m1: int, m2: int
) -> bool:
    """Start indices on the same traversal cycle must induce identical graphs.

    Vacuously true when m1 is not on the cycle through m2.
    """
    record = traversal(sigma, rho, m2)
    if m1 not in record.i_seq:
        return True
    a1, a2 = graphs_from_traversal(sigma, rho, m1)
    b1, b2 = graphs_from_record(record, sigma.n)
    return a1.edges == b1.edges and a2.edges == b2.edges


def reversal_identities_hold(sigma: Permutation, rho: Permutation, m: int) -> bool:
    """The five exchange identities tying the traversal of (sigma, rho) to
    the traversal of (rho, sigma) and to the inverted pair.

    With r = traversal(sigma, rho, m) and s = traversal(rho, sigma, m):
    equal lengths; s.j reverses r.j; s.i reverses r.i off the anchor;
    both anchors are m; and the sigma-side graph of (sigma, rho) at m is
    the edge-reversal of the rho-side graph of (inverse(rho),
    inverse(sigma)) at rho(m).
    """
    r = traversal(sigma, rho, m)
    s = traversal(rho, sigma, m)
    k = r.k
    if s.k != k:
        return False
    for l in range(1, k + 1):
        if s.j_seq[l - 1] != r.j_seq[k - l]:
            return False
    for l in range(2, k + 1):
        if s.i_seq[l - 1] != r.i_seq[k - l + 1]:
            return False
    if r.i_seq[0] != m or s.i_seq[0] != m:
        return False
    g1, _ = graphs_from_record(r, sigma.n)
    _, h2 = graphs_from_traversal(inverse(rho), inverse(sigma), rho(m))
    return g1.reversed_edges().edges == h2.edges


def relabel_dichotomy_holds(g1: DirectedGraph, tau: Permutation) -> bool:
    """Relabeling by a map with a fixed point in every non-trivial component
    either moves the graph to one with incompatible constraints or fixes
    it entirely. Returns True when that dichotomy holds for (g1, tau);
    vacuously true when the fixed-point premise fails.
    """
    if g1.n != tau.n:
        raise ValueError(f"size mismatch: {g1.n} vs {tau.n}")
    fixed = {x for x in range(1, tau.n + 1) if tau(x) == x}
    for verts, _ in profile(g1).nontrivial:
        if not verts & fixed:
            return True
    g2 = g1.relabel(tau)
    if g1.edges == g2.edges:
        return True
    return not joint_membership_consistent(g1.edges, g2.edges)
