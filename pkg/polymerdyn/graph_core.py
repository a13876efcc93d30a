"""
Graph representations and the set, degree and expansion primitives.

Vertices are the integers ``0 .. n-1``. A vertex set is a sorted tuple of
distinct vertices; this canonical form is the deduplication key everywhere
in the package.
"""

import bisect
from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import csgraph, csr_matrix

from polymerdyn.config import get_settings
from polymerdyn.errors import (
    DisconnectedSetError,
    DuplicateEdgeError,
    EmptyVertexSetError,
    GraphValidationError,
    ParameterError,
    SelfLoopError,
    VertexRangeError,
)

VertexSet = Tuple[int, ...]
Edge = Tuple[int, int]

MULTIGRAPH_HEADER = "multigraph"


def vertex_set(vertices: Iterable[int], n: Optional[int] = None) -> VertexSet:
    """
    Canonicalise an iterable of vertices.

    Args:
        vertices: Vertex indices, in any order, possibly repeated
        n: If given, every vertex must lie in [0, n)

    Returns:
        Sorted, duplicate-free tuple

    Raises:
        VertexRangeError: If a vertex lies outside [0, n)
    """
    canonical = tuple(sorted({int(v) for v in vertices}))
    if n is not None and canonical and (canonical[0] < 0 or canonical[-1] >= n):
        raise VertexRangeError(
            "vertex index out of range",
            {"n": n, "vertices": list(canonical)},
        )
    return canonical


class _AdjacencyGraph:
    """Read-only surface shared by simple graphs and multigraphs."""

    __slots__ = ("_n", "_edges", "_adj_lists", "_degrees", "_csr")

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return self._edges

    @property
    def adj_lists(self) -> Tuple[Tuple[int, ...], ...]:
        return self._adj_lists

    @property
    def degrees(self) -> Tuple[int, ...]:
        return self._degrees

    def degree(self, v: int) -> int:
        return self._degrees[v]

    def neighbours(self, v: int) -> Tuple[int, ...]:
        return self._adj_lists[v]

    def vertices(self) -> range:
        return range(self._n)

    def csr_adjacency(self) -> csr_matrix:
        """Symmetric sparse adjacency with edge multiplicities, built once."""
        if self._csr is None:
            ends = np.asarray(self._edges, dtype=np.int64).reshape(-1, 2)
            rows = np.concatenate([ends[:, 0], ends[:, 1]])
            cols = np.concatenate([ends[:, 1], ends[:, 0]])
            self._csr = csr_matrix((np.ones(rows.size, dtype=np.int64), (rows, cols)), shape=(self._n, self._n))
        return self._csr

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self._n == other._n and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((type(self).__name__, self._n, self._edges))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self._n}, m={len(self._edges)})"


def _check_pair(n: int, pair: Sequence[int]) -> Edge:
    if len(pair) != 2:
        raise GraphValidationError("an edge needs exactly two endpoints", {"edge": list(pair)})
    u, v = int(pair[0]), int(pair[1])
    if not (0 <= u < n and 0 <= v < n):
        raise VertexRangeError("edge endpoint out of range", {"n": n, "edge": [u, v]})
    return (u, v) if u <= v else (v, u)


def _check_vertex_count(n: int) -> int:
    n = int(n)
    if n < 0:
        raise GraphValidationError("vertex count must be non-negative", {"n": n})
    return n


class SimpleGraph(_AdjacencyGraph):
    """
    Loop-free graph without parallel edges.

    Adjacency is held twice: as sorted neighbour lists and, for graphs up to
    ``Settings.dense_adjacency_limit`` vertices, as a dense boolean matrix for
    constant-time membership. Larger graphs answer membership by bisection in
    the sorted neighbour lists.
    """

    __slots__ = ("_adjacency", "_edge_ids")

    def __init__(self, n: int, edges: Iterable[Sequence[int]]):
        n = _check_vertex_count(n)
        normalised = []
        seen = set()
        for pair in edges:
            edge = _check_pair(n, pair)
            if edge[0] == edge[1]:
                raise SelfLoopError("simple graphs cannot contain loops", {"edge": list(edge)})
            if edge in seen:
                raise DuplicateEdgeError("edge listed more than once", {"edge": list(edge)})
            seen.add(edge)
            normalised.append(edge)
        normalised.sort()

        adj: List[List[int]] = [[] for _ in range(n)]
        for u, v in normalised:
            adj[u].append(v)
            adj[v].append(u)

        self._n = n
        self._edges = tuple(normalised)
        self._adj_lists = tuple(tuple(sorted(nbrs)) for nbrs in adj)
        self._degrees = tuple(len(nbrs) for nbrs in adj)
        self._csr: Optional[csr_matrix] = None
        self._edge_ids: Dict[Edge, int] = {edge: i for i, edge in enumerate(self._edges)}

        if n <= get_settings().dense_adjacency_limit:
            matrix = np.zeros((n, n), dtype=bool)
            if normalised:
                pairs = np.asarray(normalised, dtype=np.int64)
                matrix[pairs[:, 0], pairs[:, 1]] = True
                matrix[pairs[:, 1], pairs[:, 0]] = True
            matrix.setflags(write=False)
            self._adjacency: Optional[np.ndarray] = matrix
        else:
            self._adjacency = None

    @property
    def adjacency(self) -> Optional[np.ndarray]:
        """Dense boolean adjacency matrix, or None above the dense limit."""
        return self._adjacency

    def has_edge(self, u: int, v: int) -> bool:
        if self._adjacency is not None:
            return bool(self._adjacency[u, v])
        nbrs = self._adj_lists[u]
        i = bisect.bisect_left(nbrs, v)
        return i < len(nbrs) and nbrs[i] == v

    def edge_id(self, u: int, v: int) -> int:
        """Index of edge {u, v} in ``edges``."""
        key = (u, v) if u <= v else (v, u)
        try:
            return self._edge_ids[key]
        except KeyError:
            raise GraphValidationError("not an edge of the graph", {"edge": [u, v]})

    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` integer array."""
        if not self._edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self._edges, dtype=np.int64)


class MultiGraph(_AdjacencyGraph):
    """
    Graph that may contain loops and parallel edges.

    A loop at ``v`` appears twice in ``adj_lists[v]`` and contributes 2 to
    the degree of ``v``.
    """

    __slots__ = ()

    def __init__(self, n: int, edges: Iterable[Sequence[int]]):
        n = _check_vertex_count(n)
        normalised = sorted(_check_pair(n, pair) for pair in edges)

        adj: List[List[int]] = [[] for _ in range(n)]
        for u, v in normalised:
            adj[u].append(v)
            adj[v].append(u)

        self._n = n
        self._edges = tuple(normalised)
        self._adj_lists = tuple(tuple(sorted(nbrs)) for nbrs in adj)
        self._degrees = tuple(len(nbrs) for nbrs in adj)
        self._csr: Optional[csr_matrix] = None

    def loops(self) -> List[int]:
        return [u for u, v in self._edges if u == v]

    def multiplicity(self, u: int, v: int) -> int:
        key = (u, v) if u <= v else (v, u)
        return self._edges.count(key)

    def multiplicities(self) -> Counter:
        return Counter(self._edges)

    def is_simple(self) -> bool:
        return not self.loops() and len(set(self._edges)) == len(self._edges)

    def to_simple_graph(self) -> SimpleGraph:
        """
        Convert to a SimpleGraph.

        Raises:
            SelfLoopError: If the multigraph has a loop
            DuplicateEdgeError: If it has a parallel edge
        """
        return SimpleGraph(self._n, self._edges)


AnyGraph = Union[SimpleGraph, MultiGraph]


def build_graph(n: int, edges: Iterable[Sequence[int]]) -> SimpleGraph:
    """
    Build a validated simple graph.

    Args:
        n: Vertex count
        edges: Vertex pairs with endpoints in [0, n)

    Returns:
        SimpleGraph

    Raises:
        SelfLoopError, DuplicateEdgeError, VertexRangeError
    """
    return SimpleGraph(n, edges)


def total_degree(graph: AnyGraph, vertices: Iterable[int]) -> int:
    """deg(S): the sum of the degrees of the vertices in S."""
    degrees = graph.degrees
    return sum(degrees[v] for v in vertices)


def boundary_edge_count(graph: AnyGraph, vertices: Iterable[int]) -> int:
    """e(S, S^c): edges with exactly one endpoint in S."""
    inside = set(vertices)
    adj = graph.adj_lists
    return sum(1 for v in inside for u in adj[v] if u not in inside)


def internal_edge_count(graph: AnyGraph, vertices: Iterable[int]) -> int:
    """Edges of the induced sub(multi)graph, loops and multiplicities included."""
    inside = set(vertices)
    adj = graph.adj_lists
    # each edge is seen from both ends; a loop appears twice in its vertex's list
    return sum(1 for v in inside for u in adj[v] if u in inside) // 2


def vertex_boundary(graph: AnyGraph, vertices: Iterable[int]) -> VertexSet:
    """Vertices outside S joined to S by an edge."""
    inside = set(vertices)
    adj = graph.adj_lists
    return tuple(sorted({u for v in inside for u in adj[v] if u not in inside}))


def neighbourhood(graph: AnyGraph, vertices: Iterable[int]) -> VertexSet:
    """Closed neighbourhood S ∪ ∂S."""
    inside = set(vertices)
    adj = graph.adj_lists
    return tuple(sorted(inside.union(u for v in inside for u in adj[v])))


def is_connected(graph: AnyGraph, vertices: Iterable[int]) -> bool:
    """
    Whether the subgraph induced on S is connected.

    Raises:
        EmptyVertexSetError: If S is empty
    """
    return len(connected_components_within(graph, vertices)) == 1


def is_graph_connected(graph: AnyGraph) -> bool:
    return graph.n == 0 or is_connected(graph, range(graph.n))


def connected_components_within(graph: AnyGraph, vertices: Iterable[int]) -> List[VertexSet]:
    """
    Connected components of the subgraph induced on S, in host labels,
    ordered by their smallest vertex.

    Raises:
        EmptyVertexSetError: If S is empty
    """
    labels = np.asarray(vertex_set(vertices, graph.n), dtype=np.int64)
    if not labels.size:
        raise EmptyVertexSetError("connectivity of the empty set is undefined")
    adjacency = graph.csr_adjacency()
    if labels.size < graph.n:
        adjacency = adjacency[labels][:, labels]
    _, component_of = csgraph.connected_components(adjacency, directed=False)
    order = np.argsort(component_of, kind="stable")
    cuts = np.flatnonzero(np.diff(component_of[order])) + 1
    components = [tuple(labels[group].tolist()) for group in np.split(order, cuts)]
    return sorted(components)


def connected_components(graph: AnyGraph) -> List[VertexSet]:
    """Connected components, ordered by their smallest vertex."""
    if graph.n == 0:
        return []
    return connected_components_within(graph, range(graph.n))


def induced_subgraph(graph: SimpleGraph, vertices: Iterable[int]) -> Tuple[SimpleGraph, VertexSet]:
    """
    Subgraph induced on S, relabelled to ``0 .. |S|-1``.

    Returns:
        The relabelled graph and the original labels in new-label order
    """
    labels = vertex_set(vertices, graph.n)
    position = np.full(graph.n, -1, dtype=np.int64)
    position[list(labels)] = np.arange(len(labels))
    relabelled = position[graph.edge_array()]
    kept = relabelled[(relabelled >= 0).all(axis=1)]
    return SimpleGraph(len(labels), kept.tolist()), labels


def tree_excess(graph: AnyGraph, vertices: Iterable[int]) -> int:
    """
    Tree excess of the induced sub(multi)graph: |E(H[S])| - (|S| - 1).

    Raises:
        DisconnectedSetError: If H[S] is not connected
    """
    inside = set(vertices)
    if not is_connected(graph, inside):
        raise DisconnectedSetError(
            "tree excess needs a connected vertex set",
            {"vertices": sorted(inside)},
        )
    return internal_edge_count(graph, inside) - (len(inside) - 1)


def connected_subsets_by_size(graph: AnyGraph, size_cap: int) -> Iterator[VertexSet]:
    """
    Every connected vertex set with at most ``size_cap`` vertices, once each.

    Sets are produced in order of size; exponential in ``size_cap``.
    """
    if size_cap < 1:
        return
    adj = graph.adj_lists
    level: List[VertexSet] = [(v,) for v in range(graph.n)]
    seen = set(level)
    size = 1
    while level:
        yield from level
        if size >= size_cap:
            return
        grown: List[VertexSet] = []
        for members in level:
            inside = set(members)
            for v in members:
                for u in adj[v]:
                    if u in inside:
                        continue
                    candidate = tuple(sorted(inside | {u}))
                    if candidate not in seen:
                        seen.add(candidate)
                        grown.append(candidate)
        level = grown
        size += 1


def _check_expansion_inputs(graph: AnyGraph, size_cap: int) -> None:
    if not is_graph_connected(graph):
        raise DisconnectedSetError("expansion is measured on connected graphs")
    if size_cap < 1 or 2 * size_cap > graph.n:
        raise ParameterError(
            "size_cap must satisfy 1 <= size_cap <= n/2",
            {"size_cap": size_cap, "n": graph.n},
        )


def total_degree_expansion(graph: AnyGraph, size_cap: int) -> Tuple[Fraction, VertexSet]:
    """
    Exact minimum of e(S, S^c) / deg(S) over connected S with |S| <= size_cap.

    Exhaustive: the cost grows exponentially with ``size_cap``.

    Args:
        graph: Connected host
        size_cap: Largest set size examined, at most n/2

    Returns:
        The minimum ratio and the first set attaining it
    """
    _check_expansion_inputs(graph, size_cap)
    best: Optional[Fraction] = None
    witness: VertexSet = ()
    for members in connected_subsets_by_size(graph, size_cap):
        ratio = Fraction(boundary_edge_count(graph, members), total_degree(graph, members))
        if best is None or ratio < best:
            best, witness = ratio, members
    return best, witness


def edge_expansion(graph: AnyGraph, size_cap: int) -> Tuple[Fraction, VertexSet]:
    """Exact minimum of e(S, S^c) / |S| over connected S with |S| <= size_cap."""
    _check_expansion_inputs(graph, size_cap)
    best: Optional[Fraction] = None
    witness: VertexSet = ()
    for members in connected_subsets_by_size(graph, size_cap):
        ratio = Fraction(boundary_edge_count(graph, members), len(members))
        if best is None or ratio < best:
            best, witness = ratio, members
    return best, witness


def parse_edge_list(text: str) -> AnyGraph:
    """
    Parse the edge-list text format.

    The first meaningful line is ``n m``, optionally preceded by a line
    reading ``multigraph``; then ``m`` lines ``u v``. Blank lines and lines
    starting with ``#`` are ignored.

    Raises:
        GraphValidationError: On malformed input (plus the SimpleGraph errors)
    """
    lines = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]
    multigraph = bool(lines) and lines[0].lower() == MULTIGRAPH_HEADER
    if multigraph:
        lines = lines[1:]
    if not lines:
        raise GraphValidationError("edge list is missing its 'n m' header")

    try:
        n, m = (int(token) for token in lines[0].split())
        edges = [tuple(int(token) for token in line.split()) for line in lines[1:]]
    except ValueError:
        raise GraphValidationError("edge list must contain integers only", {"header": lines[0]})

    if len(edges) != m:
        raise GraphValidationError(
            "edge count does not match header",
            {"declared": m, "found": len(edges)},
        )
    if multigraph:
        return MultiGraph(n, edges)
    return SimpleGraph(n, edges)


def format_edge_list(graph: AnyGraph) -> str:
    header = [MULTIGRAPH_HEADER] if isinstance(graph, MultiGraph) else []
    lines = header + [f"{graph.n} {graph.m}"] + [f"{u} {v}" for u, v in graph.edges]
    return "\n".join(lines) + "\n"


def read_graph(path: Union[str, Path]) -> AnyGraph:
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as e:
        raise GraphValidationError(f"cannot read graph: {e}", {"path": str(path)})
    return parse_edge_list(text)


def write_graph(graph: AnyGraph, path: Union[str, Path]) -> None:
    Path(path).write_text(format_edge_list(graph))
