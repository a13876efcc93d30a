"""
Enumerate and count connected vertex subsets by total degree.

``enum_connected_subsets`` builds C(G, v, l), the connected sets containing
``v`` whose total degree is at most ``l``, by raising the degree budget one
unit at a time: the sets of total degree exactly ``b`` are the sets
``S ∪ {u}`` with ``S`` already enumerated, ``u`` on the vertex boundary of
``S`` and ``deg(S) + deg(u) = b``. Candidates are bucketed by the budget at
which they appear and deduplicated by canonical key.

The number of connected sets of total degree exactly ``l`` around a vertex
is at most (2e)^(2l-1); this bound is asserted on every count.
"""

import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

from loguru import logger

from polymerdyn.config import get_settings
from polymerdyn.errors import ConsistencyError, ParameterError, VertexRangeError, WorkCeilingExceeded
from polymerdyn.graph_core import AnyGraph, Edge, VertexSet

LOG_TWO_E = math.log(2.0) + 1.0


def lemma_log_bound(budget: int) -> float:
    """log of (2e)^(2l-1), the count bound for total degree exactly ``l``."""
    return (2 * budget - 1) * LOG_TWO_E


@lru_cache(maxsize=None)
def _note_bound_above_ceiling(budget: int, ceiling: int) -> None:
    logger.debug(
        "degree budget {} allows up to (2e)^{} ≈ {:.3g} subsets per anchor, above the work ceiling {}",
        budget,
        2 * budget - 1,
        math.exp(lemma_log_bound(budget)),
        ceiling,
    )


@dataclass(frozen=True)
class SubsetFamily:
    """
    C(G, v, l): connected vertex sets containing ``anchor`` with total degree
    at most ``budget``.

    ``members`` are canonical sorted tuples ordered by total degree, then by
    discovery; ``degrees`` holds their total degrees. ``work`` counts the
    candidate expansions the enumeration performed.
    """

    anchor: int
    budget: int
    members: Tuple[VertexSet, ...]
    degrees: Tuple[int, ...]
    work: int
    max_size: Optional[int] = None

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[VertexSet]:
        return iter(self.members)

    def __contains__(self, members: object) -> bool:
        return members in set(self.members)

    def with_exact_degree(self, degree: int) -> List[VertexSet]:
        return [s for s, d in zip(self.members, self.degrees) if d == degree]


def _resolve_ceiling(work_ceiling: Optional[int]) -> int:
    return work_ceiling if work_ceiling is not None else get_settings().work_ceiling


def _check_count_bound(anchor: int, degree: int, count: int) -> None:
    if degree >= 1 and count and math.log(count) > lemma_log_bound(degree):
        raise ConsistencyError(
            "connected-subset count exceeds the (2e)^(2l-1) bound",
            {"anchor": anchor, "budget": degree, "count": count},
        )


def enum_connected_subsets(
    graph: AnyGraph,
    anchor: int,
    budget: int,
    *,
    max_size: Optional[int] = None,
    work_ceiling: Optional[int] = None,
) -> SubsetFamily:
    """
    Enumerate every connected vertex set containing ``anchor`` with total
    degree at most ``budget``.

    Args:
        graph: Host graph
        anchor: Vertex every set must contain
        budget: Total-degree budget l >= 0
        max_size: Optional cap on the vertex count of the sets
        work_ceiling: Candidate-expansion limit (defaults to settings)

    Returns:
        SubsetFamily, complete and duplicate-free; empty when l < deg(anchor)

    Raises:
        WorkCeilingExceeded: If more than ``work_ceiling`` candidates are formed
        ConsistencyError: If some exact total degree has more than (2e)^(2l-1) sets
    """
    if not 0 <= anchor < graph.n:
        raise VertexRangeError("anchor vertex out of range", {"anchor": anchor, "n": graph.n})
    if budget < 0:
        raise ParameterError("degree budget must be non-negative", {"budget": budget})

    ceiling = _resolve_ceiling(work_ceiling)
    if lemma_log_bound(budget) > math.log(ceiling):
        _note_bound_above_ceiling(budget, ceiling)

    degrees = graph.degrees
    adj = graph.adj_lists
    start = degrees[anchor]
    if budget < start or (max_size is not None and max_size < 1):
        return SubsetFamily(anchor, budget, (), (), 0, max_size)

    pending: Dict[int, List[VertexSet]] = defaultdict(list)
    pending[start].append((anchor,))
    seen = set()
    members: List[VertexSet] = []
    member_degrees: List[int] = []
    work = 0

    for level in range(start, budget + 1):
        at_level = 0
        for candidate in pending.pop(level, ()):
            if candidate in seen:
                continue
            seen.add(candidate)
            at_level += 1
            members.append(candidate)
            member_degrees.append(level)
            if max_size is not None and len(candidate) >= max_size:
                continue

            inside = set(candidate)
            frontier = []
            for v in candidate:
                for u in adj[v]:
                    if u not in inside:
                        inside.add(u)
                        frontier.append(u)
            for u in frontier:
                target = level + degrees[u]
                if target > budget:
                    continue
                work += 1
                if work > ceiling:
                    raise WorkCeilingExceeded(
                        "subset enumeration exceeded its work ceiling",
                        {"anchor": anchor, "budget": budget, "ceiling": ceiling},
                    )
                pending[target].append(tuple(sorted(candidate + (u,))))
        _check_count_bound(anchor, level, at_level)

    return SubsetFamily(anchor, budget, tuple(members), tuple(member_degrees), work, max_size)


def connected_subsets_touching_edge(
    graph: AnyGraph,
    edge: Edge,
    budget: int,
    *,
    max_size: Optional[int] = None,
    work_ceiling: Optional[int] = None,
) -> Tuple[List[VertexSet], List[int], int]:
    """
    Connected sets containing an endpoint of ``edge`` with total degree at
    most ``budget``.

    Sets containing both endpoints are reported once, in the position at
    which the first endpoint's family produced them.

    Returns:
        (sets, their total degrees, total work of both enumerations)
    """
    u, v = edge
    first = enum_connected_subsets(graph, u, budget, max_size=max_size, work_ceiling=work_ceiling)
    second = enum_connected_subsets(graph, v, budget, max_size=max_size, work_ceiling=work_ceiling)

    sets = list(first.members)
    set_degrees = list(first.degrees)
    for members, degree in zip(second.members, second.degrees):
        if u not in members:
            sets.append(members)
            set_degrees.append(degree)
    return sets, set_degrees, first.work + second.work


def count_by_exact_total_degree(
    graph: AnyGraph,
    anchor: int,
    budget: int,
    *,
    work_ceiling: Optional[int] = None,
) -> int:
    """
    Number of connected sets containing ``anchor`` with total degree exactly
    ``budget``.

    Raises:
        ParameterError: If budget < 1
        ConsistencyError: If the count exceeds (2e)^(2l-1)
    """
    if budget < 1:
        raise ParameterError("exact-degree counts need budget >= 1", {"budget": budget})

    family = enum_connected_subsets(graph, anchor, budget, work_ceiling=work_ceiling)
    return len(family.with_exact_degree(budget))
