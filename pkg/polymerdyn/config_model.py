"""
Degree sequences, the configuration model and expansion audits.

A configuration-model multigraph pairs the half-edges of a degree sequence by
a uniformly random perfect matching. Rejecting non-simple outcomes gives a
uniformly random simple graph with that degree sequence.
"""

import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

from loguru import logger

from polymerdyn.errors import DegreeSequenceError, DisconnectedSetError, ParameterError, RejectionSamplingFailed
from polymerdyn.graph_core import (
    AnyGraph,
    MultiGraph,
    SimpleGraph,
    VertexSet,
    boundary_edge_count,
    is_graph_connected,
    total_degree,
    tree_excess,
)
from polymerdyn.models import RHO, AuditCheck, AuditReport, AuditWitness, DegreeSequence, DegreeSequenceReport
from polymerdyn.rng import SeedLike, make_rng
from polymerdyn.subset_enum import enum_connected_subsets

DegreesLike = Union[DegreeSequence, Sequence[int]]

DEFAULT_MAX_ATTEMPTS = 1000
TREE_EXCESS_MIN_DEGREE = 36


def _degrees_of(x: DegreesLike) -> List[int]:
    if isinstance(x, DegreeSequence):
        return list(x.degrees)
    return [int(k) for k in x]


def _checked_degrees(x: DegreesLike) -> List[int]:
    degrees = _degrees_of(x)
    negative = [k for k in degrees if k < 0]
    if negative:
        raise DegreeSequenceError("degrees must be non-negative", {"degrees": degrees})
    if sum(degrees) % 2:
        raise DegreeSequenceError("degree sum must be even", {"degree_sum": sum(degrees)})
    return degrees


def validate_degree_sequence(x: DegreesLike, d: Optional[float] = None) -> DegreeSequenceReport:
    """
    Check a degree sequence against the family D_{n,d}.

    Each condition is flagged on its own: (a) min degree >= 3,
    (b) max degree <= n^(1/50), (c) sum of squares <= d n, (d) even sum.
    Membership in the family is (a) and (b) and (c).
    """
    degrees = _degrees_of(x)
    if d is None:
        d = x.d if isinstance(x, DegreeSequence) else math.inf
    n = len(degrees)
    bound = n**RHO
    square_sum = sum(k * k for k in degrees)
    return DegreeSequenceReport(
        degrees=degrees,
        d=d,
        n=n,
        max_degree_bound=bound,
        square_sum=square_sum,
        min_degree_ok=bool(degrees) and min(degrees) >= 3,
        max_degree_ok=bool(degrees) and max(degrees) <= bound,
        sparsity_ok=square_sum <= d * n,
        even_sum_ok=sum(degrees) % 2 == 0,
    )


def parse_degree_sequence(text: str) -> List[int]:
    try:
        degrees = [int(token) for token in text.split()]
    except ValueError:
        raise DegreeSequenceError("degree sequence must be whitespace-separated integers")
    if not degrees:
        raise DegreeSequenceError("degree sequence is empty")
    return degrees


def read_degree_sequence(path: Union[str, Path]) -> List[int]:
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as e:
        raise DegreeSequenceError(f"cannot read degree sequence: {e}", {"path": str(path)})
    return parse_degree_sequence(text)


def regular_degree_sequence(n: int, k: int) -> List[int]:
    if n < 1 or k < 0:
        raise ParameterError("regular sequences need n >= 1 and k >= 0", {"n": n, "k": k})
    if (n * k) % 2:
        raise DegreeSequenceError("n * k must be even", {"n": n, "k": k})
    return [k] * n


def pairing_probability(x: DegreesLike, i: int, j: int) -> float:
    """
    Expected multiplicity of {i, j} in a configuration-model sample.

    x_i x_j / (2m - 1) for i != j and x_i (x_i - 1) / (2 (2m - 1)) for a loop.
    """
    degrees = _checked_degrees(x)
    half_edges = sum(degrees)
    if half_edges < 2:
        return 0.0
    if i == j:
        return degrees[i] * (degrees[i] - 1) / (2 * (half_edges - 1))
    return degrees[i] * degrees[j] / (half_edges - 1)


def sample_configuration_multigraph(x: DegreesLike, seed: SeedLike = None) -> MultiGraph:
    """
    Pair half-edges by a uniformly random perfect matching.

    Half-edges are taken from the tail of a pool laid out in (vertex, slot)
    order; each is paired with a partner drawn uniformly from the rest.

    Raises:
        DegreeSequenceError: If the degree sum is odd or a degree is negative
    """
    degrees = _checked_degrees(x)
    rng = make_rng(seed)
    pool = [v for v, k in enumerate(degrees) for _ in range(k)]
    edges = []
    while pool:
        u = pool.pop()
        j = int(rng.integers(len(pool)))
        v = pool[j]
        pool[j] = pool[-1]
        pool.pop()
        edges.append((u, v))
    return MultiGraph(len(degrees), edges)


def sample_simple_graph(
    x: DegreesLike,
    seed: SeedLike = None,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> SimpleGraph:
    """
    Uniform simple graph with degree sequence ``x``, by rejection.

    Raises:
        DegreeSequenceError: If the degree sum is odd
        RejectionSamplingFailed: If no simple sample appears in ``max_attempts``
    """
    if max_attempts < 1:
        raise ParameterError("max_attempts must be positive", {"max_attempts": max_attempts})
    degrees = _checked_degrees(x)
    rng = make_rng(seed)
    for attempt in range(1, max_attempts + 1):
        multigraph = sample_configuration_multigraph(degrees, rng)
        if multigraph.is_simple():
            logger.debug("simple configuration-model sample after {} attempt(s)", attempt)
            return multigraph.to_simple_graph()
    raise RejectionSamplingFailed(
        "no simple graph found; simplicity is rare for this degree sequence",
        {"max_attempts": max_attempts, "n": len(degrees)},
    )


def default_audit_caps(n: int) -> Dict[str, int]:
    small = min(math.ceil(math.log(max(n, 1)) ** 2), 8)
    small = max(small, 1)
    return {"small_size_cap": small, "degree_cap": 3 * small}


def _witness(graph: AnyGraph, check: str, members: VertexSet, ratio: float) -> AuditWitness:
    return AuditWitness(
        check=check,
        vertices=list(members),
        size=len(members),
        total_degree=total_degree(graph, members),
        boundary_edges=boundary_edge_count(graph, members),
        tree_excess=tree_excess(graph, members),
        ratio=ratio,
    )


class _CheckTally:
    """Accumulates one check; the worst witness is the first with the lowest ratio."""

    def __init__(self, name: str, max_witnesses: int):
        self.check = AuditCheck(name=name)
        self.max_witnesses = max_witnesses

    def record(self, graph: AnyGraph, members: VertexSet, ratio: float, passed: bool) -> None:
        check = self.check
        check.applicable += 1
        if check.worst is None or ratio < check.worst.ratio:
            check.worst = _witness(graph, check.name, members, ratio)
        if not passed:
            check.passed = False
            check.violations += 1
            if len(check.witnesses) < self.max_witnesses:
                check.witnesses.append(_witness(graph, check.name, members, ratio))


def expansion_audit(
    graph: AnyGraph,
    alpha: float,
    small_size_cap: Optional[int] = None,
    degree_cap: Optional[int] = None,
    *,
    work_ceiling: Optional[int] = None,
    max_witnesses: int = 20,
) -> AuditReport:
    """
    Audit the expansion properties over small connected vertex sets.

    Every connected S with |S| <= small_size_cap and deg(S) <= degree_cap is
    examined once (anchored at its smallest vertex) against:

    - tree excess: t(H[S]) <= deg(S)/6 when deg(S) >= 36 and |S| <= (log n)^2
    - small set: e(S, S^c) >= |S|/4 for |S| <= n/2
    - total degree: e(S, S^c) >= alpha deg(S) for |S| <= n/2

    Ratios are stored so that smaller is worse: -t/deg for tree excess,
    e/|S| and e/deg for the other two.

    Raises:
        DisconnectedSetError: If the graph is not connected
        WorkCeilingExceeded: If an anchor's enumeration runs over the ceiling
    """
    if not is_graph_connected(graph):
        raise DisconnectedSetError("expansion audits need a connected graph")
    if alpha <= 0:
        raise ParameterError("alpha must be positive", {"alpha": alpha})
    caps = default_audit_caps(graph.n)
    if small_size_cap is None:
        small_size_cap = caps["small_size_cap"]
    if degree_cap is None:
        degree_cap = 3 * small_size_cap

    n = graph.n
    log_sq = math.log(n) ** 2 if n > 1 else 0.0
    tallies: Dict[str, _CheckTally] = {
        name: _CheckTally(name, max_witnesses) for name in ("tree_excess", "small_set", "total_degree")
    }
    tests: Dict[str, Callable[[VertexSet, int, int], Optional[float]]] = {
        "tree_excess": lambda s, deg, e: (
            -tree_excess(graph, s) / deg if deg >= TREE_EXCESS_MIN_DEGREE and len(s) <= log_sq else None
        ),
        "small_set": lambda s, deg, e: e / len(s) if 2 * len(s) <= n else None,
        "total_degree": lambda s, deg, e: e / deg if 2 * len(s) <= n and deg > 0 else None,
    }
    thresholds = {"tree_excess": -1.0 / 6.0, "small_set": 0.25, "total_degree": alpha}

    sets_checked = 0
    for anchor in range(n):
        family = enum_connected_subsets(
            graph, anchor, degree_cap, max_size=small_size_cap, work_ceiling=work_ceiling
        )
        for members, deg in zip(family.members, family.degrees):
            if members[0] != anchor:
                continue
            sets_checked += 1
            e = boundary_edge_count(graph, members)
            for name, test in tests.items():
                ratio = test(members, deg, e)
                if ratio is not None:
                    tallies[name].record(graph, members, ratio, ratio >= thresholds[name])

    report = AuditReport(
        n=n,
        alpha=alpha,
        small_size_cap=small_size_cap,
        degree_cap=degree_cap,
        sets_checked=sets_checked,
        checks={name: tally.check for name, tally in tallies.items()},
    )
    logger.info(
        "audited {} connected sets: {}",
        sets_checked,
        ", ".join(f"{name}={'pass' if c.passed else 'FAIL'}" for name, c in report.checks.items()),
    )
    return report
