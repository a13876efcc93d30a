"""
Brute-force ground truth.

Every randomised component has an exact counterpart here, computed by full
enumeration on small inputs: Potts partition functions and distributions,
polymer configurations and their Gibbs measure, ν_e, and the transition
matrix of the polymer dynamics. Each enumeration is guarded by a size limit
from ``Settings`` and raises ``OracleSizeError`` above it.
"""

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.special import logsumexp

from polymerdyn.config import get_settings
from polymerdyn.errors import ConsistencyError, OracleSizeError, ParameterError, SamplingConditionViolation
from polymerdyn.graph_core import AnyGraph, Edge, SimpleGraph, VertexSet, is_connected, total_degree
from polymerdyn.polymer import (
    Polymer,
    PolymerConfiguration,
    PolymerModel,
    are_compatible,
    enumerate_allowed_polymers,
)
from polymerdyn.potts import colouring_to_config

CHUNK_ROWS = 1 << 16
BRUTE_FORCE_SUBSET_LIMIT = 22


@dataclass(frozen=True)
class ExactDistribution:
    """A finite distribution: ``probs[i]`` is the mass of ``outcomes[i]``."""

    outcomes: Tuple[Hashable, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        if len(self.outcomes) != len(self.probs):
            raise ParameterError("one probability per outcome is required")

    @property
    def space(self) -> frozenset:
        return frozenset(self.outcomes)

    def prob(self, outcome: Hashable) -> float:
        try:
            return float(self.probs[self.outcomes.index(outcome)])
        except ValueError:
            return 0.0

    def as_dict(self) -> Dict[Hashable, float]:
        return {o: float(p) for o, p in zip(self.outcomes, self.probs)}

    def __len__(self) -> int:
        return len(self.outcomes)


def _check_limit(count: float, limit: int, what: str) -> None:
    if count > limit:
        raise OracleSizeError(f"too many {what} for exhaustive enumeration", {"count": count, "limit": limit})


def _colouring_chunks(n: int, q: int, rows: int = CHUNK_ROWS) -> Iterator[np.ndarray]:
    """All q^n colourings in lexicographic order, as (rows, n) blocks."""
    total = q**n
    _check_limit(total, get_settings().oracle_colouring_limit, "colourings")
    if n == 0:
        yield np.zeros((1, 0), dtype=np.int64)
        return
    place = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, rows):
        index = np.arange(start, min(start + rows, total), dtype=np.int64)
        yield (index[:, None] // place) % q


def _mono_counts(host: SimpleGraph, block: np.ndarray) -> np.ndarray:
    edges = host.edge_array()
    if not len(edges):
        return np.zeros(len(block), dtype=np.int64)
    return np.count_nonzero(block[:, edges[:, 0]] == block[:, edges[:, 1]], axis=1)


def mono_edge_histogram(
    host: SimpleGraph,
    q: int,
    keep: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> np.ndarray:
    """
    counts[k] = number of colourings with k monochromatic edges.

    ``keep`` maps a block of colourings to a boolean row mask restricting
    the count.
    """
    counts = np.zeros(host.m + 1, dtype=np.int64)
    for block in _colouring_chunks(host.n, q):
        mono = _mono_counts(host, block)
        if keep is not None:
            mono = mono[keep(block)]
        counts += np.bincount(mono, minlength=host.m + 1)
    return counts


def _log_sum_histogram(counts: np.ndarray, beta: float) -> float:
    present = np.flatnonzero(counts)
    if not len(present):
        return -math.inf
    return float(logsumexp(np.log(counts[present]) + beta * present))


def exact_potts_logZ(host: SimpleGraph, q: int, beta: float) -> float:
    """log Z = log of the sum over colourings of exp(β m(σ))."""
    return _log_sum_histogram(mono_edge_histogram(host, q), beta)


def exact_ground_logZ(host: SimpleGraph, q: int, beta: float, colour: int) -> float:
    """log Z^r: colourings giving more than half the vertices ``colour``."""
    n = host.n
    counts = mono_edge_histogram(host, q, keep=lambda block: 2 * np.count_nonzero(block == colour, axis=1) > n)
    return _log_sum_histogram(counts, beta)


def exact_mono_edge_distribution(host: SimpleGraph, q: int, beta: float) -> ExactDistribution:
    """Law of m(σ) under the Potts distribution."""
    counts = mono_edge_histogram(host, q)
    log_mass = np.where(counts > 0, np.log(np.maximum(counts, 1)) + beta * np.arange(len(counts)), -np.inf)
    probs = np.exp(log_mass - logsumexp(log_mass))
    return ExactDistribution(tuple(range(len(counts))), probs)


def exact_potts_distribution(host: SimpleGraph, q: int, beta: float) -> ExactDistribution:
    """The Potts distribution over colourings, each a tuple of colours."""
    _check_limit(q**host.n, get_settings().oracle_distribution_limit, "colourings")
    outcomes: List[Tuple[int, ...]] = []
    log_mass: List[np.ndarray] = []
    for block in _colouring_chunks(host.n, q):
        outcomes.extend(map(tuple, block.tolist()))
        log_mass.append(beta * _mono_counts(host, block))
    logs = np.concatenate(log_mass)
    return ExactDistribution(tuple(outcomes), np.exp(logs - logsumexp(logs)))


def sample_exact_potts(host: SimpleGraph, q: int, beta: float, rng: np.random.Generator) -> np.ndarray:
    """
    An exact sample from the Potts distribution.

    The number of monochromatic edges is drawn from its exact law, then a
    colouring is picked uniformly among those with that many.
    """
    counts = mono_edge_histogram(host, q)
    law = exact_mono_edge_distribution(host, q, beta)
    target = int(rng.choice(len(law.probs), p=law.probs))
    rank = int(rng.integers(counts[target]))
    for block in _colouring_chunks(host.n, q):
        hits = np.flatnonzero(_mono_counts(host, block) == target)
        if rank < len(hits):
            return block[hits[rank]].copy()
        rank -= len(hits)
    raise ConsistencyError("colouring rank exceeds its histogram count", {"target": target})


def exact_restricted_logZ(host: SimpleGraph, q: int, beta: float, colour: int) -> float:
    """
    log of the sum of exp(β m(σ)) over the colourings that are images of
    polymer configurations for ground colour ``colour``.
    """
    _check_limit(q**host.n, get_settings().oracle_distribution_limit, "colourings")
    counts = np.zeros(host.m + 1, dtype=np.int64)
    for block in _colouring_chunks(host.n, q):
        mono = _mono_counts(host, block)
        for sigma, k in zip(block, mono):
            if colouring_to_config(host, sigma, colour) is not None:
                counts[k] += 1
    return _log_sum_histogram(counts, beta)


def enumerate_configurations(
    model: PolymerModel,
    polymers: Optional[Sequence[Polymer]] = None,
    *,
    limit: Optional[int] = None,
) -> List[PolymerConfiguration]:
    """Ω: every set of pairwise compatible allowed polymers, ∅ first."""
    if polymers is None:
        polymers = enumerate_allowed_polymers(model)
    if limit is None:
        limit = get_settings().oracle_configuration_limit
    polymers = sorted(polymers, key=lambda g: (g.vertices, g.spins))
    host = model.host

    configurations: List[PolymerConfiguration] = []

    def extend(start: int, chosen: List[Polymer]) -> None:
        configurations.append(PolymerConfiguration.of(chosen))
        _check_limit(len(configurations), limit, "configurations")
        for i in range(start, len(polymers)):
            candidate = polymers[i]
            if all(are_compatible(host, candidate, other) for other in chosen):
                chosen.append(candidate)
                extend(i + 1, chosen)
                chosen.pop()

    extend(0, [])
    return configurations


def _configuration_log_weights(model: PolymerModel, configurations: Sequence[PolymerConfiguration]) -> np.ndarray:
    return np.asarray([sum(model.log_weight(g) for g in config) for config in configurations], dtype=float)


def exact_polymer_logZ(model: PolymerModel) -> float:
    """log of the polymer partition function."""
    return float(logsumexp(_configuration_log_weights(model, enumerate_configurations(model))))


def exact_gibbs(model: PolymerModel) -> ExactDistribution:
    """The polymer Gibbs measure over Ω."""
    configurations = enumerate_configurations(model)
    logs = _configuration_log_weights(model, configurations)
    return ExactDistribution(tuple(configurations), np.exp(logs - logsumexp(logs)))


def exact_nu_e(model: PolymerModel, edge: Edge, polymers: Optional[Sequence[Polymer]] = None) -> ExactDistribution:
    """
    ν_e: each allowed polymer touching ``edge`` with probability w(γ), None
    (the empty outcome) with the remainder.

    Raises:
        SamplingConditionViolation: If the weights touching ``edge`` sum above one
    """
    if polymers is None:
        polymers = enumerate_allowed_polymers(model)
    u, v = edge
    touching = [g for g in polymers if u in g.vertices or v in g.vertices]
    probs = np.exp(np.asarray([model.log_weight(g) for g in touching], dtype=float))
    rest = 1.0 - float(probs.sum())
    if rest < -1e-12:
        raise SamplingConditionViolation("weights touching an edge sum above one", {"edge": list(edge), "mass": 1 - rest})
    return ExactDistribution(tuple(touching) + (None,), np.append(probs, max(rest, 0.0)))


def transition_matrix(model: PolymerModel) -> Tuple[List[PolymerConfiguration], np.ndarray]:
    """The states Ω and the transition matrix of the edge-based polymer dynamics."""
    polymers = enumerate_allowed_polymers(model)
    states = enumerate_configurations(model, polymers, limit=get_settings().oracle_state_limit)
    position = {state: i for i, state in enumerate(states)}
    host = model.host
    matrix = np.zeros((len(states), len(states)))
    if host.m == 0:
        return states, np.eye(len(states))

    nus = [exact_nu_e(model, edge, polymers) for edge in host.edges]
    pick = 1.0 / host.m
    for i, state in enumerate(states):
        for edge, nu in zip(host.edges, nus):
            on_edge = [g for g in state if edge[0] in g.vertices or edge[1] in g.vertices]
            target = position[state.removing(on_edge[0])] if on_edge else i
            matrix[i, target] += pick / 2
            for outcome, p in zip(nu.outcomes, nu.probs):
                if outcome is not None and all(are_compatible(host, outcome, g) for g in state):
                    matrix[i, position[state.adding(outcome)]] += pick / 2 * p
                else:
                    matrix[i, i] += pick / 2 * p
    return states, matrix


def stationarity_gap(model: PolymerModel) -> float:
    """max |(μP)(Γ) - μ(Γ)| for the Gibbs measure μ."""
    states, matrix = transition_matrix(model)
    mu = exact_gibbs(model).as_dict()
    pi = np.asarray([mu[state] for state in states])
    return float(np.max(np.abs(pi @ matrix - pi)))


def detailed_balance_gap(model: PolymerModel) -> float:
    """max |μ(Γ)P(Γ,Γ') - μ(Γ')P(Γ',Γ)| over pairs of states."""
    states, matrix = transition_matrix(model)
    mu = exact_gibbs(model).as_dict()
    pi = np.asarray([mu[state] for state in states])
    flow = pi[:, None] * matrix
    return float(np.max(np.abs(flow - flow.T)))


def empirical_distribution(samples: Iterable[Hashable], space: Optional[Sequence[Hashable]] = None) -> ExactDistribution:
    """
    Relative frequencies of ``samples``.

    Raises:
        ParameterError: If a sample lies outside ``space``
    """
    counts = Counter(samples)
    total = sum(counts.values())
    if not total:
        raise ParameterError("no samples to summarise")
    if space is None:
        outcomes = tuple(counts)
    else:
        outcomes = tuple(space)
        stray = set(counts) - set(outcomes)
        if stray:
            raise ParameterError("samples outside the outcome space", {"outcomes": [repr(s) for s in list(stray)[:5]]})
    return ExactDistribution(outcomes, np.asarray([counts[o] / total for o in outcomes], dtype=float))


def tv_distance(first: ExactDistribution, second: ExactDistribution) -> float:
    """
    Total variation distance.

    Raises:
        ParameterError: If ``second`` puts mass outside the space of ``first``
    """
    base = first.as_dict()
    other = second.as_dict()
    stray = [o for o, p in other.items() if p > 0 and o not in base]
    if stray:
        raise ParameterError("distributions live on different spaces", {"outcomes": [repr(s) for s in stray[:5]]})
    return 0.5 * sum(abs(p - other.get(o, 0.0)) for o, p in base.items())


def brute_force_connected_subsets(graph: AnyGraph, anchor: int, budget: int) -> Set[VertexSet]:
    """Connected sets containing ``anchor`` with total degree at most ``budget``, from all 2^(n-1) subsets."""
    if graph.n > BRUTE_FORCE_SUBSET_LIMIT:
        raise OracleSizeError("graph too large for subset brute force", {"n": graph.n, "limit": BRUTE_FORCE_SUBSET_LIMIT})
    others = [v for v in range(graph.n) if v != anchor]
    found: Set[VertexSet] = set()
    for size in range(len(others) + 1):
        for rest in itertools.combinations(others, size):
            members = tuple(sorted((anchor,) + rest))
            if total_degree(graph, members) <= budget and is_connected(graph, members):
                found.add(members)
    return found
