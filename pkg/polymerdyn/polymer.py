"""
The abstract polymer model.

A polymer is a connected vertex set with a non-ground spin on every vertex.
Two polymers are compatible when their vertex sets are at graph distance at
least 2, and a configuration is a set of pairwise compatible polymers. A
model supplies which polymers are allowed and their weights; weights are kept
as natural logarithms throughout.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from polymerdyn.config import get_settings
from polymerdyn.errors import DisconnectedSetError, OracleSizeError, ParameterError, VertexRangeError
from polymerdyn.graph_core import SimpleGraph, VertexSet, boundary_edge_count, is_connected, total_degree
from polymerdyn.models import MixingConditionReport, PolymerWitness, SamplingConditionReport
from polymerdyn.subset_enum import enum_connected_subsets

LOG_TOLERANCE = 1e-12


class LogValue(float):
    """Natural logarithm of a non-negative real; ``-inf`` is zero."""

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(-math.inf)

    @classmethod
    def one(cls) -> "LogValue":
        return cls(0.0)

    @classmethod
    def from_linear(cls, value: float) -> "LogValue":
        if value < 0:
            raise ParameterError("log values encode non-negative reals", {"value": value})
        return cls(math.log(value)) if value > 0 else cls.zero()

    @classmethod
    def log_sum(cls, values: Iterable[float]) -> "LogValue":
        terms = np.fromiter(values, dtype=float)
        if terms.size == 0 or np.all(np.isneginf(terms)):
            return cls.zero()
        return cls(float(logsumexp(terms)))

    def times(self, other: float) -> "LogValue":
        return LogValue(float(self) + float(other))

    def plus(self, other: float) -> "LogValue":
        return LogValue(float(np.logaddexp(float(self), float(other))))

    def linear(self) -> float:
        return math.exp(self)

    @property
    def is_zero(self) -> bool:
        return math.isinf(self) and self < 0

    def __repr__(self) -> str:
        return f"LogValue({float(self)!r})"


@dataclass(frozen=True)
class Polymer:
    """γ = (V_γ, σ_γ): ``spins[i]`` is the spin of ``vertices[i]``."""

    vertices: VertexSet
    spins: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) != len(self.spins):
            raise ParameterError(
                "a polymer needs one spin per vertex",
                {"vertices": list(self.vertices), "spins": list(self.spins)},
            )

    @classmethod
    def from_mapping(cls, spins: Dict[int, int]) -> "Polymer":
        vertices = tuple(sorted(spins))
        return cls(vertices, tuple(spins[v] for v in vertices))

    @property
    def min_vertex(self) -> int:
        return self.vertices[0]

    def spin_map(self) -> Dict[int, int]:
        return dict(zip(self.vertices, self.spins))

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class PolymerConfiguration:
    """Γ: pairwise compatible polymers ordered by their smallest vertex."""

    polymers: Tuple[Polymer, ...] = ()

    @classmethod
    def of(cls, polymers: Iterable[Polymer]) -> "PolymerConfiguration":
        return cls(tuple(sorted(polymers, key=lambda g: g.vertices)))

    def __len__(self) -> int:
        return len(self.polymers)

    def __iter__(self) -> Iterator[Polymer]:
        return iter(self.polymers)

    def __contains__(self, polymer: object) -> bool:
        return polymer in self.polymers

    def covered_vertices(self) -> FrozenSet[int]:
        return frozenset(v for polymer in self.polymers for v in polymer.vertices)

    def adding(self, polymer: Polymer) -> "PolymerConfiguration":
        return PolymerConfiguration.of(self.polymers + (polymer,))

    def removing(self, polymer: Polymer) -> "PolymerConfiguration":
        return PolymerConfiguration(tuple(g for g in self.polymers if g != polymer))


class PolymerModel:
    """
    A polymer model on a simple host graph.

    ``ground[v]`` is the set g_v of ground spins at ``v``; polymers use the
    other spins only. Subclasses override ``allowed`` and ``log_weight``;
    the base class takes them as callables for general spin systems.
    """

    def __init__(
        self,
        host: SimpleGraph,
        q: int,
        ground: Sequence[Iterable[int]],
        *,
        allowed: Optional[Callable[[Polymer], bool]] = None,
        log_weight: Optional[Callable[[Polymer], float]] = None,
        max_polymer_size: Optional[int] = None,
    ):
        if q < 2:
            raise ParameterError("polymer models need at least two spins", {"q": q})
        if len(ground) != host.n:
            raise ParameterError(
                "one ground-spin set per vertex is required",
                {"n": host.n, "ground": len(ground)},
            )
        self.host = host
        self.q = q
        self.ground: Tuple[FrozenSet[int], ...] = tuple(frozenset(g) for g in ground)
        self._spin_choices = tuple(
            tuple(s for s in range(q) if s not in g) for g in self.ground
        )
        self._allowed = allowed
        self._log_weight = log_weight
        self._max_polymer_size = max_polymer_size

    #: Geometric rate used to truncate edge families; None when the model sets none.
    truncation_rate: Optional[float] = None

    @property
    def max_polymer_size(self) -> Optional[int]:
        """Largest vertex count an allowed polymer can have, when bounded."""
        return self._max_polymer_size

    def allowed(self, polymer: Polymer) -> bool:
        if self._allowed is None:
            return True
        return self._allowed(polymer)

    def log_weight(self, polymer: Polymer) -> float:
        if self._log_weight is None:
            raise NotImplementedError("this model has no weight function")
        return self._log_weight(polymer)

    def spin_choices(self, v: int) -> Tuple[int, ...]:
        return self._spin_choices[v]

    def validate_polymer(self, polymer: Polymer) -> None:
        """
        Raise unless ``polymer`` is a polymer of this host.

        Raises:
            VertexRangeError, DisconnectedSetError, ParameterError
        """
        vertices = polymer.vertices
        if not vertices:
            raise ParameterError("a polymer has at least one vertex")
        if list(vertices) != sorted(set(vertices)):
            raise ParameterError("polymer vertices must be sorted and distinct", {"vertices": list(vertices)})
        if vertices[0] < 0 or vertices[-1] >= self.host.n:
            raise VertexRangeError("polymer vertex out of range", {"vertices": list(vertices), "n": self.host.n})
        if not is_connected(self.host, vertices):
            raise DisconnectedSetError("polymer vertex set is not connected", {"vertices": list(vertices)})
        for v, s in zip(vertices, polymer.spins):
            if not 0 <= s < self.q or s in self.ground[v]:
                raise ParameterError(
                    "polymer spin is a ground spin or out of range",
                    {"vertex": v, "spin": s, "ground": sorted(self.ground[v])},
                )

    def make_polymer(self, spins: Dict[int, int]) -> Polymer:
        polymer = Polymer.from_mapping(spins)
        self.validate_polymer(polymer)
        return polymer

    def polymers_on(self, vertices: VertexSet) -> Iterator[Polymer]:
        """Allowed polymers on a connected vertex set, spins in lexicographic order."""
        if self._max_polymer_size is not None and len(vertices) > self._max_polymer_size:
            return
        for spins in itertools.product(*(self._spin_choices[v] for v in vertices)):
            polymer = Polymer(vertices, spins)
            if self.allowed(polymer):
                yield polymer


def are_compatible(host: SimpleGraph, first: Polymer, second: Polymer) -> bool:
    """Distance at least 2 between the vertex sets: disjoint and non-adjacent."""
    inside = set(first.vertices)
    adj = host.adj_lists
    for v in second.vertices:
        if v in inside:
            return False
        for u in adj[v]:
            if u in inside:
                return False
    return True


def polymer_edge_count(host: SimpleGraph, polymer: Polymer) -> int:
    """|E_γ|: edges with at least one endpoint in V_γ."""
    deg = total_degree(host, polymer.vertices)
    return (deg + boundary_edge_count(host, polymer.vertices)) // 2


def enumerate_allowed_polymers(
    model: PolymerModel,
    max_degree: Optional[int] = None,
    *,
    work_ceiling: Optional[int] = None,
    limit: Optional[float] = None,
) -> List[Polymer]:
    """
    Every allowed polymer with deg(V_γ) <= ``max_degree`` (default: all).

    Raises:
        OracleSizeError: If more than ``limit`` polymers are produced
        WorkCeilingExceeded: If a subset enumeration runs over its ceiling
    """
    host = model.host
    if max_degree is None:
        max_degree = 2 * host.m
    if limit is None:
        limit = get_settings().oracle_polymer_limit

    polymers: List[Polymer] = []
    for anchor in range(host.n):
        family = enum_connected_subsets(
            host, anchor, max_degree, max_size=model.max_polymer_size, work_ceiling=work_ceiling
        )
        for members in family:
            if members[0] != anchor:
                continue
            for polymer in model.polymers_on(members):
                polymers.append(polymer)
                if len(polymers) > limit:
                    raise OracleSizeError(
                        "too many polymers to enumerate exhaustively",
                        {"limit": limit, "max_degree": max_degree},
                    )
    return polymers


def sampling_threshold(q: int) -> float:
    """3 log(8e³(q-1)), the decay rate the sampling condition asks for."""
    return 3.0 * math.log(8 * math.e**3 * (q - 1))


def _polymer_witness(model: PolymerModel, polymer: Polymer, log_bound: float) -> PolymerWitness:
    return PolymerWitness(
        vertices=list(polymer.vertices),
        spins=list(polymer.spins),
        total_degree=total_degree(model.host, polymer.vertices),
        log_weight=model.log_weight(polymer),
        log_bound=log_bound,
    )


def check_sampling_condition(
    model: PolymerModel,
    tau: float,
    ell_max: int,
    *,
    work_ceiling: Optional[int] = None,
    max_witnesses: int = 20,
) -> SamplingConditionReport:
    """
    Verify w(γ) <= exp(-τ deg(V_γ)) for every allowed polymer of total degree
    at most ``ell_max``.

    The inequality (``holds``) and the threshold τ >= 3 log(8e³(q-1))
    (``threshold_met``) are reported separately. ``weak_threshold`` is the
    log(8e³(q-1)) rate that the conversion to the mixing condition uses.
    """
    threshold = sampling_threshold(model.q)
    polymers = enumerate_allowed_polymers(model, ell_max, work_ceiling=work_ceiling, limit=math.inf)
    violations = []
    holds = True
    for polymer in polymers:
        log_bound = -tau * total_degree(model.host, polymer.vertices)
        if model.log_weight(polymer) > log_bound + LOG_TOLERANCE:
            holds = False
            if len(violations) < max_witnesses:
                violations.append(_polymer_witness(model, polymer, log_bound))
    return SamplingConditionReport(
        tau=tau,
        q=model.q,
        ell_max=ell_max,
        threshold=threshold,
        weak_threshold=threshold / 3.0,
        threshold_met=tau >= threshold,
        holds=holds,
        polymers_checked=len(polymers),
        violations=violations,
    )


def mixing_condition_lhs(
    model: PolymerModel,
    polymer: Polymer,
    polymers: Optional[Sequence[Polymer]] = None,
) -> LogValue:
    """
    log of the sum of |E_γ'| w(γ') over allowed γ' incompatible with γ.

    ``polymers`` is the exhaustive list of allowed polymers; it is enumerated
    when not supplied.
    """
    if polymers is None:
        polymers = enumerate_allowed_polymers(model)
    host = model.host
    terms = [
        math.log(polymer_edge_count(host, other)) + model.log_weight(other)
        for other in polymers
        if not are_compatible(host, polymer, other) and polymer_edge_count(host, other)
    ]
    return LogValue.log_sum(terms)


def check_mixing_condition(
    model: PolymerModel,
    theta: float = 1.0 / math.e,
) -> MixingConditionReport:
    """Evaluate the mixing condition for every allowed polymer, keeping the worst ratio."""
    polymers = enumerate_allowed_polymers(model)
    worst_ratio = 0.0
    worst = None
    for polymer in polymers:
        lhs = mixing_condition_lhs(model, polymer, polymers)
        edges = polymer_edge_count(model.host, polymer)
        ratio = lhs.linear() / edges if edges else math.inf
        if worst is None or ratio > worst_ratio:
            worst_ratio = ratio
            worst = _polymer_witness(model, polymer, math.log(theta * edges) if edges else math.inf)
    return MixingConditionReport(
        theta=theta,
        polymers_checked=len(polymers),
        worst_ratio=worst_ratio,
        worst=worst,
        holds=worst_ratio <= theta,
    )
