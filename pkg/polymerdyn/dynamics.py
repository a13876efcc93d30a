"""
Edge-based polymer dynamics.

Each update picks an edge e uniformly. With probability 1/2 the polymer of
the current configuration touching e (if any) is removed; otherwise a polymer
is drawn from ν_e, which puts mass w(γ) on each allowed polymer touching e
and the rest on ∅, and is added when compatible. The stationary distribution
is the polymer Gibbs measure.

ν_e is sampled without normalising it: draw a truncation level ℓ with
Pr(ℓ >= k) = exp(-r k), enumerate the polymers touching e of total degree at
most ℓ and output each with probability w(γ) exp(r deg(V_γ)). The summed
acceptance mass must stay below one; it is checked on every draw.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Set, Tuple

import numpy as np
from loguru import logger

from polymerdyn.config import get_settings
from polymerdyn.errors import ConsistencyError, ParameterError, SamplingConditionViolation
from polymerdyn.graph_core import Edge, SimpleGraph, connected_components, induced_subgraph, neighbourhood
from polymerdyn.models import DynamicsConfig, PottsParams, PottsSample
from polymerdyn.oracle import sample_exact_potts
from polymerdyn.polymer import Polymer, PolymerConfiguration, PolymerModel
from polymerdyn.potts import PottsPolymerModel, config_to_colouring, dominant_colour, monochromatic_edges
from polymerdyn.rng import SeedLike, make_rng
from polymerdyn.subset_enum import connected_subsets_touching_edge

UPDATE_COST = 4
MASS_TOLERANCE = 1e-12


def sample_truncation_level(rate: float, rng: np.random.Generator) -> int:
    """
    Draw ℓ >= 0 with Pr(ℓ >= k) = exp(-rate k) for k >= 1.

    The mass 1 - exp(-rate) left by the geometric law on k >= 1 sits at 0.
    """
    if not rate > 0:
        raise ParameterError("truncation rate must be positive", {"rate": rate})
    u = 1.0 - rng.random()
    return max(0, math.ceil(-math.log(u) / rate) - 1)


@dataclass(frozen=True)
class EdgeFamily:
    """Allowed polymers touching one edge with total degree at most ``level``."""

    level: int
    polymers: Tuple[Polymer, ...]
    degrees: np.ndarray
    log_weights: np.ndarray
    cumulative: np.ndarray
    work: int

    @property
    def mass(self) -> float:
        return float(self.cumulative[-1]) if len(self.cumulative) else 0.0


class EdgePolymerSampler:
    """
    Exact sampler for ν_e on one polymer model.

    Families are cached per (edge, level); every draw is charged the
    enumeration work of its family, cached or not.
    """

    def __init__(
        self,
        model: PolymerModel,
        rate: Optional[float] = None,
        *,
        work_ceiling: Optional[int] = None,
        cache_size: Optional[int] = None,
    ):
        rate = rate if rate is not None else model.truncation_rate
        if rate is None or not rate > 0:
            raise ParameterError("a positive truncation rate is required", {"rate": rate})
        settings = get_settings()
        self.model = model
        self.rate = float(rate)
        self.work_ceiling = work_ceiling if work_ceiling is not None else settings.work_ceiling
        self._max_level = 2 * model.host.m
        size = settings.family_cache_size if cache_size is None else cache_size
        self.family = lru_cache(maxsize=size)(self._build_family)

    @property
    def host(self) -> SimpleGraph:
        return self.model.host

    def _build_family(self, edge: Edge, level: int) -> EdgeFamily:
        model = self.model
        sets, set_degrees, work = connected_subsets_touching_edge(
            model.host,
            edge,
            level,
            max_size=model.max_polymer_size,
            work_ceiling=self.work_ceiling,
        )
        polymers: List[Polymer] = []
        degrees: List[int] = []
        for members, degree in zip(sets, set_degrees):
            for polymer in model.polymers_on(members):
                polymers.append(polymer)
                degrees.append(degree)

        degree_array = np.asarray(degrees, dtype=float)
        log_weights = np.asarray([model.log_weight(p) for p in polymers], dtype=float)
        cumulative = np.cumsum(np.exp(log_weights + self.rate * degree_array))
        family = EdgeFamily(level, tuple(polymers), degree_array, log_weights, cumulative, work)
        if family.mass > 1.0 + MASS_TOLERANCE:
            raise SamplingConditionViolation(
                "acceptance mass of an edge family exceeds one",
                {"edge": list(edge), "level": level, "mass": family.mass, "rate": self.rate},
            )
        return family

    def sample(self, edge: Edge, rng: np.random.Generator) -> Tuple[Optional[Polymer], int]:
        """
        Draw from ν_e.

        Returns:
            The polymer (None for ∅) and the work units charged

        Raises:
            SamplingConditionViolation: If the drawn family's mass exceeds one
        """
        level = min(sample_truncation_level(self.rate, rng), self._max_level)
        if level == 0:
            return None, 0
        family = self.family(edge, level)
        if not family.polymers:
            return None, family.work
        index = int(np.searchsorted(family.cumulative, rng.random(), side="right"))
        if index < len(family.polymers):
            return family.polymers[index], family.work
        return None, family.work


def sample_nu_e(
    model: PolymerModel,
    edge: Edge,
    rate: Optional[float] = None,
    seed: SeedLike = None,
) -> Optional[Polymer]:
    """One draw from ν_e; None stands for ∅."""
    polymer, _ = EdgePolymerSampler(model, rate, cache_size=0).sample(edge, make_rng(seed))
    return polymer


class ChainState:
    """
    Current configuration of a chain with its vertex occupancy index.

    ``occupancy`` maps each covered vertex to its polymer, so the polymer
    touching an edge is found from the edge's endpoints.
    """

    def __init__(self, configuration: Optional[PolymerConfiguration] = None):
        self.polymers: Set[Polymer] = set()
        self.occupancy: Dict[int, Polymer] = {}
        self.updates = 0
        self.work = 0
        for polymer in configuration or ():
            self.add(polymer)

    def add(self, polymer: Polymer) -> None:
        self.polymers.add(polymer)
        for v in polymer.vertices:
            self.occupancy[v] = polymer

    def remove(self, polymer: Polymer) -> None:
        self.polymers.discard(polymer)
        for v in polymer.vertices:
            del self.occupancy[v]

    def polymer_on_edge(self, edge: Edge) -> Optional[Polymer]:
        u, v = edge
        polymer = self.occupancy.get(u)
        return polymer if polymer is not None else self.occupancy.get(v)

    def accepts(self, host: SimpleGraph, polymer: Polymer) -> bool:
        """Whether ``polymer`` is compatible with every polymer held."""
        occupancy = self.occupancy
        return not any(v in occupancy for v in neighbourhood(host, polymer.vertices))

    def configuration(self) -> PolymerConfiguration:
        return PolymerConfiguration.of(self.polymers)

    def check_index(self, host: SimpleGraph) -> None:
        """
        Rebuild the occupancy index and compare.

        Raises:
            ConsistencyError: If the index or pairwise compatibility is broken
        """
        rebuilt: Dict[int, Polymer] = {}
        for polymer in self.polymers:
            for v in polymer.vertices:
                if v in rebuilt:
                    raise ConsistencyError("two polymers share a vertex", {"vertex": v})
                rebuilt[v] = polymer
        if rebuilt != self.occupancy:
            raise ConsistencyError("occupancy index is out of date")
        for polymer in self.polymers:
            for v in neighbourhood(host, polymer.vertices):
                other = rebuilt.get(v)
                if other is not None and other != polymer:
                    raise ConsistencyError(
                        "incompatible polymers in one configuration",
                        {"first": list(polymer.vertices), "second": list(other.vertices)},
                    )


def dynamics_step(
    sampler: EdgePolymerSampler,
    state: ChainState,
    rng: np.random.Generator,
    *,
    edge: Optional[Edge] = None,
    remove: Optional[bool] = None,
) -> ChainState:
    """
    One update of the edge-based polymer dynamics, applied in place.

    ``edge`` and ``remove`` pin the edge choice and the coin; they are drawn
    from ``rng`` when omitted.
    """
    host = sampler.host
    state.updates += 1
    state.work += UPDATE_COST
    if host.m == 0:
        return state
    if edge is None:
        edge = host.edges[int(rng.integers(host.m))]
    if remove is None:
        remove = rng.random() < 0.5

    if remove:
        current = state.polymer_on_edge(edge)
        if current is not None:
            state.remove(current)
        return state

    polymer, work = sampler.sample(edge, rng)
    state.work += work
    if polymer is not None and state.accepts(host, polymer):
        state.add(polymer)
    return state


def mixing_time(m: int, n: int, eps: float, theta: float = 1.0 / math.e) -> int:
    """T = ceil(2m / (1 - θ) ln(2n / ε)), from a path-coupling diameter of 2n."""
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)", {"eps": eps})
    if not 0 < theta < 1:
        raise ParameterError("theta must lie in (0, 1)", {"theta": theta})
    if m == 0:
        return 0
    return math.ceil(2 * m / (1 - theta) * math.log(2 * n / eps))


@dataclass
class DynamicsResult:
    configuration: PolymerConfiguration
    updates: int = 0
    work: int = 0
    attempts: int = 1
    completed: bool = True


class PolymerDynamics:
    """
    Runs the polymer dynamics on one model.

    ``las_vegas`` runs mixing_time(m, n, ε/2, θ) updates from ∅.
    ``strict_budget`` makes ceil(log(2/ε)) attempts of C2 m ceil(log(m/ε))
    updates within 3 C1 times that many work units each, and returns ∅ when
    every attempt runs out of work.
    """

    def __init__(
        self,
        model: PolymerModel,
        config: Optional[DynamicsConfig] = None,
        *,
        work_ceiling: Optional[int] = None,
    ):
        self.model = model
        self.config = config or DynamicsConfig()
        self.sampler = EdgePolymerSampler(model, self.config.truncation_rate, work_ceiling=work_ceiling)

    def run(self, updates: int, rng: np.random.Generator, state: Optional[ChainState] = None) -> ChainState:
        state = state if state is not None else ChainState()
        for _ in range(updates):
            dynamics_step(self.sampler, state, rng)
        return state

    def sample(self, eps: float, seed: SeedLike = None) -> DynamicsResult:
        if not 0 < eps < 1:
            raise ParameterError("eps must lie in (0, 1)", {"eps": eps})
        rng = make_rng(seed)
        if self.config.mode == "strict_budget":
            return self._strict_budget(eps, rng)
        return self._las_vegas(eps, rng)

    def _las_vegas(self, eps: float, rng: np.random.Generator) -> DynamicsResult:
        host = self.model.host
        updates = mixing_time(host.m, host.n, eps / 2, self.config.theta)
        logger.debug("las vegas run: {} updates (m={}, n={}, eps={:g})", updates, host.m, host.n, eps)
        state = self.run(updates, rng)
        return DynamicsResult(state.configuration(), state.updates, state.work)

    def _strict_budget(self, eps: float, rng: np.random.Generator) -> DynamicsResult:
        m = self.model.host.m
        attempts = max(1, math.ceil(math.log(2 / eps)))
        if m == 0:
            return DynamicsResult(PolymerConfiguration(), attempts=1)
        target = self.config.c2 * m * math.ceil(math.log(m / eps))
        budget = 3 * self.config.c1 * target
        updates = work = 0
        for attempt in range(1, attempts + 1):
            state = ChainState()
            while state.updates < target and state.work < budget:
                dynamics_step(self.sampler, state, rng)
            updates += state.updates
            work += state.work
            if state.updates >= target:
                return DynamicsResult(state.configuration(), updates, work, attempt)
            logger.debug("attempt {} ran out of work after {} of {} updates", attempt, state.updates, target)
        logger.info("every attempt exhausted its work budget; returning the empty configuration")
        return DynamicsResult(PolymerConfiguration(), updates, work, attempts, completed=False)


def sample_polymer_gibbs(
    model: PolymerModel,
    eps: float,
    config: Optional[DynamicsConfig] = None,
    seed: SeedLike = None,
) -> PolymerConfiguration:
    """An ε-sample from the polymer Gibbs measure of ``model``."""
    config = config or DynamicsConfig()
    seed = seed if seed is not None else config.seed
    return PolymerDynamics(model, config).sample(eps, seed).configuration


def _sample_connected_potts(
    host: SimpleGraph,
    params: PottsParams,
    eps: float,
    config: DynamicsConfig,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, int, int, bool]:
    if eps < math.exp(-host.n):
        logger.debug("eps={:g} is below exp(-n); sampling exactly", eps)
        return sample_exact_potts(host, params.q, params.beta, rng), 0, 0, True

    colour = int(rng.integers(params.q))
    model = PottsPolymerModel(host, params.with_colour(colour))
    result = PolymerDynamics(model, config).sample(eps / params.q, rng)
    sigma = config_to_colouring(host, result.configuration, colour)
    return sigma, result.updates, result.work, False


def sample_potts(
    host: SimpleGraph,
    params: PottsParams,
    eps: float,
    seed: SeedLike = None,
    config: Optional[DynamicsConfig] = None,
) -> PottsSample:
    """
    An ε-sample from the Potts distribution on ``host``.

    A ground colour is drawn uniformly and the polymer model for it is
    sampled at accuracy ε/q. Disconnected hosts are sampled component by
    component with ε split evenly; components with ε < e^{-n} are sampled
    exactly.
    """
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)", {"eps": eps})
    config = config or DynamicsConfig()
    if seed is None:
        seed = config.seed
    rng = make_rng(seed)

    components = connected_components(host)
    share = eps / max(len(components), 1)
    sigma = np.zeros(host.n, dtype=np.int64)
    updates = work = 0
    exact = bool(components)
    for component in components:
        if len(components) == 1:
            sub, labels = host, component
        else:
            sub, labels = induced_subgraph(host, component)
        part, part_updates, part_work, part_exact = _sample_connected_potts(sub, params, share, config, rng)
        sigma[list(labels)] = part
        updates += part_updates
        work += part_work
        exact = exact and part_exact

    return PottsSample(
        colouring=sigma.tolist(),
        dominant_colour=dominant_colour(sigma, params.q),
        mono_edges=monochromatic_edges(host, sigma),
        updates=updates,
        work_units=work,
        exact=exact,
        seed=seed if isinstance(seed, int) else None,
    )
