"""
The ferromagnetic Potts model as a polymer model.

With ground colour ``r``, a polymer is a connected set of vertices coloured
away from ``r``; its weight is exp(-β B_γ) where B_γ counts the edges leaving
V_γ plus the bichromatic edges inside it. Only polymers on fewer than n/2
vertices are allowed. A configuration maps to the colouring that gives every
uncovered vertex the colour ``r``, and

    e^{β|E|} ∏ w(γ) = e^{β m(σ)}

where m(σ) counts monochromatic edges.
"""

import math
from typing import Iterable, Optional, Sequence

import numpy as np
from loguru import logger

from polymerdyn.errors import ParameterError
from polymerdyn.graph_core import SimpleGraph, boundary_edge_count, connected_components_within
from polymerdyn.models import PottsParams
from polymerdyn.polymer import Polymer, PolymerConfiguration, PolymerModel

Colouring = np.ndarray


def bichromatic_boundary(host: SimpleGraph, polymer: Polymer) -> int:
    """B_γ: boundary edges of V_γ plus internal edges bichromatic under σ_γ."""
    spins = polymer.spin_map()
    adj = host.adj_lists
    internal = sum(
        1
        for v in polymer.vertices
        for u in adj[v]
        if u > v and u in spins and spins[u] != spins[v]
    )
    return boundary_edge_count(host, polymer.vertices) + internal


def allowed_size_cap(n: int) -> int:
    """Largest integer k with k < n/2."""
    return max(math.ceil(n / 2) - 1, 0)


class PottsPolymerModel(PolymerModel):
    """Polymer model for the Potts model with a single ground colour."""

    def __init__(self, host: SimpleGraph, params: PottsParams):
        super().__init__(
            host,
            params.q,
            [(params.colour,)] * host.n,
            max_polymer_size=allowed_size_cap(host.n),
        )
        self.params = params

    @property
    def beta(self) -> float:
        return self.params.beta

    @property
    def colour(self) -> int:
        return self.params.colour

    @property
    def truncation_rate(self) -> float:
        return self.params.truncation_rate

    def allowed(self, polymer: Polymer) -> bool:
        return 2 * len(polymer.vertices) < self.host.n

    def log_weight(self, polymer: Polymer) -> float:
        return -self.params.beta * bichromatic_boundary(self.host, polymer)

    def __repr__(self) -> str:
        return f"PottsPolymerModel(n={self.host.n}, q={self.q}, beta={self.beta:g}, colour={self.colour})"


def potts_polymer_model(host: SimpleGraph, params: PottsParams) -> PottsPolymerModel:
    return PottsPolymerModel(host, params)


def warn_if_out_of_regime(params: PottsParams) -> bool:
    """Log a warning for parameters outside the guaranteed regime; True when inside."""
    issues = params.regime_issues()
    for issue in issues:
        logger.warning("outside the guaranteed regime: {}", issue)
    if params.r_geo <= 0:
        logger.warning(
            "r_geo={:.4g} is not positive; truncating at rate tau/2={:.4g}",
            params.r_geo,
            params.truncation_rate,
        )
    return not issues


def config_to_colouring(host: SimpleGraph, configuration: Iterable[Polymer], colour: int) -> Colouring:
    """Colour each polymer vertex by its spin and every other vertex by ``colour``."""
    sigma = np.full(host.n, colour, dtype=np.int64)
    for polymer in configuration:
        sigma[list(polymer.vertices)] = polymer.spins
    return sigma


def colouring_to_config(
    host: SimpleGraph,
    sigma: Sequence[int],
    colour: int,
) -> Optional[PolymerConfiguration]:
    """
    Inverse of ``config_to_colouring``.

    The polymers are the connected components of the vertices not coloured
    ``colour``. Returns None when a component has n/2 or more vertices, i.e.
    when ``sigma`` is not the image of a configuration.
    """
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.shape != (host.n,):
        raise ParameterError("colouring length must equal n", {"n": host.n, "length": int(sigma.size)})
    off_ground = np.flatnonzero(sigma != colour).tolist()
    if not off_ground:
        return PolymerConfiguration()
    polymers = []
    for vertices in connected_components_within(host, off_ground):
        if 2 * len(vertices) >= host.n:
            return None
        polymers.append(Polymer(vertices, tuple(int(sigma[v]) for v in vertices)))
    return PolymerConfiguration.of(polymers)


def monochromatic_edges(host: SimpleGraph, sigma: Sequence[int]) -> int:
    """m(σ): edges whose endpoints share a colour."""
    edges = host.edge_array()
    if not len(edges):
        return 0
    sigma = np.asarray(sigma)
    return int(np.count_nonzero(sigma[edges[:, 0]] == sigma[edges[:, 1]]))


def dominant_colour(sigma: Sequence[int], q: int) -> int:
    """Most frequent colour, ties to the smallest."""
    return int(np.argmax(np.bincount(np.asarray(sigma, dtype=np.int64), minlength=q)))


def configuration_log_weight(model: PolymerModel, configuration: Iterable[Polymer]) -> float:
    return float(sum(model.log_weight(polymer) for polymer in configuration))
