"""
Polymer dynamics sampling and approximate counting for the low-temperature
ferromagnetic Potts model on expanders.
"""

__version__ = "0.1.0"

from loguru import logger

from polymerdyn.config_model import (
    expansion_audit,
    sample_configuration_multigraph,
    sample_simple_graph,
    validate_degree_sequence,
)
from polymerdyn.counting import build_schedule, estimate_log_Z_potts, estimate_log_Zhat
from polymerdyn.dynamics import (
    ChainState,
    EdgePolymerSampler,
    PolymerDynamics,
    dynamics_step,
    mixing_time,
    sample_nu_e,
    sample_polymer_gibbs,
    sample_potts,
    sample_truncation_level,
)
from polymerdyn.errors import PolymerDynError
from polymerdyn.graph_core import MultiGraph, SimpleGraph, build_graph, read_graph
from polymerdyn.models import CountingConfig, DegreeSequence, DynamicsConfig, PottsParams
from polymerdyn.polymer import LogValue, Polymer, PolymerConfiguration, PolymerModel, are_compatible
from polymerdyn.potts import PottsPolymerModel, config_to_colouring, potts_polymer_model

logger.disable("polymerdyn")
