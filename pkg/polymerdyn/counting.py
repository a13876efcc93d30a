"""
Partition-function estimation by annealing in β.

Raising β only shrinks polymer weights, so the grid
β_0 = β_start > β_1 > ... > β_K = β runs through models that all satisfy
the sampling condition when the target does. Each ratio
Ẑ(β_i)/Ẑ(β_{i+1}) is the mean of exp(-(β_i - β_{i+1}) B(Γ)) over samples
Γ drawn at β_{i+1}; with a step of 1/m every such sample lies in [e^{-1}, 1]
because distinct polymers of a configuration never share a boundary edge.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger

from polymerdyn.dynamics import PolymerDynamics
from polymerdyn.errors import ConsistencyError, ParameterError
from polymerdyn.graph_core import SimpleGraph, connected_components, induced_subgraph
from polymerdyn.models import AnnealingSchedule, CountingConfig, PottsParams, ZEstimate
from polymerdyn.oracle import exact_potts_logZ
from polymerdyn.polymer import PolymerConfiguration
from polymerdyn.potts import PottsPolymerModel, allowed_size_cap, bichromatic_boundary, warn_if_out_of_regime
from polymerdyn.rng import SeedLike, make_rng, spawn_rngs

RATIO_TOLERANCE = 1e-12


def start_beta(n: int, beta: float, q: int, alpha: float, eps: float) -> float:
    """Inverse temperature at which Ẑ lies within a factor 1 + ε/8 of one."""
    return max(beta, (math.log(8 * math.e**3 * (q - 1)) + math.log(16 * n / eps)) / alpha)


def build_schedule(
    m: int,
    n: int,
    beta: float,
    q: int,
    alpha: float,
    eps: float,
    *,
    sample_constant: float = 64.0,
    samples_per_ratio: Optional[int] = None,
) -> AnnealingSchedule:
    """
    Annealing grid from β_start down to ``beta`` in steps of 1/m.

    K = ceil((β_start - β) m) ratios are estimated with
    s = ceil(sample_constant K / ε²) samples each unless overridden.
    """
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)", {"eps": eps})
    beta_start = start_beta(max(n, 1), beta, q, alpha, eps)
    if m == 0 or beta_start <= beta:
        K, step = 0, 0.0
        betas = [beta]
    else:
        step = 1.0 / m
        K = math.ceil((beta_start - beta) * m)
        betas = [beta_start - i * step for i in range(K)] + [beta]
    if samples_per_ratio is None:
        samples_per_ratio = math.ceil(sample_constant * K / eps**2)
    return AnnealingSchedule(
        beta_target=beta,
        beta_start=betas[0],
        step=step,
        betas=betas,
        samples_per_ratio=samples_per_ratio,
    )


def configuration_boundary(host: SimpleGraph, configuration: PolymerConfiguration) -> int:
    """B(Γ): the sum of B_γ over the polymers of Γ."""
    return sum(bichromatic_boundary(host, polymer) for polymer in configuration)


def _estimate_ratio(
    host: SimpleGraph,
    params: PottsParams,
    upper: float,
    lower: float,
    samples: int,
    eps: float,
    config: CountingConfig,
    rng: np.random.Generator,
) -> Tuple[float, int]:
    """Mean of exp(-(upper - lower) B(Γ)) over Γ drawn at ``lower``; also the exhausted-run count."""
    model = PottsPolymerModel(host, params.with_beta(lower))
    dynamics = PolymerDynamics(model, config.dynamics)
    delta = upper - lower
    total = 0.0
    exhausted = 0
    for _ in range(samples):
        result = dynamics.sample(eps, rng)
        if not result.completed:
            exhausted += 1
        value = math.exp(-delta * configuration_boundary(host, result.configuration))
        if not math.exp(-1.0) - RATIO_TOLERANCE <= value <= 1.0:
            raise ConsistencyError(
                "annealing ratio sample outside [1/e, 1]",
                {"value": value, "beta": lower, "delta": delta},
            )
        total += value
    return total / samples, exhausted


def _single_log_Zhat(
    host: SimpleGraph,
    params: PottsParams,
    eps: float,
    config: CountingConfig,
    seed: SeedLike,
) -> ZEstimate:
    schedule = build_schedule(
        host.m,
        host.n,
        params.beta,
        params.q,
        params.alpha,
        eps,
        sample_constant=config.sample_constant,
        samples_per_ratio=config.samples_per_ratio,
    )
    K = schedule.K
    logger.debug(
        "annealing schedule: beta {:.4g} -> {:.4g}, K={}, s={}",
        schedule.beta_start,
        schedule.beta_target,
        K,
        schedule.samples_per_ratio,
    )
    if K == 0:
        return ZEstimate(log_value=0.0, log_zhat=0.0, eps=eps, beta_start=schedule.beta_start)

    stage_eps = min(eps / (8 * K), 0.5)
    rngs = spawn_rngs(seed, K)
    betas = schedule.betas

    def run(i: int) -> Tuple[float, int]:
        return _estimate_ratio(
            host, params, betas[i], betas[i + 1], schedule.samples_per_ratio, stage_eps, config, rngs[i]
        )

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outcomes = list(pool.map(run, range(K)))
    else:
        outcomes = [run(i) for i in range(K)]

    means = [mean for mean, _ in outcomes]
    aborts = [
        f"ratio {i}: {exhausted} run(s) exhausted their work budget"
        for i, (_, exhausted) in enumerate(outcomes)
        if exhausted
    ]
    log_value = -float(np.sum(np.log(means)))
    return ZEstimate(
        log_value=log_value,
        log_zhat=log_value,
        eps=eps,
        K=K,
        samples_per_ratio=schedule.samples_per_ratio,
        beta_start=schedule.beta_start,
        ratio_means=means,
        aborts=aborts,
    )


def estimate_log_Zhat(
    host: SimpleGraph,
    params: PottsParams,
    eps: float,
    seed: SeedLike = None,
    config: Optional[CountingConfig] = None,
) -> ZEstimate:
    """
    Estimate log Ẑ, the polymer partition function for ground colour
    ``params.colour``, to within ε with probability at least 3/4.
    """
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)", {"eps": eps})
    config = config or CountingConfig()
    if allowed_size_cap(host.n) == 0:
        return ZEstimate(log_value=0.0, log_zhat=0.0, eps=eps, exact=True)

    if not config.median_of_three:
        return _single_log_Zhat(host, params, eps, config, seed)

    runs = [_single_log_Zhat(host, params, eps, config, child) for child in spawn_rngs(seed, 3)]
    runs.sort(key=lambda estimate: estimate.log_value)
    median = runs[1]
    return median.model_copy(update={"aborts": [a for estimate in runs for a in estimate.aborts]})


def _connected_log_Z(
    host: SimpleGraph,
    params: PottsParams,
    eps: float,
    config: CountingConfig,
    rng: np.random.Generator,
) -> ZEstimate:
    if eps < math.exp(-host.n):
        logger.debug("eps={:g} is below exp(-n); computing log Z exactly", eps)
        return ZEstimate(log_value=exact_potts_logZ(host, params.q, params.beta), eps=eps, exact=True)
    zhat = estimate_log_Zhat(host, params, eps / 2, rng, config)
    log_value = math.log(params.q) + params.beta * host.m + zhat.log_value
    return zhat.model_copy(update={"log_value": log_value, "eps": eps, "exact": False})


def estimate_log_Z_potts(
    host: SimpleGraph,
    params: PottsParams,
    eps: float,
    seed: SeedLike = None,
    config: Optional[CountingConfig] = None,
) -> ZEstimate:
    """
    Estimate log Z of the Potts model on ``host`` to within ε.

    log Z is approximated by log q + β|E| + log Ẑ at accuracy ε/2. A
    disconnected host is the sum of its components, ε split evenly; a
    component with ε < e^{-n} is summed exactly.
    """
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)", {"eps": eps})
    config = config or CountingConfig()
    warn_if_out_of_regime(params)
    rng = make_rng(seed)

    components = connected_components(host)
    if len(components) == 1:
        estimate = _connected_log_Z(host, params, eps, config, rng)
    else:
        share = eps / len(components)
        parts: List[ZEstimate] = []
        for component in components:
            sub, _ = induced_subgraph(host, component)
            parts.append(_connected_log_Z(sub, params, share, config, rng))
        zhats = [part.log_zhat for part in parts]
        estimate = ZEstimate(
            log_value=sum(part.log_value for part in parts),
            log_zhat=None if any(z is None for z in zhats) else sum(zhats),
            eps=eps,
            K=sum(part.K for part in parts),
            samples_per_ratio=max(part.samples_per_ratio for part in parts),
            ratio_means=[mean for part in parts for mean in part.ratio_means],
            aborts=[abort for part in parts for abort in part.aborts],
            exact=all(part.exact for part in parts),
            components=len(components),
        )
    logger.info("log Z estimate {:.6g} (eps={:g}, K={})", estimate.log_value, eps, estimate.K)
    return estimate.model_copy(update={"seed": seed if isinstance(seed, int) else None})
