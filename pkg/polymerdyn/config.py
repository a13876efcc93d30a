"""
Process-wide settings for polymerdyn.
"""

import os
from typing import Mapping, Optional

from pydantic import BaseModel, Field

from polymerdyn.errors import ParameterError

WORK_CEILING_ENV = "POLYMERDYN_WORK_CEILING"


class Settings(BaseModel):
    """Guards and cache sizes shared by every module."""

    work_ceiling: int = Field(default=10**7, ge=1)
    oracle_colouring_limit: int = Field(default=10**8, ge=1)
    oracle_distribution_limit: int = Field(default=10**6, ge=1)
    oracle_state_limit: int = Field(default=10**4, ge=1)
    oracle_polymer_limit: int = Field(default=10**5, ge=1)
    oracle_configuration_limit: int = Field(default=10**6, ge=1)
    family_cache_size: int = Field(default=1 << 16, ge=0)
    dense_adjacency_limit: int = Field(default=1 << 15, ge=0)


def get_settings(environ: Optional[Mapping[str, str]] = None) -> Settings:
    """
    Build settings, applying environment overrides.

    Args:
        environ: Mapping to read overrides from (defaults to ``os.environ``)

    Returns:
        Settings instance

    Raises:
        ParameterError: If an override is not a positive integer
    """
    environ = os.environ if environ is None else environ
    overrides = {}

    raw = environ.get(WORK_CEILING_ENV)
    if raw:
        try:
            overrides["work_ceiling"] = int(raw)
        except ValueError:
            raise ParameterError(
                f"{WORK_CEILING_ENV} must be an integer",
                {"value": raw},
            )
        if overrides["work_ceiling"] < 1:
            raise ParameterError(
                f"{WORK_CEILING_ENV} must be positive",
                {"value": raw},
            )

    return Settings(**overrides)
