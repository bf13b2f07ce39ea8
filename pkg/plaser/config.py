"""
Source parameters of the wave-packet model.

Config files are flat ``key = value`` lists read with python-dotenv::

    # dilute pion source
    radius = 3.0
    temperature = 3.0
    mass = 1.0
    sigma = 1.0
    n0 = 2.0
    seed = 12345
"""

import logging
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from dotenv import dotenv_values

from lab_project.exceptions import ConfigError, ParameterError

from .serializers import ModelConfigSerializer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelConfig:
    """
    radius R and temperature T set the Gaussian source of packet centers
    (xi ~ N(0, R^2), pi ~ N(0, m T) per component), sigma is the common packet
    width and n0 the mean multiplicity before symmetrization. With
    ``symmetrize`` off every Gram matrix is replaced by the identity.
    """

    radius: float
    temperature: float
    mass: float
    sigma: float
    n0: float
    t0: float = 0.0
    dimension: int = 1
    seed: int = None
    symmetrize: bool = True

    def __post_init__(self):
        for name in ('radius', 'temperature', 'mass', 'sigma', 'n0'):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if self.dimension not in (1, 3):
            raise ParameterError("dimension must be 1 or 3")

    @property
    def momentum_variance(self):
        return self.mass * self.temperature

    def as_dict(self):
        return asdict(self)

    def evolve(self, **changes):
        return replace(self, **changes)

    def require_seed(self):
        if self.seed is None:
            raise ConfigError({'seed': ["A seed is required for sampling."]})
        return self.seed


def parse_config(values):
    """Validate a mapping of raw config values into a ModelConfig."""
    serializer = ModelConfigSerializer(data=dict(values))
    if not serializer.is_valid():
        raise ConfigError(serializer.errors)
    return ModelConfig(**serializer.validated_data)


def load_config(path, **overrides):
    """Read a config file; keyword overrides that are not None replace file values."""
    path = Path(path)
    if not path.is_file():
        raise ParameterError(f"config file {path} does not exist")
    values = dotenv_values(path)
    values.update({key: value for key, value in overrides.items() if value is not None})
    config = parse_config(values)
    logger.debug("loaded %s from %s", config, path)
    return config
