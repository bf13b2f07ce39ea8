"""
Event generation for the wave-packet source.

Packet centers are drawn independently from the factorized Gaussian source
rho_1(xi, pi) and every event of n packets carries perm(G) as its weight.
Averages over the symmetrized n-boson density matrix are then self-normalized
weighted means over events.

Each event owns its random stream, derived from (seed, n, index) through
``numpy.random.SeedSequence``. Events are therefore identical whether they are
drawn serially or by several worker processes.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed
from scipy.stats import norm

from lab_project.exceptions import NumericalFailure, ParameterError
from wavepackets.packets import GramMatrix, WavePacket, gram_matrix
from wavepackets.permanents import gram_permanent

logger = logging.getLogger(__name__)

EVENT_LIMIT = 20


@dataclass(frozen=True, eq=False)
class Event:
    packets: tuple
    weight: float
    log_importance: float
    gram: GramMatrix
    symmetrized: bool = True

    @property
    def n(self):
        return len(self.packets)

    @property
    def importance(self):
        return math.exp(self.log_importance)


@dataclass(frozen=True, eq=False)
class Ensemble:
    config: object
    n: int
    events: tuple

    def __post_init__(self):
        if any(event.n != self.n for event in self.events):
            raise ParameterError("every event of an ensemble must hold the same number of packets")

    def __len__(self):
        return len(self.events)

    @property
    def weights(self):
        return np.array([event.weight for event in self.events])


def event_rng(seed, n, index):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(n), int(index)]))


def sample_single_packet(config, rng):
    """xi ~ N(0, R^2), pi ~ N(0, m T) in each of the d components."""
    xi = rng.normal(0.0, config.radius, config.dimension)
    pi = rng.normal(0.0, math.sqrt(config.momentum_variance), config.dimension)
    return WavePacket(xi=xi, pi=pi, sigma=config.sigma)


def source_log_density(config, packet):
    """log rho_1 at the packet center."""
    return float(
        np.sum(norm.logpdf(packet.xi, scale=config.radius))
        + np.sum(norm.logpdf(packet.pi, scale=math.sqrt(config.momentum_variance)))
    )


def _check_size(n):
    if int(n) != n or not 1 <= n <= EVENT_LIMIT:
        raise ParameterError(f"events hold between 1 and {EVENT_LIMIT} packets, got {n!r}")
    return int(n)


def make_event(config, packets):
    """Weight and Gram matrix of a prescribed set of packets."""
    packets = tuple(packets)
    n = _check_size(len(packets))
    log_importance = sum(source_log_density(config, packet) for packet in packets)
    if not config.symmetrize:
        return Event(packets, 1.0, log_importance, GramMatrix.identity(n), symmetrized=False)

    gram = gram_matrix(packets)
    weight = gram_permanent(gram)
    if not weight > 0:
        logger.error("event weight %r is not positive", weight)
        raise NumericalFailure(f"event weight perm(G) = {weight!r} is not positive")
    return Event(packets, weight, log_importance, gram)


def sample_event(config, n, rng):
    n = _check_size(n)
    return make_event(config, [sample_single_packet(config, rng) for _ in range(n)])


def _sample_block(config, n, start, stop):
    seed = config.require_seed()
    return [sample_event(config, n, event_rng(seed, n, index)) for index in range(start, stop)]


def sample_ensemble(config, n, size, workers=None):
    """
    ``size`` events of ``n`` packets.

    With ``workers`` > 1 contiguous index ranges are drawn in worker
    processes and concatenated in index order.
    """
    n = _check_size(n)
    if size < 1:
        raise ParameterError("an ensemble needs at least one event")
    config.require_seed()
    workers = workers or settings.BOSONLAB['WORKERS']

    if workers <= 1 or size < 2 * workers:
        events = _sample_block(config, n, 0, size)
    else:
        bounds = np.linspace(0, size, workers + 1).astype(int)
        blocks = Parallel(n_jobs=workers, backend='loky')(
            delayed(_sample_block)(config, n, int(start), int(stop))
            for start, stop in zip(bounds[:-1], bounds[1:])
        )
        events = [event for block in blocks for event in block]

    logger.debug("sampled %d events of n=%d with seed %s", size, n, config.seed)
    return Ensemble(config=config, n=n, events=tuple(events))


def fixed_ensemble(config, packet_lists):
    """An ensemble of prescribed events, for oracles and limiting configurations."""
    events = tuple(make_event(config, packets) for packets in packet_lists)
    if not events:
        raise ParameterError("an ensemble needs at least one event")
    return Ensemble(config=config, n=events[0].n, events=events)


def condensate_packets(config, n):
    """n copies of the packet at rest, alpha_0 = (0, 0)."""
    return [WavePacket.at_rest(config.sigma, config.dimension)] * _check_size(n)
