"""
Estimates with error bars.

Weighted ensemble averages are ratios of sums, so their errors come from a
delete-one-block jackknife over contiguous blocks of events. Several
independent ensembles can share one jackknife by deleting block b from each
of them at once.
"""

from dataclasses import dataclass

import numpy as np
from django.conf import settings


@dataclass(frozen=True)
class Estimate:
    """A value and its one-sigma statistical error (scalars or same-shape arrays)."""

    value: object
    error: object

    @classmethod
    def exact(cls, value):
        return cls(value, np.zeros_like(value, dtype=float) if np.ndim(value) else 0.0)

    def __iter__(self):
        yield self.value
        yield self.error


def jackknife_blocks():
    return settings.BOSONLAB['JACKKNIFE_BLOCKS']


def mean_with_error(samples):
    """Sample mean and its standard error."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] < 2:
        return Estimate.exact(samples.mean(axis=0))
    return Estimate(samples.mean(axis=0), samples.std(axis=0, ddof=1) / np.sqrt(samples.shape[0]))


def weighted_mean(values, weights):
    """sum_e w_e O_e / sum_e w_e along the event axis."""
    values = np.asarray(values)
    weights = np.asarray(weights, dtype=float)
    return np.tensordot(weights, values, axes=(0, 0)) / weights.sum()


def block_sums(values, blocks=None):
    """Sums of ``values`` over ``blocks`` contiguous event blocks, leading axis = block."""
    values = np.asarray(values)
    blocks = min(blocks or jackknife_blocks(), values.shape[0])
    return np.stack([part.sum(axis=0) for part in np.array_split(values, blocks)])


def jackknife(statistic, *sums):
    """
    Estimate of ``statistic(*totals)`` with a delete-one-block error.

    Every element of ``sums`` is a block_sums array; all share the same
    number of blocks.
    """
    totals = [part.sum(axis=0) for part in sums]
    value = statistic(*totals)
    blocks = sums[0].shape[0]
    if blocks < 2:
        return Estimate.exact(value)
    with np.errstate(divide='ignore', invalid='ignore'):
        replicas = np.stack([
            statistic(*[total - part[b] for total, part in zip(totals, sums)])
            for b in range(blocks)
        ])
    spread = replicas - replicas.mean(axis=0)
    error = np.sqrt((blocks - 1) / blocks * np.sum(np.abs(spread) ** 2, axis=0))
    return Estimate(value, error)
