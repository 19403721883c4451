"""Named random streams derived from a single master seed.

Every stochastic stage (budget draw, split shuffle, estimator
randomization, subsampling, data generation) pulls its generator from a
:class:`Streams` object by name, so adding a stage or a replication never
perturbs the draws of another.
"""

from __future__ import annotations

import os
import secrets
import zlib

import numpy as np

__all__ = ["Streams", "as_streams", "resolve_seed"]


def _key(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


class Streams:
    """Factory of independent :class:`numpy.random.Generator` objects.

    Parameters
    ----------
    seed : int
        Master seed (non-negative).
    path : tuple of int, optional
        Spawn path below the master seed; used by :meth:`child`.
    """

    def __init__(self, seed, path=()):
        seed = int(seed)
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = seed
        self.path = tuple(path)

    def __repr__(self):
        return f"Streams(seed={self.seed}, path={self.path})"

    def child(self, *keys):
        """Return a sub-factory, e.g. one per Monte-Carlo replication."""
        return Streams(self.seed, self.path + tuple(_key(k) for k in keys))

    def generator(self, name, *keys):
        """Generator for stream ``name`` (optionally indexed by ``keys``)."""
        spawn_key = self.path + (_key(name),) + tuple(_key(k) for k in keys)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=spawn_key)
        return np.random.Generator(np.random.PCG64(ss))

    def uniform(self, name, *keys):
        return float(self.generator(name, *keys).random())


def resolve_seed(seed=None):
    """Seed from the argument, else ``HULC_SEED``, else fresh entropy."""
    if seed is not None:
        return int(seed)
    env = os.environ.get("HULC_SEED")
    if env:
        return int(env)
    return secrets.randbits(63)


def as_streams(rng=None):
    """Coerce ``None``, an int seed, or a :class:`Streams` into ``Streams``."""
    if isinstance(rng, Streams):
        return rng
    if isinstance(rng, np.random.Generator):
        raise TypeError("pass an int seed or Streams, not a bare Generator")
    return Streams(resolve_seed(rng))
