"""Seeded random instances."""

import numpy as np

from ..posmaps import KINDS, random_map, random_orthogonal
from ..symmat import sym


def rng_for(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the stream identified by ``key``.

    Streams are keyed, not sequential, so a trial's data does not depend on
    which other trials (or theorems, or dimensions) were run.
    """
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=key))


def gen_spd(dim: int, cond_cap: float = 10.0, seed=None):
    """Random SPD matrix with condition number at most ``cond_cap``.

    ``Q diag(s * lam) Q^T`` with ``Q`` Haar orthogonal, ``lam`` log-uniform
    in ``[1/cond_cap, 1]`` and ``s`` log-uniform in ``[1/2, 2]``. ``seed`` may
    be an integer, a ``SeedSequence`` or a ``Generator``.
    """
    if dim < 1 or not cond_cap > 1:
        raise ValueError("gen_spd needs dim >= 1 and cond_cap > 1")
    rng = np.random.default_rng(seed)
    Q = random_orthogonal(dim, rng)
    lam = cond_cap ** -rng.random(dim)
    s = 2.0 ** rng.uniform(-1.0, 1.0)
    return sym((Q * (s * lam)) @ Q.T)


def trial_matrices(master_seed, code, dim, i, count, cond_cap):
    rng = rng_for(master_seed, code, dim, i, 0)
    return np.stack([gen_spd(dim, cond_cap, rng) for _ in range(count)])


def trial_weights(master_seed, code, dim, i, n):
    return rng_for(master_seed, code, dim, i, 2, n).dirichlet(np.ones(n))


def trial_map(master_seed, code, dim, i, kind):
    return random_map(kind, dim, rng_for(master_seed, code, dim, i, 1, KINDS.index(kind)))
