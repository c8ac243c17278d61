"""Replicate substreams and inverse-CDF normal variates.

Stream derivation
-----------------
Replicate ``r`` of an experiment seeded with ``master_seed`` draws from a
Philox-4x64 generator whose 128-bit key is ``master_seed | r << 64`` and
whose counter starts at zero.  The map ``(master_seed, r) -> key`` is
injective for ``0 <= master_seed, r < 2**64``, and Philox keys index
statistically independent streams.

Normals
-------
Raw 64-bit words are cut to 53 bits and centred, ``u = (k + 1/2) 2^-53``,
so ``u`` lies strictly inside (0, 1).  ``u`` is mapped through the Cephes
rational approximation of the normal quantile (``scipy.special.ndtri``),
accurate to about 1e-16.  No rejection sampling is involved, so the k-th
variate of a replicate depends only on (master_seed, r, k).
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .errors import DomainError, StreamExhaustedError

_U64 = 1 << 64
# 2**64 counter blocks of four words; callers never get close
_STREAM_CAPACITY = 1 << 64


def normal_quantile(u):
    """Inverse standard normal CDF on the open unit interval.

    Delegates to ``scipy.special.ndtri`` (Cephes: rational approximations
    on a central and two tail ranges, relative error near 1e-16), the same
    class of algorithm as Wichura's AS241.
    """
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise DomainError("normal_quantile needs u in the open interval (0, 1)")
    return special.ndtri(u)


def substream(master_seed: int, replicate: int) -> np.random.Philox:
    """Philox bit generator for one replicate."""
    if not (0 <= master_seed < _U64 and 0 <= replicate < _U64):
        raise DomainError("master_seed and replicate must lie in [0, 2**64)")
    return np.random.Philox(key=int(master_seed) | (int(replicate) << 64))


def uniforms(bitgen: np.random.Philox, n: int) -> np.ndarray:
    """``n`` doubles strictly inside (0, 1)."""
    if n > _STREAM_CAPACITY:
        raise StreamExhaustedError(f"{n} variates exceed the substream capacity")
    raw = bitgen.random_raw(n)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def standard_normals(master_seed: int, replicate: int, n: int) -> np.ndarray:
    """First ``n`` normal variates of the replicate's substream."""
    # uniforms() never yields 0 or 1, so the domain check can be skipped
    return special.ndtri(uniforms(substream(master_seed, replicate), n))
