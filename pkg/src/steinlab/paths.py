"""Seeded simulation of the moving average and its partial sums.

Replicate ``r`` draws ``N + M`` standard normals ``e_0..e_{N+M-1}`` from
its own substream (see :mod:`steinlab.rng`); buffer index ``j`` carries the
innovation at time ``j - M``.  Then

    X_n = sum_{i=1}^{M} alpha_i eps_{n-i},     n = 1..N,

so the buffer covers every innovation any ``X_n`` touches and negative time
needs no separate treatment.  A prefix ``X_1..X_N'`` of a horizon-``N``
path is itself a horizon-``N'`` path of the same model, which is what the
common-random-number sweeps rely on.
"""

from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.fft

from .constants import ModelParams, Regime
from .covariance import build_weights
from .errors import DomainError, TruncationOverflowError
from .hermite import hermite_paper
from .rng import standard_normals
from .series import pair_series_tail

#: Largest weight count ``truncation_length`` will return (2**27 doubles = 1 GiB).
DEFAULT_M_CAP = 1 << 27

#: Default ratio of weight count to horizon.
DEFAULT_TRUNC_FACTOR = 64

#: ``N * M`` at or below which the convolution is done directly.
DIRECT_WORK_LIMIT = 1 << 22

RAW_MAGIC = b"LMMA"
RAW_VERSION = 1
_RAW_HEADER = struct.Struct("<4sIQQQQ")


@dataclass(frozen=True)
class PathConfig:
    """Horizon, truncation and seed lineage of one trajectory."""

    N: int
    M: int
    master_seed: int = 0
    replicate_index: int = 0

    def __post_init__(self):
        for name in ("N", "M"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")
        if not (0 <= self.master_seed < 1 << 64):
            raise DomainError("master_seed must fit in 64 unsigned bits")
        if not (0 <= self.replicate_index < 1 << 64):
            raise DomainError("replicate_index must fit in 64 unsigned bits")

    def replicate(self, r: int) -> "PathConfig":
        return PathConfig(self.N, self.M, self.master_seed, r)


@dataclass(frozen=True, eq=False)
class PathBatch:
    X: np.ndarray
    config: PathConfig
    trunc_var_deficit: float


def _tail_mass(beta: float, K: float) -> float:
    return K ** (1 - 2 * beta) / (2 * beta - 1)


def truncation_length(beta: float, delta_sq: float, cap: int = DEFAULT_M_CAP) -> int:
    """Smallest ``M`` with ``M^(1-2 beta) / (2 beta - 1) <= delta_sq``.

    Raises :class:`TruncationOverflowError` when that ``M`` exceeds ``cap``.
    """
    ModelParams(1, beta)  # validates beta
    if not (0 < delta_sq < 1):
        raise DomainError("delta_sq must lie in (0, 1)")
    a = 2 * beta - 1
    guess = ((a * delta_sq) ** (-1.0 / a))
    if not math.isfinite(guess) or guess > 4 * cap:
        raise TruncationOverflowError(
            f"beta={beta}, delta_sq={delta_sq} needs M ~ {guess:.3g} > cap {cap}")
    M = max(1, math.ceil(guess))
    # float rounding in the closed form can leave M off by one either way;
    # beyond 2^52 neighbouring integers are no longer distinguishable
    if M < 1 << 52:
        while M > 1 and _tail_mass(beta, M - 1) <= delta_sq:
            M -= 1
        while _tail_mass(beta, M) > delta_sq:
            M += 1
    if M > cap:
        raise TruncationOverflowError(f"required M = {M} exceeds cap {cap}")
    return M


def default_truncation(N: int, factor: int = DEFAULT_TRUNC_FACTOR) -> int:
    return int(factor) * int(N)


def truncation_deficit(beta: float, M: int) -> float:
    """``sum_{i>M} i^-2beta``: ideal variance the truncated weights leave out."""
    value, _ = pair_series_tail(beta, [0], int(M) + 1)
    return float(value[0])


@dataclass
class PathSimulator:
    """Reusable simulator for a fixed model, horizon and truncation.

    Holds the weights and, for the FFT route, their transform, so repeated
    replicates only pay for the innovations and one forward/inverse pair.
    """

    params: ModelParams
    N: int
    M: int
    master_seed: int = 0
    weights: Optional[np.ndarray] = None
    method: str = "auto"
    _spec: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    _nfft: int = field(default=0, init=False, repr=False)

    def __post_init__(self):
        PathConfig(self.N, self.M, self.master_seed)
        if self.weights is None:
            self.weights = build_weights(self.params, self.M)
        elif len(self.weights) != self.M:
            raise DomainError(f"expected {self.M} weights, got {len(self.weights)}")
        if self.method not in ("auto", "direct", "fft"):
            raise DomainError(f"unknown convolution method {self.method!r}")
        if self.method == "auto":
            self.method = "direct" if self.N * self.M <= DIRECT_WORK_LIMIT else "fft"
        self.deficit = truncation_deficit(self.params.beta, self.M)

    def _convolve(self, e: np.ndarray) -> np.ndarray:
        N, M = self.N, self.M
        if self.method == "direct":
            return np.convolve(e, self.weights, mode="valid")[1:N + 1]
        if self._spec is None:
            # circular length >= N + M keeps indices M..N+M-1 free of wrap-around
            self._nfft = scipy.fft.next_fast_len(N + M, real=True)
            self._spec = scipy.fft.rfft(self.weights, self._nfft)
        full = scipy.fft.irfft(scipy.fft.rfft(e, self._nfft) * self._spec, self._nfft)
        return full[M:N + M]

    def innovations(self, replicate: int) -> np.ndarray:
        return standard_normals(self.master_seed, replicate, self.N + self.M)

    def path(self, replicate: int) -> PathBatch:
        cfg = PathConfig(self.N, self.M, self.master_seed, replicate)
        X = self._convolve(self.innovations(replicate))
        return PathBatch(X, cfg, self.deficit)


def simulate_path(params: ModelParams, cfg: PathConfig,
                  weights: Optional[np.ndarray] = None, method: str = "auto") -> PathBatch:
    """One trajectory ``X_1..X_N`` for ``cfg``; bitwise reproducible."""
    sim = PathSimulator(params, cfg.N, cfg.M, cfg.master_seed, weights, method)
    return sim.path(cfg.replicate_index)


def s_n(params: ModelParams, batch: PathBatch) -> float:
    """``S_N = sum_n H_q(X_n)`` with the ``1/q!``-scaled Hermite polynomial."""
    return math.fsum(hermite_paper(params.q, batch.X).tolist())


def z_clt(params: ModelParams, sigma_sq: float, N: int, s: float) -> float:
    params.require(Regime.CLT)
    if sigma_sq <= 0:
        raise DomainError("sigma_sq must be positive")
    return s / math.sqrt(sigma_sq * N)


def z_nclt(params: ModelParams, h: float, N: int, s: float) -> float:
    params.require(Regime.NCLT)
    q, beta = params.q, params.beta
    return s * N ** (beta * q - q / 2 - 1) / h


def write_raw_path(batch: PathBatch, path) -> None:
    """Binary dump: little-endian header then ``N`` float64 values."""
    c = batch.config
    header = _RAW_HEADER.pack(RAW_MAGIC, RAW_VERSION, c.N, c.M, c.master_seed,
                              c.replicate_index)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(np.asarray(batch.X, dtype="<f8").tobytes())
    os.replace(tmp, path)


def read_raw_path(path) -> PathBatch:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _RAW_HEADER.size:
        raise DomainError("file too short for a path header")
    magic, version, N, M, seed, rep = _RAW_HEADER.unpack_from(raw)
    if magic != RAW_MAGIC or version != RAW_VERSION:
        raise DomainError(f"not a version-{RAW_VERSION} path dump")
    X = np.frombuffer(raw, dtype="<f8", offset=_RAW_HEADER.size).astype(float)
    if len(X) != N:
        raise DomainError(f"header says N={N}, payload has {len(X)} values")
    return PathBatch(X, PathConfig(N, M, seed, rep), float("nan"))


def _run_chunk(func: Callable, indices: Sequence[int]):
    return [func(r) for r in indices]


def map_replicates(func: Callable[[int], object], reps: int, threads: int = 1,
                   chunk: int = 64) -> list:
    """``[func(0), ..., func(reps - 1)]``, optionally over worker processes.

    Results come back in replicate order whatever the scheduling, so any
    reduction over them is independent of ``threads``.  ``func`` must be
    picklable when ``threads > 1``.
    """
    if reps < 0:
        raise DomainError("reps must be non-negative")
    if threads <= 1 or reps <= chunk:
        return [func(r) for r in range(reps)]
    blocks = [range(s, min(s + chunk, reps)) for s in range(0, reps, chunk)]
    out: list = []
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for part in pool.map(_run_chunk, [func] * len(blocks), blocks):
            out.extend(part)
    return out


def _sum_draw(params: ModelParams, sim: PathSimulator, replicate: int) -> float:
    return math.fsum(hermite_paper(params.q, sim.path(replicate).X).tolist())


def s_n_sample(params: ModelParams, N: int, M: int, reps: int, master_seed: int,
               threads: int = 1, offset: int = 0,
               weights: Optional[np.ndarray] = None) -> np.ndarray:
    """``S_N`` for replicates ``offset .. offset + reps - 1``."""
    sim = PathSimulator(params, N, M, master_seed, weights)
    func = partial(offset_replicate, partial(_sum_draw, params, sim), offset)
    return np.array(map_replicates(func, reps, threads), dtype=float)


def offset_replicate(func: Callable[[int], object], offset: int, r: int):
    """``func(r + offset)``; picklable glue for seed-disjoint batches."""
    return func(r + offset)


def _lag_products(params: ModelParams, sim: PathSimulator, lags: Sequence[int],
                  replicate: int) -> np.ndarray:
    H = hermite_paper(params.q, sim.path(replicate).X)
    return H[0] * H[np.asarray(lags)]


def hermite_lag_products(params: ModelParams, lags: Sequence[int], M: int, reps: int,
                         master_seed: int, threads: int = 1) -> np.ndarray:
    """Per replicate, ``H_q(X_1) H_q(X_{1+m})`` for each lag ``m``.

    Shape ``(reps, len(lags))``; rows are independent, so plain sample
    means and standard errors apply.
    """
    lags = [int(m) for m in lags]
    if min(lags) < 0:
        raise DomainError("lags must be non-negative")
    sim = PathSimulator(params, max(lags) + 1, M, master_seed)
    func = partial(_lag_products, params, sim, lags)
    return np.array(map_replicates(func, reps, threads), dtype=float).reshape(reps, len(lags))
