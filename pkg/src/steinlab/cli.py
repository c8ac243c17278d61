"""Command-line experiment runner.

Every run is described by an :class:`ExperimentConfig`.  Its canonical
JSON form (compute-relevant fields only, sorted keys) together with the
package version is hashed to 64 bits; that hash names the cache entry
under ``$STEINLAB_CACHE_DIR`` (default ``~/.cache/steinlab``).  Outputs are
written to a temporary file in the target directory and renamed into
place, so a reader never sees a half-written file.

Exit codes: 0 success, 2 invalid input, 3 wrong regime, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import special

from . import __version__
from .constants import (ModelParams, Regime, classify_regime, constant_set,
                        cov_constant, h_qbeta, sigma_qbeta)
from .covariance import build_table, rho_asymptotic_ratio, table_to_csv
from .empirics import fit_rate, ks_one_sample, ks_two_sample
from .errors import DomainError, NumericError, RegimeError
from .nclt import hermite_surrogate_sample, kernel_error, renorm_second_moment
from .paths import DEFAULT_TRUNC_FACTOR, s_n_sample
from .spitzer import (f1_hat, f2_hat, g1_hat, g2_hat, g2_limit_moment,
                      nclt_growth)
from .stein import (berry_esseen_report, mean_T_exact, stein_exact_q2,
                    stein_mc_sweep, stein_wick_q2)

SUBCOMMANDS = ("constants", "rho", "clt-rate", "nclt-rate", "ks", "spitzer", "oracle")

RESULTS_HEADER = ("experiment", "q", "beta", "N", "M_trunc", "reps", "master_seed",
                  "estimator", "value", "stderr", "lower", "upper")

SERIES_HEADER = ("epsilon", "series", "value", "remainder", "ratio_to_limit")

EXIT_OK, EXIT_VALIDATION, EXIT_REGIME, EXIT_NUMERIC = 0, 2, 3, 4

#: Largest horizon the four-index enumeration is run at.
WICK_MAX_N = 64

_DEFAULT_GRID = (256, 512, 1024, 2048, 4096, 8192)


def results_schema() -> str:
    """The fixed results CSV header line (no trailing newline)."""
    return ",".join(RESULTS_HEADER)


# --------------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    q: int
    beta: float
    n_grid: tuple = ()
    reps: int = 1000
    master_seed: int = 0
    trunc_factor: int = DEFAULT_TRUNC_FACTOR
    tol: float = 1e-10
    eps_grid: tuple = ()
    normalize_weights: bool = True
    out_path: Optional[str] = None
    format: str = "csv"
    threads: int = 1
    use_cache: bool = True

    # fields that do not change the computed numbers
    _PRESENTATION = ("out_path", "format", "threads", "use_cache")

    def validate(self) -> ModelParams:
        """Check everything that can be checked before computing."""
        if self.subcommand not in SUBCOMMANDS:
            raise DomainError(f"unknown subcommand {self.subcommand!r}")
        params = ModelParams(self.q, self.beta, self.normalize_weights)
        if any(int(n) != n or n < 1 for n in self.n_grid):
            raise DomainError("n-grid entries must be positive integers")
        if self.reps < 2 and self.subcommand in ("clt-rate", "ks", "oracle"):
            raise DomainError("reps must be >= 2")
        if not (0 <= self.master_seed < 1 << 63):
            raise DomainError("master-seed must be a non-negative 63-bit integer")
        if self.trunc_factor < 1:
            raise DomainError("trunc-factor must be >= 1")
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if any(not (e > 0) for e in self.eps_grid):
            raise DomainError("eps values must be positive")
        if self.format not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.format!r}")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")
        if self.subcommand in ("clt-rate", "nclt-rate") and len(self.n_grid) < 4:
            raise DomainError("rate experiments need at least 4 horizons")
        if self.subcommand == "spitzer" and not self.eps_grid:
            raise DomainError("spitzer needs --eps values")
        if self.subcommand == "oracle" and self.q != 2:
            raise DomainError("the exact oracle exists for q = 2 only")
        # regime checks (exit code 3) come after plain validation
        if self.subcommand in ("clt-rate", "oracle"):
            params.require(Regime.CLT)
        if self.subcommand == "nclt-rate":
            params.require(Regime.NCLT)
        return params

    def canonical(self) -> dict:
        d = dataclasses.asdict(self)
        for k in self._PRESENTATION:
            d.pop(k)
        d["n_grid"] = [int(n) for n in self.n_grid]
        d["eps_grid"] = [float(e) for e in self.eps_grid]
        return d

    def config_hash(self) -> str:
        blob = json.dumps({"config": self.canonical(), "version": __version__},
                          sort_keys=True, separators=(",", ":"))
        return hashlib.blake2b(blob.encode(), digest_size=8).hexdigest()

    @property
    def grid(self) -> List[int]:
        return sorted(int(n) for n in self.n_grid) or list(_DEFAULT_GRID)


# --------------------------------------------------------------------------
# Rows and serialization


@dataclass
class ResultRow:
    experiment: str
    q: int
    beta: float
    N: Optional[int]
    M_trunc: Optional[int]
    reps: Optional[int]
    master_seed: Optional[int]
    estimator: str
    value: float
    stderr: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None

    def as_list(self) -> list:
        return [getattr(self, k) for k in RESULTS_HEADER]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


_INT_COLS = {"q", "N", "M_trunc", "reps", "master_seed"}
_FLOAT_COLS = {"beta", "value", "stderr", "lower", "upper"}


def _parse(col: str, text: str):
    if text == "":
        return None
    if col in _INT_COLS:
        return int(text)
    if col in _FLOAT_COLS:
        return float(text)
    return text


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULTS_HEADER)
    for r in rows:
        w.writerow([_fmt(v) for v in r.as_list()])
    return buf.getvalue()


def read_results_csv(path) -> List[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != RESULTS_HEADER:
            raise DomainError(f"unexpected header {header}")
        return [ResultRow(**{c: _parse(c, t) for c, t in zip(RESULTS_HEADER, line)})
                for line in reader]


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _row(cfg: ExperimentConfig, estimator: str, value: float, N=None, M=None,
         reps=None, seed=None, err: Optional[float] = None) -> ResultRow:
    lo = hi = None
    if err is not None:
        lo, hi = value - err, value + err
    return ResultRow(cfg.subcommand, cfg.q, cfg.beta, N, M, reps, seed, estimator,
                     float(value), None if err is None else float(err), lo, hi)


# --------------------------------------------------------------------------
# Experiments.  Each returns a JSON-able payload {"rows": [...], ...}.


def _truncated_sigma(params: ModelParams, M: int, tol: float):
    cov = build_table(params, M)
    return cov, sigma_qbeta(params, cov, tol)


def _exp_constants(cfg: ExperimentConfig, params: ModelParams) -> dict:
    info = classify_regime(params)
    out: Dict[str, object] = {
        "q": params.q, "beta": params.beta,
        "normalize_weights": params.normalize_weights,
        "regime": info.regime.value,
        "threshold_q_inverse": info.threshold_q_inverse,
        "branch_threshold": info.branch_threshold,
        "clt_exponent": info.clt_exponent,
        "clt_branch": None if info.clt_branch is None else info.clt_branch.value,
        "nclt_exponent": info.nclt_exponent,
    }
    rows = []
    M = None
    if info.regime is Regime.CLT:
        M = cfg.trunc_factor * max(cfg.grid)
        cov, sig = _truncated_sigma(params, M, cfg.tol)
        cs = constant_set(params)
        out.update(sigma_sq=sig.value, sigma_sq_error=sig.error, M_trunc=M)
        rows.append(_row(cfg, "sigma_sq", sig.value, M=M, err=sig.error))
    else:
        cs = constant_set(params)
        ident = cs.d_q_beta * cs.h_q_beta * math.factorial(params.q)
        out.update(d_q_beta=cs.d_q_beta, h_q_beta=cs.h_q_beta,
                   dh_qfact=ident, dh_qfact_is_one=abs(ident - 1) <= 1e-12)
        rows += [_row(cfg, "d_q_beta", cs.d_q_beta), _row(cfg, "h_q_beta", cs.h_q_beta),
                 _row(cfg, "dh_qfact", ident)]
    out.update(c_beta=cs.c_beta, zeta_2beta=cs.zeta_2beta, cov_constant=cs.cov_constant)
    rows = [_row(cfg, "c_beta", cs.c_beta), _row(cfg, "zeta_2beta", cs.zeta_2beta),
            _row(cfg, "cov_constant", cs.cov_constant)] + rows
    return {"rows": rows, "constants": out}


def _exp_rho(cfg: ExperimentConfig, params: ModelParams) -> dict:
    grid = cfg.grid
    M = cfg.trunc_factor * max(grid)
    cov = build_table(params, M, max(grid))
    kappa = cov_constant(params)
    rows = []
    for m in grid:
        rows.append(_row(cfg, "rho", float(cov.rho[m]), N=m, M=M,
                         err=float(cov.ideal_bias_bound[m])))
        rows.append(_row(cfg, "rho_asymptotic_ratio", rho_asymptotic_ratio(cov, m, kappa),
                         N=m, M=M))
    return {"rows": rows, "table_csv": table_to_csv(cov)}


def _exp_clt_rate(cfg: ExperimentConfig, params: ModelParams) -> dict:
    grid = cfg.grid
    M = cfg.trunc_factor * max(grid)
    cov, sig = _truncated_sigma(params, M, cfg.tol)
    sweep = stein_mc_sweep(params, cov, sig.value, grid, cfg.reps, cfg.master_seed,
                           cfg.threads)
    fit, _ = berry_esseen_report(params, grid, cfg.reps, cfg.master_seed, sweep=sweep)
    rows = []
    for N in grid:
        est = sweep[N]
        msq = est.msq
        root = est.bound
        root_se = msq.error / (2 * root) if root > 0 else float("inf")
        common = dict(N=N, M=M, reps=cfg.reps, seed=cfg.master_seed)
        rows.append(_row(cfg, "sqrt_msq", root, err=root_se, **common))
        rows.append(_row(cfg, "msq", msq.value, err=msq.error, **common))
        rows.append(_row(cfg, "mean_T", est.mean_T.value, err=est.mean_T.error, **common))
        rows.append(_row(cfg, "mean_T_exact", mean_T_exact(params, cov, sig.value, N),
                         N=N, M=M))
    return {"rows": rows, "rate_fit": fit.to_dict(), "sigma_sq": sig.value}


def _exp_nclt_rate(cfg: ExperimentConfig, params: ModelParams) -> dict:
    grid = cfg.grid
    rows, points = [], []
    for N in grid:
        ke = kernel_error(params, N)
        points.append((N, ke.err_sq))
        rows += [_row(cfg, "err_sq", ke.err_sq, N=N),
                 _row(cfg, "g_norm_sq", ke.g_norm_sq, N=N),
                 _row(cfg, "g_inner", ke.inner, N=N),
                 _row(cfg, "renorm_second_moment", renorm_second_moment(params, N), N=N)]
    info = classify_regime(params)
    fit = fit_rate(points, info.nclt_exponent)
    return {"rows": rows, "rate_fit": fit.to_dict()}


def _exp_ks(cfg: ExperimentConfig, params: ModelParams) -> dict:
    rows = []
    regime = params.regime
    for N in cfg.grid:
        M = cfg.trunc_factor * N
        common = dict(N=N, M=M, reps=cfg.reps, seed=cfg.master_seed)
        if regime is Regime.CLT:
            cov, sig = _truncated_sigma(params, M, cfg.tol)
            s = s_n_sample(params, N, M, cfg.reps, cfg.master_seed, cfg.threads,
                           weights=cov.weights)
            z = s / math.sqrt(sig.value * N)
            rows.append(_row(cfg, "ks_normal", ks_one_sample(z, special.ndtr), **common))
        else:
            a = hermite_surrogate_sample(params, N, cfg.reps, cfg.master_seed,
                                         cfg.trunc_factor, cfg.threads)
            b = hermite_surrogate_sample(params, N, cfg.reps, cfg.master_seed,
                                         cfg.trunc_factor, cfg.threads, offset=cfg.reps)
            rows.append(_row(cfg, "ks_two_sample", ks_two_sample(a, b), **common))
    return {"rows": rows}


def _exp_spitzer(cfg: ExperimentConfig, params: ModelParams) -> dict:
    rows, series = [], []
    if params.regime is Regime.CLT:
        M = cfg.trunc_factor * max(cfg.grid)
        _, sig = _truncated_sigma(params, M, cfg.tol)
        sigma = math.sqrt(sig.value)
        for eps in cfg.eps_grid:
            f = f1_hat(params, sigma, eps)
            g = g1_hat(params, sigma, eps)
            fr = -f.partial_sum / math.log(eps)
            gs = (eps / sigma) ** 2 * g.partial_sum
            rows += [_row(cfg, f"f1:eps={eps!r}", f.partial_sum, N=f.n_terms, M=M,
                          err=f.tail_remainder_bound),
                     _row(cfg, f"g1:eps={eps!r}", g.partial_sum, N=g.n_terms, M=M,
                          err=g.tail_remainder_bound)]
            series += [[eps, "f1", f.partial_sum, f.tail_remainder_bound, fr / 2.0],
                       [eps, "g1", g.partial_sum, g.tail_remainder_bound, gs]]
        return {"rows": rows, "series": series, "sigma": sigma}
    N_ref = max(cfg.grid)
    M = cfg.trunc_factor * N_ref
    z = hermite_surrogate_sample(params, N_ref, cfg.reps, cfg.master_seed,
                                 cfg.trunc_factor, cfg.threads)
    h = h_qbeta(params, cov_constant(params))
    gamma = nclt_growth(params)
    moment = g2_limit_moment(params, z)
    common = dict(N=N_ref, M=M, reps=cfg.reps, seed=cfg.master_seed)
    for eps in cfg.eps_grid:
        f = f2_hat(params, z, eps, h=h)
        g = g2_hat(params, z, eps, h=h)
        fr = -f.partial_sum / math.log(eps)
        gs = (eps / h) ** (1 / gamma) * g.partial_sum
        rows += [_row(cfg, f"f2:eps={eps!r}", f.partial_sum, err=f.tail_remainder_bound,
                      **common),
                 _row(cfg, f"g2:eps={eps!r}", g.partial_sum, err=g.tail_remainder_bound,
                      **common)]
        series += [[eps, "f2", f.partial_sum, f.tail_remainder_bound, fr * gamma],
                   [eps, "g2", g.partial_sum, g.tail_remainder_bound, gs / moment]]
    rows.append(_row(cfg, "g2_limit_moment", moment, **common))
    return {"rows": rows, "series": series, "h": h}


def _exp_oracle(cfg: ExperimentConfig, params: ModelParams) -> dict:
    grid = sorted(int(n) for n in cfg.n_grid) or [16, 64]
    M = cfg.trunc_factor * max(grid)
    cov, sig = _truncated_sigma(params, M, cfg.tol)
    sweep = stein_mc_sweep(params, cov, sig.value, grid, cfg.reps, cfg.master_seed,
                           cfg.threads)
    rows = []
    for N in grid:
        exact = stein_exact_q2(cov, sig.value, N)
        rows.append(_row(cfg, "msq_exact_trace", exact, N=N, M=M))
        if N <= WICK_MAX_N:
            rows.append(_row(cfg, "msq_wick", stein_wick_q2(cov, sig.value, N), N=N, M=M))
        est = sweep[N]
        rows.append(_row(cfg, "msq_mc", est.msq.value, N=N, M=M, reps=cfg.reps,
                         seed=cfg.master_seed, err=est.msq.error))
        rows.append(_row(cfg, "mean_T_exact", mean_T_exact(params, cov, sig.value, N),
                         N=N, M=M))
    return {"rows": rows}


_EXPERIMENTS = {
    "constants": _exp_constants,
    "rho": _exp_rho,
    "clt-rate": _exp_clt_rate,
    "nclt-rate": _exp_nclt_rate,
    "ks": _exp_ks,
    "spitzer": _exp_spitzer,
    "oracle": _exp_oracle,
}


# --------------------------------------------------------------------------
# Cache


def cache_dir() -> Path:
    env = os.environ.get("STEINLAB_CACHE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "steinlab"


def _encode(payload: dict) -> dict:
    out = dict(payload)
    out["rows"] = [dataclasses.asdict(r) for r in payload["rows"]]
    return out


def _decode(payload: dict) -> dict:
    out = dict(payload)
    out["rows"] = [ResultRow(**r) for r in payload["rows"]]
    return out


def compute(cfg: ExperimentConfig) -> dict:
    """Validated, cached computation of the experiment payload."""
    params = cfg.validate()
    key = cfg.config_hash()
    path = cache_dir() / f"{key}.json"
    if cfg.use_cache and path.exists():
        with open(path) as fh:
            entry = json.load(fh)
        if entry.get("version") == __version__ and entry.get("config") == cfg.canonical():
            return _decode(entry["payload"])
    payload = _EXPERIMENTS[cfg.subcommand](cfg, params)
    entry = {"version": __version__, "config": cfg.canonical(), "hash": key,
             "payload": _encode(payload)}
    try:
        write_atomic(path, _dumps(entry))
    except OSError:
        pass  # an unwritable cache only costs recomputation
    return payload


# --------------------------------------------------------------------------
# Emission


def _sidecar(base: Path, suffix: str) -> Path:
    return base.with_name(base.name + suffix)


def render(cfg: ExperimentConfig, payload: dict) -> Dict[str, str]:
    """Map from output path (or ``"-"`` for stdout) to file contents."""
    rows = payload["rows"]
    base = Path(cfg.out_path) if cfg.out_path else None
    files: Dict[str, str] = {}
    if cfg.format == "json":
        doc = {"experiment": cfg.subcommand, "config": cfg.canonical(),
               "config_hash": cfg.config_hash(), "version": __version__,
               "rows": [dict(zip(RESULTS_HEADER, r.as_list())) for r in rows]}
        for k, v in payload.items():
            if k != "rows":
                doc[k] = v
        files[str(base) if base else "-"] = _dumps(doc)
        return files
    files[str(base) if base else "-"] = rows_to_csv(rows)
    if base is None:
        return files
    if "rate_fit" in payload:
        files[str(_sidecar(base, ".ratefit.json"))] = _dumps(payload["rate_fit"])
    if "constants" in payload:
        files[str(_sidecar(base, ".constants.json"))] = _dumps(payload["constants"])
    if "table_csv" in payload:
        files[str(_sidecar(base, ".table.csv"))] = payload["table_csv"]
    if "series" in payload:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        for line in payload["series"]:
            w.writerow([_fmt(v) for v in line])
        files[str(_sidecar(base, ".series.csv"))] = buf.getvalue()
    return files


def run(cfg: ExperimentConfig, stdout=None) -> int:
    """Execute ``cfg``; returns the process exit code."""
    stdout = stdout or sys.stdout
    try:
        payload = compute(cfg)
        files = render(cfg, payload)
    except RegimeError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except DomainError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for target, text in files.items():
        if target == "-":
            stdout.write(text)
        else:
            write_atomic(target, text)
    return EXIT_OK


# --------------------------------------------------------------------------
# Argument handling


def _int_list(text: str) -> tuple:
    return tuple(int(float(t)) for t in text.replace(" ", "").split(",") if t)


def _float_list(text: str) -> tuple:
    return tuple(float(t) for t in text.replace(" ", "").split(",") if t)


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise DomainError(f"not a boolean: {text!r}")


_FILE_KEYS = {
    "q": int, "beta": float, "n_grid": _int_list, "reps": int, "master_seed": int,
    "trunc_factor": int, "tol": float, "eps_grid": _float_list,
    "normalize_weights": _bool, "out_path": str, "format": str, "threads": int,
    "use_cache": _bool,
}

_ALIASES = {"n-grid": "n_grid", "master-seed": "master_seed", "trunc-factor": "trunc_factor",
            "eps": "eps_grid", "out": "out_path", "no-cache": None}


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = _ALIASES.get(key, key.replace("-", "_"))
            if key not in _FILE_KEYS:
                raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = _FILE_KEYS[key](value)
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="steinlab",
                                description="Long-memory moving average experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--q", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--n-grid", dest="n_grid", type=_int_list,
                   help="comma separated horizons, e.g. 256,512,1024")
    p.add_argument("--reps", type=int)
    p.add_argument("--master-seed", dest="master_seed", type=int)
    p.add_argument("--trunc-factor", dest="trunc_factor", type=int,
                   help="weights kept per unit of the largest horizon (default 64)")
    p.add_argument("--tol", type=float)
    p.add_argument("--eps", dest="eps_grid", type=_float_list,
                   help="comma separated epsilons for the spitzer series")
    p.add_argument("--unnormalized", dest="normalize_weights", action="store_const",
                   const=False, help="keep the raw weights i^-beta")
    p.add_argument("--out", dest="out_path")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--no-cache", dest="use_cache", action="store_const", const=False)
    p.add_argument("--threads", type=int)
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    return p


def config_from_args(argv: Optional[Sequence[str]] = None) -> ExperimentConfig:
    ns = build_parser().parse_args(argv)
    merged = read_config_file(ns.config) if ns.config else {}
    for k, v in vars(ns).items():
        if k in ("config", "subcommand") or v is None:
            continue
        merged[k] = v
    for k in ("q", "beta"):
        if k not in merged:
            raise DomainError(f"--{k} is required")
    return ExperimentConfig(subcommand=ns.subcommand, **merged)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = config_from_args(argv)
    except DomainError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
