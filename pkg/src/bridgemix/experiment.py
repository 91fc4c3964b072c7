"""Experiment orchestration: configuration, the full protocol, report files.

One experiment = one dataset x a grid of exponent settings x a set of
parametrizations x several chains each.  The noise and prior variances are
estimated from the data by evidence optimization, the exponent grid fixes
the prior variance across settings, and every cell runs the same sampler
protocol with shared coefficient starting values across parametrizations.

Outputs (all under the configured directory):

``summary.csv``
    one row per (theta point, parametrization, chain) with the fixed column
    schema dataset,q,parametrization,chain,mean_log_summary,min_ess,
    rhat_max,divergences,wall_time_s;
``kde.csv``
    per-chain kernel density curves of the log posterior summary
    (columns q,parametrization,chain,grid_point,density);
``metadata.txt``
    flat key-value record of seeds, fitted hyperparameters, design-decision
    switches, shared initializations and per-chain auxiliary diagnostics;
``timing_notes.txt``
    wall-time observations (kept out of metadata so that everything except
    explicit wall-time fields is byte-reproducible);
``fig1_summary.svg``, ``fig2_kde.svg``, ``fig3_divergences.svg``.

Every output byte except wall times is determined by (config, seed): chain
streams are keyed by logical indices, cells are run and written in a fixed
order, and floats are serialized with ``repr``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__ as _version
from .datasets import load_dataset
from .diagnostics import ESS_CAP_FACTOR, ess, kde, min_ess_over_params, split_rhat
from .evidence import ThetaPoint, fit_sigma2_tau2
from .exppower import ExpPowerParams, lambda_for_variance
from .mixture import ZolotarevSampler
from .nuts import ChainDraws, ChainFailure, SamplerConfig, nuts_sample
from .svgplot import plot_summary
from .targets import (
    PARAMETRIZATIONS,
    RegressionProblem,
    TargetSpec,
    noncentered_scale,
    pack_state,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "parse_config_file",
    "run_experiment",
]

SUMMARY_COLUMNS = [
    "dataset",
    "q",
    "parametrization",
    "chain",
    "mean_log_summary",
    "min_ess",
    "rhat_max",
    "divergences",
    "wall_time_s",
]

DEFAULT_Q_GRID = (0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8)


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to CLI exit code 1)."""


@dataclass(frozen=True)
class ExperimentConfig:
    data: str
    response: str = "y"
    standardize: bool = False
    params: tuple[str, ...] = PARAMETRIZATIONS
    chains: int = 10
    warmup: int = 1000
    retain: int = 1000
    seed: int = 0
    out: str = "experiment_out"
    q_list: tuple[float, ...] = DEFAULT_Q_GRID
    plot_q: float = 0.2
    evidence_half_quadratic: bool = False

    def __post_init__(self) -> None:
        if not self.params:
            raise ConfigError("need at least one parametrization")
        bad = [p for p in self.params if p not in PARAMETRIZATIONS]
        if bad:
            raise ConfigError(
                f"unknown parametrizations {bad}; options: {PARAMETRIZATIONS}"
            )
        if not self.q_list:
            raise ConfigError("q_list must be nonempty")
        if any(not (0.0 < q < 2.0) for q in self.q_list):
            raise ConfigError("q values must lie in (0, 2)")
        if self.chains < 1 or self.warmup < 0 or self.retain < 1:
            raise ConfigError("chains/warmup/retain out of range")


_BOOL_KEYS = {"standardize", "evidence_half_quadratic"}
_INT_KEYS = {"chains", "warmup", "retain", "seed"}
_FLOAT_KEYS = {"plot_q"}
_LIST_KEYS = {"params", "q_list"}
_STR_KEYS = {"data", "response", "out"}
_ALL_KEYS = _BOOL_KEYS | _INT_KEYS | _FLOAT_KEYS | _LIST_KEYS | _STR_KEYS


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}")


def parse_config_file(path) -> dict:
    """Parse the flat ``key = value`` config format into override kwargs."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    out: dict = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            if key in _BOOL_KEYS:
                out[key] = _parse_bool(raw)
            elif key in _INT_KEYS:
                out[key] = int(raw)
            elif key in _FLOAT_KEYS:
                out[key] = float(raw)
            elif key == "params":
                out[key] = tuple(p.strip() for p in raw.split(",") if p.strip())
            elif key == "q_list":
                out[key] = tuple(float(v) for v in raw.split(",") if v.strip())
            else:
                out[key] = raw
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return out


@dataclass
class ExperimentReport:
    out_dir: Path
    summary_path: Path
    kde_path: Path
    metadata_path: Path
    svg_paths: list[Path]
    rows: list[dict]
    theta_grid: list[ThetaPoint]
    sigma2_hat: float
    tau2_hat: float
    n_failures: int
    all_failed: bool


def _subseed(master: int, *key: int) -> int:
    ss = np.random.SeedSequence(entropy=master, spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _shared_inits(
    master_seed: int,
    theta_index: int,
    chains: int,
    n2: int,
    theta: ThetaPoint,
):
    """Per-chain starting states, shared across parametrizations.

    The coefficient start is one uniform(-2, 2) draw per chain; the latent
    scales and angles are drawn from their priors; the non-centered start
    reproduces the shared coefficients through the inverse recovery
    transform.
    """
    ep = ExpPowerParams(q=theta.q, lam=theta.lam)
    zolo = ZolotarevSampler(theta.q)
    inits: dict[str, list[np.ndarray]] = {p: [] for p in PARAMETRIZATIONS}
    z2_starts = []
    for c in range(chains):
        rng = np.random.Generator(
            np.random.Philox(
                np.random.SeedSequence(
                    entropy=master_seed, spawn_key=(1, theta_index, c)
                )
            )
        )
        z2 = rng.uniform(-2.0, 2.0, size=n2)
        xi = rng.standard_gamma((2.0 + theta.q) / (2.0 * theta.q), size=n2)
        delta = zolo.sample(n2, rng)
        w = z2 / noncentered_scale(ep, xi, delta)
        z2_starts.append(z2)
        inits["naive"].append(pack_state("naive", z2))
        inits["centered"].append(pack_state("centered", z2, xi, delta))
        inits["noncentered"].append(pack_state("noncentered", w, xi, delta))
    return z2_starts, inits


def _run_cell(problem, theta, parametrization, inits, sampler_config):
    spec = TargetSpec(
        problem=problem,
        ep=ExpPowerParams(q=theta.q, lam=theta.lam),
        parametrization=parametrization,
    )
    results = []
    for init in inits:
        try:
            results.append(nuts_sample(spec, sampler_config, init))
        except Exception as exc:  # per-chain failure, run continues
            results.append(ChainFailure(error=f"{type(exc).__name__}: {exc}"))
    return results


def _cell_rhat_max(chain_results) -> float:
    dra = [r.draws for r in chain_results if isinstance(r, ChainDraws)]
    if len(dra) < 2:
        return math.nan
    values = []
    for j in range(dra[0].shape[1]):
        values.append(split_rhat([d[:, j] for d in dra]))
    values = [v for v in values if not math.isnan(v)]
    return max(values) if values else math.nan


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run the full protocol and write the report files."""
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    y, X, colnames = load_dataset(config.data, config.response, config.standardize)
    dataset_name = Path(config.data).stem

    sigma2_hat, tau2_hat = fit_sigma2_tau2(
        y, X, half_quadratic=config.evidence_half_quadratic
    )
    grid = [
        ThetaPoint(sigma2=sigma2_hat, lam=lambda_for_variance(q, tau2_hat), q=q)
        for q in config.q_list
    ]
    problem = RegressionProblem(y=y, X=X, sigma2=sigma2_hat)
    n2 = problem.n2

    meta: list[tuple[str, str]] = [
        ("version", _version),
        ("dataset", dataset_name),
        ("data_path", str(config.data)),
        ("response", config.response),
        ("standardize", repr(config.standardize)),
        ("m", repr(problem.m)),
        ("n2", repr(n2)),
        ("covariates", ",".join(colnames)),
        ("seed", repr(config.seed)),
        ("chains", repr(config.chains)),
        ("warmup", repr(config.warmup)),
        ("retain", repr(config.retain)),
        ("sigma2_hat", repr(sigma2_hat)),
        ("tau2_hat", repr(tau2_hat)),
        ("evidence_half_quadratic", repr(config.evidence_half_quadratic)),
        ("q_list", ",".join(repr(q) for q in config.q_list)),
        ("parametrizations", ",".join(config.params)),
        ("rng", "philox(seed, spawn_key=(stream, theta_index, chain))"),
        ("ess_estimator", "per-chain Geyer initial monotone sequence, "
                          "unconstrained coordinates"),
        ("ess_report_cap", repr(ESS_CAP_FACTOR)),
        ("divergence_threshold", repr(1000.0)),
        ("target_accept", repr(0.8)),
        ("max_tree_depth", repr(10)),
    ]
    for k, theta in enumerate(grid):
        meta.append((f"lambda.q{theta.q!r}", repr(theta.lam)))

    rows: list[dict] = []
    kde_rows: list[tuple] = []
    timing_notes: list[str] = []
    n_failures = 0
    n_cells_failed = 0
    cell_walls: dict[tuple[float, str], float] = {}

    for k, theta in enumerate(grid):
        z2_starts, all_inits = _shared_inits(
            config.seed, k, config.chains, n2, theta
        )
        for c, z2 in enumerate(z2_starts):
            meta.append(
                (f"init_z2.q{theta.q!r}.chain{c}",
                 ",".join(repr(v) for v in z2))
            )
        for par in config.params:
            sampler_config = SamplerConfig(
                warmup_iters=config.warmup,
                retain_iters=config.retain,
                seed=_subseed(config.seed, 2, k, PARAMETRIZATIONS.index(par)),
                chains=config.chains,
            )
            results = _run_cell(problem, theta, par, all_inits[par], sampler_config)
            rhat_max = _cell_rhat_max(results)
            cell_wall = 0.0
            ok_in_cell = 0
            for c, res in enumerate(results):
                if isinstance(res, ChainFailure):
                    n_failures += 1
                    meta.append((f"failure.q{theta.q!r}.{par}.chain{c}", res.error))
                    rows.append({
                        "dataset": dataset_name,
                        "q": repr(theta.q),
                        "parametrization": par,
                        "chain": str(c),
                        "mean_log_summary": "nan",
                        "min_ess": "nan",
                        "rhat_max": "nan",
                        "divergences": "nan",
                        "wall_time_s": "nan",
                    })
                    continue
                ok_in_cell += 1
                cell_wall += res.wall_time
                min_ess = min_ess_over_params(res.draws, cap=True)
                rows.append({
                    "dataset": dataset_name,
                    "q": repr(theta.q),
                    "parametrization": par,
                    "chain": str(c),
                    "mean_log_summary": repr(float(res.log_summary.mean())),
                    "min_ess": repr(float(min_ess)),
                    "rhat_max": repr(float(rhat_max)),
                    "divergences": str(res.divergences),
                    "wall_time_s": repr(float(res.wall_time)),
                })
                meta.append(
                    (f"z2_min_ess.q{theta.q!r}.{par}.chain{c}",
                     repr(float(min(ess(res.z2_draws[:, j])
                                    for j in range(n2)))))
                )
                grid_pts, dens = kde(res.log_summary)
                for gp, dv in zip(grid_pts, dens):
                    kde_rows.append(
                        (repr(theta.q), par, str(c), repr(float(gp)),
                         repr(float(dv)))
                    )
            if ok_in_cell == 0:
                n_cells_failed += 1
            cell_walls[(theta.q, par)] = cell_wall

    # soft expectation: auxiliary variables cost time at high q
    for q in config.q_list:
        if q >= 1.6 and "naive" in config.params and "noncentered" in config.params:
            tn = cell_walls.get((q, "naive"))
            tnc = cell_walls.get((q, "noncentered"))
            if tn is not None and tnc is not None:
                note = (f"q={q!r}: naive wall {tn:.2f}s vs noncentered "
                        f"{tnc:.2f}s")
                if tn >= tnc:
                    note += "  [warning: expected naive < noncentered]"
                timing_notes.append(note)

    summary_path = out_dir / "summary.csv"
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)

    kde_path = out_dir / "kde.csv"
    with open(kde_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q", "parametrization", "chain", "grid_point", "density"])
        writer.writerows(kde_rows)

    metadata_path = out_dir / "metadata.txt"
    metadata_path.write_text(
        "".join(f"{k} = {v}\n" for k, v in meta), encoding="utf-8"
    )
    (out_dir / "timing_notes.txt").write_text(
        "".join(n + "\n" for n in timing_notes), encoding="utf-8"
    )

    svg_paths = plot_summary(summary_path, kde_path, out_dir, config.plot_q)

    total_cells = len(grid) * len(config.params)
    return ExperimentReport(
        out_dir=out_dir,
        summary_path=summary_path,
        kde_path=kde_path,
        metadata_path=metadata_path,
        svg_paths=svg_paths,
        rows=rows,
        theta_grid=grid,
        sigma2_hat=sigma2_hat,
        tau2_hat=tau2_hat,
        n_failures=n_failures,
        all_failed=(n_cells_failed == total_cells),
    )
