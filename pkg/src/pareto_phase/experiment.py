"""Replicated experiments, sweeps over d, oracle reports and their persistence.

Replicates are the unit of parallelism.  Replicate ``i`` draws from
``StreamSpec(master_seed, i)`` only, and results are gathered in replicate
order, so the payload does not depend on the number of workers.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from . import oracle
from .diagnostics import (
    EmpiricalDistribution,
    TestVerdict,
    chi_square_poisson,
    ks_projected_marginal,
    mean_variance_summary,
    tv_distance,
    void_probability_check,
)
from .dominance import BoxRegion, ProjectionSpec, SampleMatrix, box_statistics, dominance_counts
from .errors import ConfigError, InvalidArgumentError, SpecParseError
from .sampling import (
    StreamSpec,
    coupled_samples,
    draw_coordinates,
    poissonized_sample,
    sample_uniform,
)

MODES = ("simulate", "oracle", "sweep", "stein-chen")
FORMATS = ("json", "csv")
SCHEMA_VERSION = 1
RUN_SETTINGS = ("workers", "out", "fmt")

# Acceptance-style allowances used by the default verdicts.
TV_SAMPLING_ALLOWANCE = 0.02
HIGHER_LAYER_MEAN_MAX = 0.02


# ------------------------------------------------------------------ parsing

def parse_box_spec(text: str) -> BoxRegion:
    """``"0:0.5,0:1"`` -> the box [0, 0.5] x [0, 1]."""
    bounds = []
    for token in "".join(text.split()).split(","):
        parts = token.split(":")
        if len(parts) != 2:
            raise SpecParseError(f"box interval {token!r} is not of the form a:b", token)
        try:
            lo, hi = float(parts[0]), float(parts[1])
        except ValueError:
            raise SpecParseError(f"box interval {token!r} has a non-numeric bound", token) from None
        if not (0.0 <= lo < hi <= 1.0):
            raise SpecParseError(f"box interval {token!r} needs 0 <= a < b <= 1", token)
        bounds.append((lo, hi))
    return BoxRegion(tuple(bounds))


def parse_proj_spec(text: str) -> ProjectionSpec:
    """``"1,3,7"`` -> coordinates 1, 3 and 7 (1-based, strictly increasing)."""
    indices = []
    for token in "".join(text.split()).split(","):
        if not token.isdigit() or int(token) < 1:
            raise SpecParseError(f"projection index {token!r} is not a positive integer", token)
        k = int(token)
        if indices and k <= indices[-1]:
            raise SpecParseError(f"projection index {token!r} does not increase", token)
        indices.append(k)
    return ProjectionSpec(tuple(indices))


# ------------------------------------------------------------------- config

@dataclass
class ExperimentConfig:
    mode: str = "simulate"
    n: Optional[float] = None  # the intensity when poissonized
    d: Optional[int] = None
    regime: Optional[str] = None  # "star" | "starstar"
    c: float = 0.0
    r_max: int = 3
    reps: int = 1
    master_seed: int = 0
    proj: tuple = (1,)
    box: Optional[tuple] = None  # ((a, b), ...); None is the unit box
    poissonized: bool = False
    workers: int = 1
    d_min: Optional[int] = None
    d_max: Optional[int] = None
    coupled: bool = True
    points_cap: int = 64
    out: Optional[str] = None
    fmt: str = "json"

    def projection(self) -> ProjectionSpec:
        return ProjectionSpec(tuple(self.proj))

    def region(self) -> BoxRegion:
        if self.box is None:
            return BoxRegion.unit(len(self.proj))
        return BoxRegion(tuple(tuple(b) for b in self.box))

    def resolve(self) -> "ExperimentConfig":
        """Validate and pin ``d`` (from the regime if needed); returns a new config."""
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.n is None:
            raise ConfigError("n is required")
        if self.poissonized:
            if not self.n > 0:
                raise ConfigError("intensity must be positive")
        elif self.n != int(self.n) or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n}")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.r_max < 0:
            raise ConfigError("r_max must be non-negative")
        try:
            proj = self.projection()
            box = self.region()
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from None
        if box.m != proj.m:
            raise ConfigError(f"box has dimension {box.m} but {proj.m} coordinates are projected")
        n = self.n if self.poissonized else int(self.n)
        d = self.d
        if self.mode == "sweep":
            if self.d_min is None or self.d_max is None:
                raise ConfigError("sweep needs d_min and d_max")
            if not 2 <= self.d_min <= self.d_max:
                raise ConfigError("sweep range must satisfy 2 <= d_min <= d_max")
            d = self.d_max
        elif self.regime is not None:
            try:
                if self.regime == "star":
                    d = oracle.round_dim(oracle.critical_dim_star(n, self.c))
                elif self.regime == "starstar":
                    d = oracle.round_dim(oracle.critical_dim_starstar(n, self.c))
                else:
                    raise ConfigError(f"unknown regime {self.regime!r}")
            except InvalidArgumentError as exc:
                raise ConfigError(f"cannot resolve regime: {exc}") from None
        if d is None:
            raise ConfigError("give d or a regime")
        if d < 1:
            raise ConfigError(f"resolved d={d} is below 1")
        if proj.indices[-1] > (self.d_min if self.mode == "sweep" else d):
            raise ConfigError(f"projection index {proj.indices[-1]} exceeds d")
        return replace(self, n=n, d=int(d), proj=proj.indices, box=box.bounds)

    def to_dict(self, run_settings: bool = True) -> dict:
        """Config echo; ``run_settings=False`` drops fields that cannot affect results."""
        out = asdict(self)
        if not run_settings:
            for key in RUN_SETTINGS:
                out.pop(key)
        out["proj"] = list(self.proj)
        out["box"] = None if self.box is None else [list(b) for b in self.box]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        data["proj"] = tuple(data.get("proj", (1,)))
        if data.get("box") is not None:
            data["box"] = tuple(tuple(b) for b in data["box"])
        return cls(**data)


# ----------------------------------------------------------------- records

@dataclass
class ReplicateRecord:
    index: int
    sample_size: int
    nonpareto: int
    layers: list  # K^(1), ..., K^(r_max)
    S: int
    T: int
    void: bool
    atoms: list  # projections of non-Pareto points, at most points_cap

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentSummary:
    config: ExperimentConfig
    records: list
    aggregates: dict
    meta: dict = field(default_factory=dict)

    def payload(self) -> dict:
        """Result content without timing metadata."""
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(run_settings=False),
            "records": [r.to_dict() for r in self.records],
            "aggregates": self.aggregates,
        }


def simulate_replicate(cfg: ExperimentConfig, index: int) -> ReplicateRecord:
    stream = StreamSpec(cfg.master_seed, index)
    if cfg.poissonized:
        sample = poissonized_sample(cfg.n, cfg.d, stream)
    else:
        sample = sample_uniform(int(cfg.n), cfg.d, stream)
    summary = dominance_counts(sample)
    proj = cfg.projection()
    stats_ = box_statistics(sample, proj, cfg.region(), summary)
    counts = summary.counts
    layers = [int(np.count_nonzero(counts == r)) for r in range(1, cfg.r_max + 1)]
    atoms = proj.apply(sample.coords[counts > 0])[: cfg.points_cap]
    return ReplicateRecord(
        index=index,
        sample_size=sample.n,
        nonpareto=summary.nonpareto,
        layers=layers,
        S=stats_.S,
        T=stats_.T,
        void=stats_.T == 0,
        atoms=atoms.tolist(),
    )


def _simulate_chunk(cfg: ExperimentConfig, start: int, stop: int) -> list:
    return [simulate_replicate(cfg, i) for i in range(start, stop)]


def _chunks(reps: int, workers: int) -> list:
    size = max(1, math.ceil(reps / (workers * 4)))
    return [(s, min(reps, s + size)) for s in range(0, reps, size)]


def _map_replicates(func, cfg: ExperimentConfig) -> list:
    if cfg.workers == 1:
        return func(cfg, 0, cfg.reps)
    bounds = _chunks(cfg.reps, cfg.workers)
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        parts = pool.map(func, [cfg] * len(bounds), *zip(*bounds))
        return [rec for part in parts for rec in part]


# --------------------------------------------------------------- aggregates

def _band_se(se: float, exact: float, n: float, count: int) -> float:
    """Standard error for comparing a mean with ``exact``.

    When no variation was observed (rare events), the empirical SE of 0 says
    nothing; fall back to the bound Var X <= n E X, valid for counts 0 <= X <= n.
    """
    if se > 0 or exact <= 0:
        return se
    return math.sqrt(max(n, 1.0) * exact / count)


def _verdict(name, statistic, threshold, passed, details="") -> dict:
    return TestVerdict(name, statistic, threshold, passed, details=details).to_dict()


def aggregate(cfg: ExperimentConfig, records: list) -> dict:
    """Summaries, oracle values and verdicts; a pure function of the records."""
    n, d = cfg.n, cfg.d
    box = cfg.region()
    report = oracle.oracle_report(n, d, cfg.r_max, box, cfg.poissonized)
    nonpareto = [r.nonpareto for r in records]
    dist = EmpiricalDistribution.from_values(nonpareto)
    out = {
        "nonpareto_distribution": {str(k): v for k, v in dist.counts.items()},
        "oracle": report.to_dict(),
        "verdicts": {},
    }
    verdicts = out["verdicts"]
    target = report.exact_E_nonpareto
    s_full = (oracle.expected_S_poissonized(n, d) if cfg.poissonized
              else oracle.expected_S(n, d))

    if len(records) >= 2:
        mv = mean_variance_summary(nonpareto)
        out["nonpareto"] = mv.to_dict()
        out["layers"] = {
            str(r): mean_variance_summary([rec.layers[r - 1] for rec in records]).to_dict()
            for r in range(1, cfg.r_max + 1)
        }
        out["S"] = mean_variance_summary([r.S for r in records]).to_dict()
        out["T"] = mean_variance_summary([r.T for r in records]).to_dict()
        se = _band_se(mv.se_mean, target, n, mv.count)
        verdicts["mean_vs_oracle"] = _verdict(
            "mean_vs_oracle", abs(mv.mean - target), 3 * se,
            abs(mv.mean - target) <= 3 * se, f"oracle E(n-K)={target!r}")
        verdicts["variance_vs_oracle"] = _verdict(
            "variance_vs_oracle", abs(mv.variance - target), 3 * mv.se_variance,
            abs(mv.variance - target) <= 3 * mv.se_variance, f"oracle E(n-K)={target!r}")
        verdicts["mean_vs_variance"] = _verdict(
            "mean_vs_variance", abs(mv.mean - mv.variance), 3 * mv.se_difference,
            abs(mv.mean - mv.variance) <= 3 * mv.se_difference)
        if cfg.r_max >= 1:
            higher = mean_variance_summary([r.nonpareto - r.layers[0] for r in records])
            out["higher_layers"] = higher.to_dict()
            verdicts["higher_layers_mean"] = _verdict(
                "higher_layers_mean", higher.mean, HIGHER_LAYER_MEAN_MAX,
                higher.mean <= HIGHER_LAYER_MEAN_MAX, "mean of sum_{r>=2} K^(r)")

    if target > 0:
        verdicts["chi_square"] = chi_square_poisson(dist, target, level=0.01).to_dict()
    if s_full > 0 and report.agg_bound is not None:
        full_bound = oracle.agg_bound(n, d)
        tv = tv_distance(dist, s_full)
        limit = full_bound.total + TV_SAMPLING_ALLOWANCE
        out["tv_distance"] = tv
        verdicts["tv_vs_agg"] = _verdict(
            "tv_vs_agg", tv, limit, tv <= limit,
            f"Poisson({s_full!r}); AGG total {full_bound.total!r} + {TV_SAMPLING_ALLOWANCE}")

    pooled = [a for rec in records for a in rec.atoms]
    if pooled:
        pooled = np.asarray(pooled)
        for j, k in enumerate(cfg.proj):
            verdicts[f"ks_coord_{k}"] = ks_projected_marginal(pooled[:, j], 0.05).to_dict()
    out["atoms_pooled"] = len(pooled)

    c_star = report.offsets.c_star
    out["void_frequency"] = sum(r.void for r in records) / len(records)
    if len(records) >= 100 and c_star is not None:
        verdicts["void_probability"] = void_probability_check(
            [r.void for r in records], box, c_star).to_dict()
    return out


def run_simulation(config: ExperimentConfig) -> ExperimentSummary:
    cfg = config.resolve()
    if cfg.mode not in ("simulate", "stein-chen"):
        cfg = replace(cfg, mode="simulate")
    start = time.perf_counter()
    records = _map_replicates(_simulate_chunk, cfg)
    aggregates = aggregate(cfg, records)
    meta = {"elapsed_seconds": time.perf_counter() - start, "workers": cfg.workers}
    return ExperimentSummary(cfg, records, aggregates, meta)


# ------------------------------------------------------------------- sweep

@dataclass
class SweepRecord:
    index: int
    nonpareto: list  # one entry per d in the sweep
    violations: int

    def to_dict(self) -> dict:
        return asdict(self)


def _nesting_violations(prev_counts: np.ndarray, counts: np.ndarray) -> int:
    # Higher dimension: non-Pareto set shrinks and every count can only drop.
    bad_set = np.count_nonzero((counts > 0) & (prev_counts == 0))
    bad_count = np.count_nonzero(counts > prev_counts)
    return int(bad_set + bad_count)


def sweep_replicate(cfg: ExperimentConfig, index: int) -> SweepRecord:
    dims = list(range(cfg.d_min, cfg.d_max + 1))
    stream = StreamSpec(cfg.master_seed, index)
    nonpareto, violations, prev = [], 0, None
    if cfg.coupled:
        pool = coupled_samples(int(cfg.n), dims, stream)
    else:
        gen = stream.generator()
    for d in dims:
        if cfg.coupled:
            sample = pool.at(d)
        else:
            sample = SampleMatrix(draw_coordinates(gen, int(cfg.n), d))
        counts = dominance_counts(sample).counts
        nonpareto.append(int(np.count_nonzero(counts)))
        if cfg.coupled and prev is not None:
            violations += _nesting_violations(prev, counts)
        prev = counts
    return SweepRecord(index, nonpareto, violations)


def _sweep_chunk(cfg: ExperimentConfig, start: int, stop: int) -> list:
    return [sweep_replicate(cfg, i) for i in range(start, stop)]


@dataclass
class SweepResult:
    config: ExperimentConfig
    rows: list
    records: list
    violations: int
    meta: dict = field(default_factory=dict)

    def payload(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(run_settings=False),
            "rows": self.rows,
            "records": [r.to_dict() for r in self.records],
            "violations": self.violations,
        }


def sweep_rows(cfg: ExperimentConfig, records: list) -> list:
    n = int(cfg.n)
    rows = []
    for j, d in enumerate(range(cfg.d_min, cfg.d_max + 1)):
        values = [rec.nonpareto[j] for rec in records]
        offsets = oracle.implied_offsets(n, d)
        mean = float(np.mean(values))
        se = float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else math.nan
        exact = oracle.expected_nonpareto(n, d)
        band = _band_se(se, exact, n, len(values)) if se == se else se
        rows.append({
            "d": d,
            "c_star": offsets.c_star,
            "c_starstar": offsets.c_starstar,
            "empirical_mean": mean,
            "empirical_se": se,
            "oracle_mean": exact,
            "limit_mean": None if offsets.c_star is None else oracle.limit_nonpareto_mean(offsets.c_star),
            "mean_within_3se": bool(abs(mean - exact) <= 3 * band) if se == se else None,
        })
    return rows


def run_sweep(config: ExperimentConfig) -> SweepResult:
    cfg = replace(config, mode="sweep").resolve()
    if cfg.poissonized:
        raise ConfigError("sweeps use a fixed sample size")
    start = time.perf_counter()
    records = _map_replicates(_sweep_chunk, cfg)
    rows = sweep_rows(cfg, records)
    total = sum(r.violations for r in records)
    meta = {"elapsed_seconds": time.perf_counter() - start, "workers": cfg.workers}
    return SweepResult(cfg, rows, records, total, meta)


# ------------------------------------------------------------ oracle modes

def run_oracle(config: ExperimentConfig) -> dict:
    cfg = replace(config, mode="oracle").resolve()
    report = oracle.oracle_report(cfg.n, cfg.d, cfg.r_max, cfg.region(), cfg.poissonized)
    return {"schema_version": SCHEMA_VERSION, "config": cfg.to_dict(), "oracle": report.to_dict()}


def run_stein_chen(config: ExperimentConfig) -> dict:
    """AGG certificate for S(U) and the void probabilities it controls."""
    cfg = replace(config, mode="stein-chen").resolve()
    n, d, box = cfg.n, cfg.d, cfg.region()
    if n < 2:
        raise ConfigError("the Stein-Chen bound needs n >= 2")
    bound = oracle.agg_bound(n, d, box)
    offsets = oracle.implied_offsets(n, d)
    payload = {
        "b1": bound.b1,
        "b2": bound.b2,
        "total": bound.total,
        "poisson_mean": bound.poisson_mean,
        "poisson_void_probability": math.exp(-bound.poisson_mean),
        "c_star": offsets.c_star,
        "limit_intensity_mass": oracle.intensity_mass(box, offsets.c_star),
        "limit_void_probability": math.exp(-oracle.intensity_mass(box, offsets.c_star)),
    }
    return {"schema_version": SCHEMA_VERSION, "config": cfg.to_dict(), "stein_chen": payload}


# ------------------------------------------------------------- persistence

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(payload: dict) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats, NaN as null."""
    return json.dumps(_clean(payload), sort_keys=True, indent=1, allow_nan=False)


def write_json(payload: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(payload))
        fh.write("\n")


RECORD_COLUMNS = ("index", "sample_size", "nonpareto", "S", "T", "void", "atoms")


# CSV writers take an open text stream (opened with newline="").

def write_records_csv(summary: ExperimentSummary, fh) -> None:
    """One row per replicate; ``atoms`` holds a JSON list of projected points."""
    r_max = summary.config.r_max
    header = list(RECORD_COLUMNS[:3]) + [f"K{r}" for r in range(1, r_max + 1)] + list(RECORD_COLUMNS[3:])
    w = csv.writer(fh)
    w.writerow(header)
    for rec in summary.records:
        w.writerow([rec.index, rec.sample_size, rec.nonpareto, *rec.layers,
                    rec.S, rec.T, int(rec.void), json.dumps(rec.atoms)])


def read_records_csv(fh) -> list:
    records = []
    for row in csv.DictReader(fh):
        layer_keys = sorted((k for k in row if k.startswith("K") and k[1:].isdigit()),
                            key=lambda k: int(k[1:]))
        records.append(ReplicateRecord(
            index=int(row["index"]),
            sample_size=int(row["sample_size"]),
            nonpareto=int(row["nonpareto"]),
            layers=[int(row[k]) for k in layer_keys],
            S=int(row["S"]),
            T=int(row["T"]),
            void=bool(int(row["void"])),
            atoms=json.loads(row["atoms"]),
        ))
    return records


def write_rows_csv(rows: list, fh) -> None:
    if not rows:
        raise InvalidArgumentError("no rows to write")
    w = csv.DictWriter(fh, fieldnames=list(rows[0]))
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if v is None else v) for k, v in row.items()})


def flatten(payload: dict, prefix: str = "") -> list:
    """Nested dict -> sorted ``(dotted.key, value)`` pairs for key/value CSV output."""
    items = []
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            items.extend(flatten(value, name + "."))
        else:
            items.append((name, value))
    return sorted(items)


def write_key_value_csv(payload: dict, fh) -> None:
    w = csv.writer(fh)
    w.writerow(["key", "value"])
    for key, value in flatten(_clean(payload)):
        if isinstance(value, list):
            value = json.dumps(value)
        w.writerow([key, "" if value is None else value])


def load_summary(path) -> ExperimentSummary:
    """Read a JSON simulation result back into records and config."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    cfg = ExperimentConfig.from_dict(data["config"])
    records = [ReplicateRecord(**r) for r in data["records"]]
    return ExperimentSummary(cfg, records, data["aggregates"], data.get("meta", {}))


def ensure_writable(path) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(directory) or not os.access(directory, os.W_OK):
        raise OSError(f"cannot write to {path}")
