"""End-to-end orchestration: configuration, per-stage artifacts, manifest, metrics and ablations.

Each stage reads the artifacts of earlier stages from a run directory and
writes its own, so stages can be run one at a time from the command line or
all together through :func:`run_pipeline`.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from . import checkpoint
from .augment import (
    assemble_corpus,
    baseline_corpus_windows,
    corpus_hash,
    generate,
    load_corpus,
    make_plan,
    save_corpus,
)
from .dataset import SplitSpec, TimeSeriesDataset, load_csv, make_splits, windows
from .errors import ConfigError, StageError, UndefinedMetricError
from .forecaster import EvalReport, TrainConfig, build_model_zoo, evaluate, train_forecaster
from .ranking import rank_and_split, read_rank_csv, write_rank_csv, zoo_variances, group_ab_experiment
from .reinforce import ReinforceConfig, run_stage_b, write_trace_csv
from .synthetic import linear_trend, multi_sinusoid, noisy_regime
from .vmae import VmaeConfig, train_vmae

log = logging.getLogger(__name__)

ARMS = ("original", "reaugment", "reaugment_no_rl", "gaussian", "convolve", "standard")
SYNTHETIC = {"multi_sinusoid": multi_sinusoid, "linear_trend": linear_trend, "noisy_regime": noisy_regime}


@dataclass
class RunConfig:
    """Every knob of a run. Defaults are the reference settings."""

    # data
    dataset: str | None = None
    timestamp_column: str | None = None
    feature_columns: list[str] | None = None
    synthetic: dict | None = None
    partition: tuple[int, int, int] = (3500, 500, 1000)
    mode: str = "fewshot"
    fewshot_fraction: float = 0.1
    lookback: int = 96
    horizon: int = 96
    window_len: int | None = None
    # model zoo / ranking
    K: int = 4
    anchor_fraction: float = 0.5
    include_holdout: bool = False
    backbone: str = "linear"
    # VMAE
    mask_rate: float = 0.3
    beta: float = 0.1
    d_z: int = 16
    hidden: int = 128
    feature_dim: int = 128
    batch_size: int = 32
    vmae_epochs: int = 100
    vmae_patience: int = 5
    vmae_lr: float = 1e-3
    # REINFORCE
    alpha: float = 1e-3
    eta: float = 0.01
    reinforce_steps: int = 500
    deviation_floor: float = 1e-8
    reward_baseline: bool = False
    # augmentation / stage C
    augment_factor: int = 3
    shift_timestamps: bool = True
    gaussian_sigma: float = 0.1
    convolve_kernel: int = 5
    forecaster_epochs: int = 50
    forecaster_patience: int = 3
    forecaster_lr: float = 1e-3
    forecaster_hidden: int = 128
    arms: list[str] = field(default_factory=lambda: ["original", "reaugment"])
    raw_scale_metrics: bool = False
    # seeds: `seed` drives forecasters and the zoo, `augment_seed` the augmentor
    seed: int = 0
    augment_seed: int | None = None
    seeds: list[int] | None = None

    def __post_init__(self):
        self.partition = tuple(int(p) for p in self.partition)
        if self.window_len is None:
            self.window_len = self.lookback + self.horizon

    @property
    def aug_seed(self) -> int:
        return self.seed if self.augment_seed is None else self.augment_seed

    def validate(self) -> "RunConfig":
        if self.K < 2:
            raise ConfigError(f"K must be >= 2, got {self.K}")
        if self.window_len != self.lookback + self.horizon:
            raise ConfigError("window_len must equal lookback + horizon")
        if not 0.0 < self.anchor_fraction <= 1.0:
            raise ConfigError("anchor_fraction must be in (0, 1]")
        if not 0.0 <= self.mask_rate <= 1.0:
            raise ConfigError("mask_rate must be in [0, 1]")
        if min(self.alpha, self.eta, self.deviation_floor) <= 0 or self.beta < 0:
            raise ConfigError("alpha, eta, deviation_floor must be > 0 and beta >= 0")
        if self.augment_factor < 1:
            raise ConfigError("augment_factor must be >= 1")
        if self.dataset is None and self.synthetic is None:
            raise ConfigError("config needs either 'dataset' (CSV path) or 'synthetic'")
        if self.synthetic is not None and self.synthetic.get("kind", "multi_sinusoid") not in SYNTHETIC:
            raise ConfigError(f"unknown synthetic kind {self.synthetic.get('kind')!r}")
        bad = [a for a in self.arms if a not in ARMS]
        if bad:
            raise ConfigError(f"unknown arms {bad}; choose from {ARMS}")
        SplitSpec(self.mode, self.fewshot_fraction)
        return self

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["partition"] = list(self.partition)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        data = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a mapping")
        return cls.from_dict(data)

    def with_overrides(self, overrides: dict) -> "RunConfig":
        d = self.to_dict()
        if "window_len" not in overrides and self.window_len == self.lookback + self.horizon:
            d["window_len"] = None  # derived; recompute from the new lookback/horizon
        d.update(overrides)
        return RunConfig.from_dict(d)

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.forecaster_epochs, self.forecaster_patience, self.batch_size,
                           self.forecaster_lr, self.forecaster_hidden)

    def vmae_config(self, channels: int) -> VmaeConfig:
        return VmaeConfig(self.window_len, channels, self.d_z, self.hidden, self.feature_dim,
                          self.mask_rate, self.beta, self.vmae_epochs, self.vmae_patience,
                          self.batch_size, self.vmae_lr)

    def reinforce_config(self) -> ReinforceConfig:
        return ReinforceConfig(self.alpha, self.eta, self.reinforce_steps, self.batch_size,
                               self.deviation_floor, self.reward_baseline)


# ---------------------------------------------------------------- manifest

@dataclass
class RunManifest:
    config: dict
    status: str = "running"
    timings: dict = field(default_factory=dict)
    hashes: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    f_metric: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)
    events: list = field(default_factory=list)

    def log_event(self, stage: str, status: str, **info) -> None:
        self.events.append({"stage": stage, "status": status, **info})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        return cls(**d)


class RunDir:
    """Artifact locations for one run."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.root / name

    @property
    def manifest_path(self) -> Path:
        return self.root / "manifest.json"

    def load_manifest(self, config: RunConfig | None = None) -> RunManifest:
        if self.manifest_path.exists():
            return RunManifest.from_dict(json.loads(self.manifest_path.read_text()))
        return RunManifest(config.to_dict() if config else {})

    def save_manifest(self, m: RunManifest) -> None:
        self.manifest_path.write_text(json.dumps(m.to_dict(), indent=2, sort_keys=True))


def _stage(run: RunDir, manifest: RunManifest, name: str, fn, *args, **kwargs):
    t0 = time.perf_counter()
    try:
        out = fn(*args, **kwargs)
    except Exception as exc:
        manifest.status = "failed"
        manifest.log_event(name, "failed", error=f"{type(exc).__name__}: {exc}")
        run.save_manifest(manifest)
        raise StageError(name, exc) from exc
    manifest.timings[name] = time.perf_counter() - t0
    manifest.log_event(name, "ok")
    run.save_manifest(manifest)
    return out


# ---------------------------------------------------------------- data helpers

def load_dataset(cfg: RunConfig) -> TimeSeriesDataset:
    if cfg.dataset is not None:
        return load_csv(cfg.dataset, cfg.timestamp_column, cfg.feature_columns)
    spec = dict(cfg.synthetic)
    kind = spec.pop("kind", "multi_sinusoid")
    return SYNTHETIC[kind](**spec)


def _save_dataset(path: Path, ds: TimeSeriesDataset) -> None:
    np.savez(path, values=ds.values, timestamps=ds.timestamps, mean=ds.mean, std=ds.std,
             columns=np.array(ds.columns), bounds=np.array(json.dumps(ds.bounds)))


def _load_dataset(path: Path) -> TimeSeriesDataset:
    with np.load(path, allow_pickle=False) as d:
        bounds = {k: tuple(v) for k, v in json.loads(str(d["bounds"])).items()}
        return TimeSeriesDataset(d["values"].copy(), d["timestamps"].copy(),
                                 tuple(str(c) for c in d["columns"]), bounds,
                                 d["mean"].copy(), d["std"].copy())


def standard_view(ds: TimeSeriesDataset, cfg: RunConfig) -> TimeSeriesDataset:
    """Same series with the full train range, keeping the run's normalization."""
    n_train = cfg.partition[0]
    bounds = dict(ds.bounds)
    bounds["train"] = (0, n_train)
    return dataclasses.replace(ds, bounds=bounds)


def _windows(ds, cfg, split):
    return windows(ds, split, cfg.lookback, cfg.horizon)


# ---------------------------------------------------------------- stages

def stage_ingest(cfg: RunConfig, run: RunDir) -> TimeSeriesDataset:
    raw = load_dataset(cfg)
    ds = make_splits(raw, SplitSpec(cfg.mode, cfg.fewshot_fraction if cfg.mode == "fewshot" else 1.0),
                     cfg.partition)
    for split in ("train", "val", "test"):
        _windows(ds, cfg, split)  # fail early when a split is too short
    _save_dataset(run.path("dataset.npz"), ds)
    return ds


def stage_zoo(cfg: RunConfig, run: RunDir):
    ds = _load_dataset(run.path("dataset.npz"))
    zoo = build_model_zoo(_windows(ds, cfg, "train"), cfg.K, cfg.backbone, cfg.seed,
                          _windows(ds, cfg, "val"), cfg.train_config())
    return zoo, checkpoint.save_zoo(run.path("zoo.npz"), zoo)


def stage_rank(cfg: RunConfig, run: RunDir):
    ds = _load_dataset(run.path("dataset.npz"))
    zoo = checkpoint.load_zoo(run.path("zoo.npz"))
    records = zoo_variances(_windows(ds, cfg, "train"), zoo, cfg.include_holdout)
    anchors, _ = rank_and_split(records, cfg.anchor_fraction)
    write_rank_csv(run.path("rank.csv"), records, anchors)
    return anchors


def _anchor_windows(cfg: RunConfig, run: RunDir):
    ds = _load_dataset(run.path("dataset.npz"))
    train = _windows(ds, cfg, "train")
    _, anchors, _ = read_rank_csv(run.path("rank.csv"))
    return ds, train, anchors.indices, [train[i] for i in anchors.indices]


def stage_a(cfg: RunConfig, run: RunDir):
    ds, _, _, aw = _anchor_windows(cfg, run)
    policy, history = train_vmae(aw, cfg.vmae_config(ds.channels), cfg.aug_seed)
    return policy, checkpoint.save_policy(run.path("policy_stage_a.npz"), policy)


def _test_range(cfg: RunConfig, ds: TimeSeriesDataset):
    return ds.time_range("test") if cfg.shift_timestamps else None


def stage_b(cfg: RunConfig, run: RunDir):
    ds, _, _, aw = _anchor_windows(cfg, run)
    policy = checkpoint.load_policy(run.path("policy_stage_a.npz"))
    zoo = checkpoint.load_zoo(run.path("zoo.npz"))
    tuned, trace = run_stage_b(policy, aw, zoo, cfg.reinforce_config(), cfg.aug_seed, _test_range(cfg, ds))
    write_trace_csv(run.path("reward_trace.csv"), trace)
    return tuned, checkpoint.save_policy(run.path("policy.npz"), tuned)


def stage_augment(cfg: RunConfig, run: RunDir, policy_file: str = "policy.npz",
                  corpus_name: str = "corpus"):
    ds, train, idx, aw = _anchor_windows(cfg, run)
    policy = checkpoint.load_policy(run.path(policy_file))
    plan = make_plan(len(train), len(aw), cfg.augment_factor)
    gen = generate(policy, aw, idx, plan, _test_range(cfg, ds), cfg.aug_seed)
    corpus = assemble_corpus(train, gen, cfg.aug_seed)
    save_corpus(run.path(corpus_name), corpus)
    return corpus_hash(corpus), plan


def _arm_corpus(cfg: RunConfig, run: RunDir, ds: TimeSeriesDataset, arm: str):
    """Training windows for an arm plus the hash of its corpus."""
    if arm == "original":
        return _windows(ds, cfg, "train"), None
    if arm == "standard":
        return _windows(standard_view(ds, cfg), cfg, "train"), None
    if arm in ("reaugment", "reaugment_no_rl"):
        name = "corpus" if arm == "reaugment" else "corpus_no_rl"
        corpus = load_corpus(run.path(name))
        return [a.window for a in corpus], corpus_hash(corpus)
    train = _windows(ds, cfg, "train")
    kernel = np.full(cfg.convolve_kernel, 1.0 / cfg.convolve_kernel)
    extra = baseline_corpus_windows(train, arm, cfg.aug_seed, cfg.augment_factor, cfg.gaussian_sigma, kernel)
    corpus = assemble_corpus(train, extra, cfg.aug_seed)
    return [a.window for a in corpus], corpus_hash(corpus)


def stage_c(cfg: RunConfig, run: RunDir, arms: Sequence[str] | None = None) -> dict:
    ds = _load_dataset(run.path("dataset.npz"))
    val = _windows(ds, cfg, "val")
    out = {}
    for arm in arms or cfg.arms:
        if arm == "standard" and cfg.mode == "standard":
            continue
        train, chash = _arm_corpus(cfg, run, ds, arm)
        model = train_forecaster(train, cfg.backbone, val, cfg.seed, cfg.train_config())
        out[arm] = {"forecaster": checkpoint.save_forecaster(run.path(f"forecaster_{arm}.npz"), model),
                    "corpus": chash, "n_train": len(train)}
    return out


def stage_evaluate(cfg: RunConfig, run: RunDir, arms: Sequence[str] | None = None) -> dict:
    ds = _load_dataset(run.path("dataset.npz"))
    test = _windows(ds, cfg, "test")
    scale = (ds.mean, ds.std) if cfg.raw_scale_metrics else None
    metrics = {}
    for arm in arms or cfg.arms:
        path = run.path(f"forecaster_{arm}.npz")
        if not path.exists():
            continue
        rep = evaluate(checkpoint.load_forecaster(path), test, scale)
        metrics[arm] = dataclasses.asdict(rep)
    write_metrics_csv(run.path("metrics.csv"), metrics)
    return metrics


# ---------------------------------------------------------------- metrics

@dataclass
class FMetric:
    f_mae: float
    f_mse: float
    inputs: dict


def _f_ratio(fewshot: float, augmented: float, standard: float) -> float:
    if fewshot == 0:
        raise UndefinedMetricError("few-shot metric is zero")
    denom = 1.0 - standard / fewshot
    if denom == 0:
        raise UndefinedMetricError("standard and few-shot metrics are equal; F is undefined")
    return (1.0 - augmented / fewshot) / denom


def f_metric(fewshot: EvalReport, augmented: EvalReport, standard: EvalReport) -> FMetric:
    """Share of the few-shot-to-full-data gap closed by augmentation, per metric."""
    return FMetric(
        _f_ratio(fewshot.mae, augmented.mae, standard.mae),
        _f_ratio(fewshot.mse, augmented.mse, standard.mse),
        {"fewshot": (fewshot.mae, fewshot.mse), "augmented": (augmented.mae, augmented.mse),
         "standard": (standard.mae, standard.mse)},
    )


def promotion(raw: float, augmented: float) -> float:
    """Relative improvement ``(raw - aug) / raw``."""
    return (raw - augmented) / raw


def write_metrics_csv(path: str | Path, metrics: dict) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["arm", "mae", "mse", "n_windows"])
        for arm, m in metrics.items():
            w.writerow([arm, repr(m["mae"]), repr(m["mse"]), m["n_windows"]])


def read_metrics_csv(path: str | Path) -> dict:
    with Path(path).open(newline="") as fh:
        return {r["arm"]: {"mae": float(r["mae"]), "mse": float(r["mse"]), "n_windows": int(r["n_windows"])}
                for r in csv.DictReader(fh)}


def _report(m: dict) -> EvalReport:
    return EvalReport(m["mae"], m["mse"], m.get("n_windows", 0))


def compute_f_metrics(metrics: dict) -> dict:
    if "original" not in metrics or "standard" not in metrics:
        return {}
    out = {}
    for arm, m in metrics.items():
        if arm in ("original", "standard"):
            continue
        try:
            fm = f_metric(_report(metrics["original"]), _report(m), _report(metrics["standard"]))
        except UndefinedMetricError as exc:
            out[arm] = {"error": str(exc)}
            continue
        out[arm] = {"f_mae": fm.f_mae, "f_mse": fm.f_mse}
    return out


# ---------------------------------------------------------------- orchestration

def run_pipeline(config: RunConfig, out_dir: str | Path) -> RunManifest:
    """Zoo -> ranking -> Stage A -> Stage B -> generation -> Stage C -> evaluation."""
    cfg = config.validate()
    run = RunDir(out_dir)
    manifest = RunManifest(cfg.to_dict())
    run.save_manifest(manifest)
    _stage(run, manifest, "ingest", stage_ingest, cfg, run)
    _, manifest.hashes["zoo"] = _stage(run, manifest, "zoo", stage_zoo, cfg, run)
    _stage(run, manifest, "rank", stage_rank, cfg, run)
    needs_vmae = any(a in cfg.arms for a in ("reaugment", "reaugment_no_rl"))
    if needs_vmae:
        _, manifest.hashes["policy_stage_a"] = _stage(run, manifest, "stage-a", stage_a, cfg, run)
    if "reaugment" in cfg.arms:
        _, manifest.hashes["policy"] = _stage(run, manifest, "stage-b", stage_b, cfg, run)
        manifest.hashes["corpus"], _ = _stage(run, manifest, "augment", stage_augment, cfg, run)
    if "reaugment_no_rl" in cfg.arms:
        manifest.hashes["corpus_no_rl"], _ = _stage(run, manifest, "augment-no-rl", stage_augment, cfg, run,
                                                    "policy_stage_a.npz", "corpus_no_rl")
    trained = _stage(run, manifest, "stage-c", stage_c, cfg, run)
    for arm, h in trained.items():
        manifest.hashes[f"forecaster_{arm}"] = h["forecaster"]
        if h["corpus"] is not None:
            manifest.hashes[f"corpus_{arm}"] = h["corpus"]
    manifest.metrics = _stage(run, manifest, "evaluate", stage_evaluate, cfg, run)
    manifest.f_metric = compute_f_metrics(manifest.metrics)
    manifest.artifacts = sorted(p.name for p in run.root.iterdir() if p.is_file())
    manifest.status = "complete"
    run.save_manifest(manifest)
    return manifest


def run_seeds(config: RunConfig, seeds: Sequence[int], out_dir: str | Path) -> dict:
    """Repeat the pipeline with different augmentor seeds; forecaster seeds stay fixed."""
    out = Path(out_dir)
    rows = {}
    for s in seeds:
        m = run_pipeline(config.with_overrides({"augment_seed": s}), out / f"seed_{s}")
        rows[s] = m.metrics
    arms = next(iter(rows.values())).keys() if rows else []
    summary = {}
    for arm in arms:
        mae = [rows[s][arm]["mae"] for s in seeds]
        mse = [rows[s][arm]["mse"] for s in seeds]
        summary[arm] = {"mae": float(np.mean(mae)), "mse": float(np.mean(mse)),
                        "mae_std": float(np.std(mae)), "mse_std": float(np.std(mse)),
                        "n_windows": rows[seeds[0]][arm]["n_windows"]}
    write_metrics_csv(out / "metrics.csv", summary)
    (out / "seeds.json").write_text(json.dumps({"per_seed": rows, "mean": summary}, indent=2, sort_keys=True))
    return summary


def ablation_rl(config: RunConfig, out_dir: str | Path) -> dict:
    """Stage B on vs. off with everything else shared."""
    cfg = config.with_overrides({"arms": ["original", "reaugment", "reaugment_no_rl"]})
    m = run_pipeline(cfg, out_dir)
    a = checkpoint.load_policy(Path(out_dir) / "policy_stage_a.npz")
    b = checkpoint.load_policy(Path(out_dir) / "policy.npz")
    changed = [s for s in ("prior", "posterior", "encoder", "decoder")
               if checkpoint.policy_hash(a, (s,)) != checkpoint.policy_hash(b, (s,))]
    table = {"rl_off": m.metrics["reaugment_no_rl"], "rl_on": m.metrics["reaugment"],
             "original": m.metrics["original"], "changed_stacks": changed}
    Path(out_dir, "ablation_rl.json").write_text(json.dumps(table, indent=2, sort_keys=True))
    return table


def ablation_anchor_fraction(config: RunConfig, fractions: Sequence[float], out_dir: str | Path) -> dict:
    """One run per anchor fraction; the zoo is built once and shared."""
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ConfigError(f"anchor fraction {f} outside (0, 1]")
    cfg = config.validate().with_overrides({"arms": ["reaugment"]})
    root = RunDir(out_dir)
    stage_ingest(cfg, root)
    _, zhash = stage_zoo(cfg, root)
    table = {}
    for f in fractions:
        sub = RunDir(root.root / f"fraction_{f:g}")
        fcfg = cfg.with_overrides({"anchor_fraction": f})
        for name in ("dataset.npz", "zoo.npz"):
            sub.path(name).write_bytes(root.path(name).read_bytes())
        anchors = stage_rank(fcfg, sub)
        stage_a(fcfg, sub)
        stage_b(fcfg, sub)
        _, plan = stage_augment(fcfg, sub)
        stage_c(fcfg, sub)
        metrics = stage_evaluate(fcfg, sub)["reaugment"]
        table[f] = {**metrics, "n_anchors": len(anchors.indices), "multiplier": plan.multiplier,
                    "zoo_hash": checkpoint.zoo_hash(checkpoint.load_zoo(sub.path("zoo.npz")))}
    assert all(row["zoo_hash"] == zhash for row in table.values())
    with (root.root / "ablation_anchor.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["fraction", "mae", "mse", "n_anchors", "multiplier", "zoo_hash"])
        for f, row in table.items():
            w.writerow([f, repr(row["mae"]), repr(row["mse"]), row["n_anchors"], row["multiplier"], row["zoo_hash"]])
    return table


def run_group_ab(config: RunConfig, out_dir: str | Path) -> tuple[EvalReport, EvalReport]:
    cfg = config.validate()
    run = RunDir(out_dir)
    if not run.path("dataset.npz").exists():
        stage_ingest(cfg, run)
    if not run.path("zoo.npz").exists():
        stage_zoo(cfg, run)
    ds = _load_dataset(run.path("dataset.npz"))
    zoo = checkpoint.load_zoo(run.path("zoo.npz"))
    a, b = group_ab_experiment(ds, zoo, cfg.backbone, cfg.seed, cfg.horizon, cfg.train_config())
    write_metrics_csv(run.path("group_ab.csv"), {"group_a": dataclasses.asdict(a), "group_b": dataclasses.asdict(b)})
    return a, b


# ---------------------------------------------------------------- reporting

def report(manifest: RunManifest | dict) -> tuple[str, str, str]:
    """Text table, metrics CSV and JSON for a manifest."""
    m = manifest if isinstance(manifest, RunManifest) else RunManifest.from_dict(manifest)
    lines = []
    if m.status != "complete":
        lines.append(f"WARNING: partial report, run status is {m.status!r}")
    lines.append(f"{'arm':<18}{'MAE':>10}{'MSE':>10}{'promo MAE':>12}{'promo MSE':>12}")
    base = m.metrics.get("original")
    for arm, row in m.metrics.items():
        pm = ps = ""
        if base and arm != "original":
            pm = f"{100 * promotion(base['mae'], row['mae']):.2f}%"
            ps = f"{100 * promotion(base['mse'], row['mse']):.2f}%"
        lines.append(f"{arm:<18}{row['mae']:>10.4f}{row['mse']:>10.4f}{pm:>12}{ps:>12}")
    for arm, fm in m.f_metric.items():
        if "error" in fm:
            lines.append(f"F[{arm}]: undefined ({fm['error']})")
        else:
            lines.append(f"F[{arm}]: F_MAE={100 * fm['f_mae']:.1f}%  F_MSE={100 * fm['f_mse']:.1f}%")
    if "reward_trace.csv" in (m.artifacts or []):
        lines.append("reward trace: reward_trace.csv")
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["arm", "mae", "mse", "n_windows"])
    for arm, row in m.metrics.items():
        w.writerow([arm, repr(row["mae"]), repr(row["mse"]), row["n_windows"]])
    js = json.dumps({"metrics": m.metrics, "f_metric": m.f_metric, "status": m.status}, sort_keys=True)
    return "\n".join(lines), buf.getvalue(), js


def config_from_args(path: str | None, overrides: dict[str, Any]) -> RunConfig:
    cfg = RunConfig.from_file(path) if path else RunConfig(synthetic={"kind": "multi_sinusoid"})
    return cfg.with_overrides({k: v for k, v in overrides.items() if v is not None})
