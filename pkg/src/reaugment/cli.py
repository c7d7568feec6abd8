"""Command-line interface: ``reaugment <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from . import pipeline as pl
from .errors import ReAugmentError, StageError
from .forecaster import EvalReport

STAGES = {
    "ingest": ("ingest", pl.stage_ingest),
    "zoo": ("zoo", pl.stage_zoo),
    "rank": ("rank", pl.stage_rank),
    "stage-a": ("stage-a", pl.stage_a),
    "stage-b": ("stage-b", pl.stage_b),
    "augment": ("augment", pl.stage_augment),
    "stage-c": ("stage-c", pl.stage_c),
    "evaluate": ("evaluate", pl.stage_evaluate),
}

# flag name -> config key
OVERRIDES = {
    "seed": "seed", "augment_seed": "augment_seed", "K": "K", "anchor_fraction": "anchor_fraction",
    "mask_rate": "mask_rate", "beta": "beta", "alpha": "alpha", "eta": "eta", "d_z": "d_z",
    "batch_size": "batch_size", "reinforce_steps": "reinforce_steps", "backbone": "backbone",
    "lookback": "lookback", "horizon": "horizon", "dataset": "dataset", "mode": "mode",
    "fewshot_fraction": "fewshot_fraction",
}


def _parse_set(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise argparse.ArgumentTypeError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = yaml.safe_load(v)
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--run-dir", default="run", help="artifact directory (default: ./run)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    g = p.add_argument_group("config overrides")
    g.add_argument("--seed", type=int)
    g.add_argument("--augment-seed", dest="augment_seed", type=int)
    g.add_argument("--K", type=int)
    g.add_argument("--anchor-fraction", dest="anchor_fraction", type=float)
    g.add_argument("--mask-rate", dest="mask_rate", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--eta", type=float)
    g.add_argument("--d-z", dest="d_z", type=int)
    g.add_argument("--batch-size", dest="batch_size", type=int)
    g.add_argument("--reinforce-steps", dest="reinforce_steps", type=int)
    g.add_argument("--backbone", choices=["linear", "dlinear", "mlp"])
    g.add_argument("--lookback", type=int)
    g.add_argument("--horizon", type=int)
    g.add_argument("--dataset", help="CSV path")
    g.add_argument("--mode", choices=["standard", "fewshot"])
    g.add_argument("--fewshot-fraction", dest="fewshot_fraction", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reaugment", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES:
        p = sub.add_parser(name, help=f"run the {name} stage")
        _add_common(p)
        if name == "augment":
            p.add_argument("--no-rl", action="store_true", help="generate from the Stage A policy")
        if name in ("stage-c", "evaluate"):
            p.add_argument("--arms", help="comma-separated arms")
    p = sub.add_parser("pipeline", help="run every stage end to end")
    _add_common(p)
    p.add_argument("--seeds", help="comma-separated augmentor seeds; one run per seed")
    p = sub.add_parser("ablate-rl", help="Stage B on vs. off")
    _add_common(p)
    p = sub.add_parser("ablate-anchor", help="sweep the anchor fraction")
    _add_common(p)
    p.add_argument("--fractions", default="0.1,0.3,0.5,0.7,1.0")
    p = sub.add_parser("group-ab", help="train on high- vs low-variance halves")
    _add_common(p)
    p = sub.add_parser("f-metric", help="F_MAE / F_MSE from three (MAE, MSE) pairs or a metrics.csv")
    p.add_argument("--fewshot", nargs=2, type=float, metavar=("MAE", "MSE"))
    p.add_argument("--augmented", nargs=2, type=float, metavar=("MAE", "MSE"))
    p.add_argument("--standard", nargs=2, type=float, metavar=("MAE", "MSE"))
    p.add_argument("--metrics", help="metrics.csv with 'original' and 'standard' rows")
    p = sub.add_parser("report", help="print the summary of a finished run")
    p.add_argument("--run-dir", default="run")
    return parser


def _config(args) -> pl.RunConfig:
    overrides = {OVERRIDES[k]: getattr(args, k) for k in OVERRIDES if getattr(args, k, None) is not None}
    overrides.update(_parse_set(args.set))
    return pl.config_from_args(args.config, overrides).validate()


def _run_stage(args, cfg: pl.RunConfig) -> None:
    run = pl.RunDir(args.run_dir)
    manifest = run.load_manifest(cfg)
    manifest.config = cfg.to_dict()
    stage, fn = STAGES[args.command]
    extra = []
    if args.command == "augment" and args.no_rl:
        extra = ["policy_stage_a.npz", "corpus_no_rl"]
    if args.command in ("stage-c", "evaluate") and args.arms:
        extra = [args.arms.split(",")]
    result = pl._stage(run, manifest, stage, fn, cfg, run, *extra)
    if args.command == "evaluate":
        manifest.metrics = result
        manifest.f_metric = pl.compute_f_metrics(result)
        manifest.status = "complete"
        run.save_manifest(manifest)
        print(pl.report(manifest)[0])
    print(f"{stage}: ok ({run.root})")


def _f_metric(args) -> None:
    if args.metrics:
        metrics = pl.read_metrics_csv(args.metrics)
        out = pl.compute_f_metrics(metrics)
        if not out:
            raise SystemExit("metrics file needs 'original' and 'standard' rows")
        for arm, fm in out.items():
            print(f"{arm}: " + (fm["error"] if "error" in fm else
                                f"F_MAE={100 * fm['f_mae']:.1f}% F_MSE={100 * fm['f_mse']:.1f}%"))
        return
    if not (args.fewshot and args.augmented and args.standard):
        raise SystemExit("need --fewshot, --augmented and --standard (or --metrics)")
    fm = pl.f_metric(*(EvalReport(a, b, 0) for a, b in (args.fewshot, args.augmented, args.standard)))
    print(f"F_MAE={100 * fm.f_mae:.1f}% F_MSE={100 * fm.f_mse:.1f}%")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "f-metric":
            _f_metric(args)
        elif args.command == "report":
            manifest = json.loads(Path(args.run_dir, "manifest.json").read_text())
            print(pl.report(manifest)[0])
        elif args.command in STAGES:
            _run_stage(args, _config(args))
        elif args.command == "pipeline":
            cfg = _config(args)
            seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else cfg.seeds
            if seeds:
                summary = pl.run_seeds(cfg, seeds, args.run_dir)
                for arm, row in summary.items():
                    print(f"{arm:<18} MAE {row['mae']:.4f}±{row['mae_std']:.4f}  MSE {row['mse']:.4f}±{row['mse_std']:.4f}")
            else:
                print(pl.report(pl.run_pipeline(cfg, args.run_dir))[0])
        elif args.command == "ablate-rl":
            table = pl.ablation_rl(_config(args), args.run_dir)
            for row in ("rl_off", "rl_on"):
                print(f"{row:<8} MAE {table[row]['mae']:.4f}  MSE {table[row]['mse']:.4f}")
            print("changed stacks:", ", ".join(table["changed_stacks"]) or "none")
        elif args.command == "ablate-anchor":
            fractions = [float(f) for f in args.fractions.split(",")]
            for f, row in pl.ablation_anchor_fraction(_config(args), fractions, args.run_dir).items():
                print(f"{f:>5.0%}  MAE {row['mae']:.4f}  MSE {row['mse']:.4f}  anchors {row['n_anchors']}")
        elif args.command == "group-ab":
            a, b = pl.run_group_ab(_config(args), args.run_dir)
            print(f"group A (high variance): MAE {a.mae:.4f}  MSE {a.mse:.4f}")
            print(f"group B (low variance):  MAE {b.mae:.4f}  MSE {b.mse:.4f}")
    except StageError as exc:
        print(f"error in stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return 2
    except (ReAugmentError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
