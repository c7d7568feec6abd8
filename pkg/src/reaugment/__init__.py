"""Reinforcement-learned augmentation of overfit-prone windows for few-shot forecasting."""

from .dataset import SplitSpec, TimeSeriesDataset, Window, load_csv, make_splits, windows
from .forecaster import EvalReport, ModelZoo, build_model_zoo, evaluate, predict, train_forecaster
from .pipeline import RunConfig, f_metric, run_pipeline
from .ranking import model_zoo_variance, rank_and_split
from .reinforce import compute_reward, run_stage_b
from .vmae import VmaeConfig, VmaePolicy, train_vmae

__version__ = "0.1.0"

__all__ = [
    "EvalReport", "ModelZoo", "RunConfig", "SplitSpec", "TimeSeriesDataset", "VmaeConfig", "VmaePolicy",
    "Window", "build_model_zoo", "compute_reward", "evaluate", "f_metric", "load_csv", "make_splits",
    "model_zoo_variance", "predict", "rank_and_split", "run_pipeline", "run_stage_b", "train_forecaster",
    "train_vmae", "windows",
]
