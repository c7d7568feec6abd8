#!/usr/bin/env python3
# Full run on the synthetic multi-sinusoid series, all arms. About 10 s.

import sys
from pathlib import Path

from reaugment.pipeline import RunConfig, report, run_pipeline

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_run")
cfg = RunConfig(
    synthetic={"kind": "multi_sinusoid", "T": 5000, "C": 3, "seed": 0},
    fewshot_fraction=0.1,
    arms=["original", "reaugment", "reaugment_no_rl", "gaussian", "convolve", "standard"],
)
manifest = run_pipeline(cfg, out)
text, _, _ = report(manifest)
print(text)
print()
print("stage timings:", {k: round(v, 2) for k, v in manifest.timings.items()})
print("artifacts in", out, ":", ", ".join(manifest.artifacts))
