"""Versioned parameter dumps (``.npz`` arrays + JSON shape manifest) and content hashes."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import FormatError
from .forecaster import ForecasterParams, ModelZoo
from .numeric import LayerParams
from .vmae import STACKS, VmaePolicy

FORMAT = "reaugment-params"
FORMAT_VERSION = 1


def _manifest(kind: str, stacks: dict[str, list[LayerParams]], meta: dict) -> dict:
    return {
        "format": FORMAT,
        "version": FORMAT_VERSION,
        "kind": kind,
        "meta": meta,
        "stacks": {
            name: [{"shape": list(l.weights.shape), "activation": l.activation} for l in layers]
            for name, layers in stacks.items()
        },
    }


def content_hash(kind: str, stacks: dict[str, list[LayerParams]], meta: dict | None = None) -> str:
    h = hashlib.sha256(json.dumps(_manifest(kind, stacks, meta or {}), sort_keys=True).encode())
    for name in sorted(stacks):
        for layer in stacks[name]:
            h.update(np.ascontiguousarray(layer.weights).tobytes())
            h.update(np.ascontiguousarray(layer.bias).tobytes())
    return h.hexdigest()


def save_stacks(path: str | Path, kind: str, stacks: dict[str, list[LayerParams]],
                meta: dict | None = None) -> str:
    """Write the checkpoint and return its content hash."""
    meta = meta or {}
    arrays = {}
    for name, layers in stacks.items():
        for i, layer in enumerate(layers):
            arrays[f"{name}.{i}.weights"] = layer.weights
            arrays[f"{name}.{i}.bias"] = layer.bias
    manifest = _manifest(kind, stacks, meta)
    with Path(path).open("wb") as fh:
        np.savez(fh, __manifest__=np.array(json.dumps(manifest, sort_keys=True)), **arrays)
    return content_hash(kind, stacks, meta)


def load_stacks(path: str | Path, kind: str | None = None) -> tuple[dict[str, list[LayerParams]], dict]:
    with np.load(Path(path), allow_pickle=False) as data:
        if "__manifest__" not in data:
            raise FormatError(f"{path}: missing manifest")
        manifest = json.loads(str(data["__manifest__"]))
        if manifest.get("format") != FORMAT:
            raise FormatError(f"{path}: not a {FORMAT} file")
        if manifest.get("version") != FORMAT_VERSION:
            raise FormatError(f"{path}: unsupported version {manifest.get('version')}")
        if kind is not None and manifest["kind"] != kind:
            raise FormatError(f"{path}: expected kind {kind!r}, found {manifest['kind']!r}")
        stacks = {}
        for name, specs in manifest["stacks"].items():
            layers = []
            for i, spec in enumerate(specs):
                w = data[f"{name}.{i}.weights"]
                if list(w.shape) != spec["shape"]:
                    raise FormatError(f"{path}: {name}.{i} shape {w.shape} != manifest {spec['shape']}")
                layers.append(LayerParams(w.copy(), data[f"{name}.{i}.bias"].copy(), spec["activation"]))
            stacks[name] = layers
    return stacks, manifest


def _forecaster_meta(p: ForecasterParams) -> dict:
    return {"backbone": p.backbone, "lookback": p.lookback, "horizon": p.horizon,
            "kernel_size": p.kernel_size}


def forecaster_hash(p: ForecasterParams) -> str:
    return content_hash("forecaster", {"layers": p.layers}, _forecaster_meta(p))


def save_forecaster(path: str | Path, p: ForecasterParams) -> str:
    return save_stacks(path, "forecaster", {"layers": p.layers}, _forecaster_meta(p))


def load_forecaster(path: str | Path) -> ForecasterParams:
    stacks, manifest = load_stacks(path, "forecaster")
    m = manifest["meta"]
    return ForecasterParams(m["backbone"], stacks["layers"], m["lookback"], m["horizon"], m["kernel_size"])


def _zoo_stacks(zoo: ModelZoo) -> tuple[dict, dict]:
    stacks = {f"member{k}": p.layers for k, p in enumerate(zoo.members)}
    meta = {"K": zoo.K, "seed": zoo.seed, "backbone": zoo.backbone,
            "fold_of_window": [int(f) for f in zoo.fold_of_window],
            "member_meta": [_forecaster_meta(p) for p in zoo.members]}
    return stacks, meta


def zoo_hash(zoo: ModelZoo) -> str:
    stacks, meta = _zoo_stacks(zoo)
    return content_hash("zoo", stacks, meta)


def save_zoo(path: str | Path, zoo: ModelZoo) -> str:
    stacks, meta = _zoo_stacks(zoo)
    return save_stacks(path, "zoo", stacks, meta)


def load_zoo(path: str | Path) -> ModelZoo:
    stacks, manifest = load_stacks(path, "zoo")
    m = manifest["meta"]
    members = []
    for k, mm in enumerate(m["member_meta"]):
        members.append(ForecasterParams(mm["backbone"], stacks[f"member{k}"], mm["lookback"],
                                        mm["horizon"], mm["kernel_size"]))
    return ModelZoo(members, np.array(m["fold_of_window"], dtype=np.int64), m["seed"], m["backbone"])


def policy_hash(policy: VmaePolicy, stacks: tuple[str, ...] = STACKS) -> str:
    return content_hash("vmae", {s: policy.stack(s) for s in stacks}, policy.manifest())


def save_policy(path: str | Path, policy: VmaePolicy) -> str:
    return save_stacks(path, "vmae", {s: policy.stack(s) for s in STACKS}, policy.manifest())


def load_policy(path: str | Path) -> VmaePolicy:
    stacks, manifest = load_stacks(path, "vmae")
    m = manifest["meta"]
    return VmaePolicy(stacks["prior"], stacks["posterior"], stacks["encoder"], stacks["decoder"],
                      m["window_len"], m["channels"], m["d_z"], m["mask_rate"])
