"""Command-line front end: encode single beats, build fused tensor stores,
train and evaluate the reference classifier, inspect artifacts.

Every command is deterministic given its inputs, configuration, and seed;
build manifests record content checksums so reruns are verifiable. Errors go
to stderr with the failing stage named; the exit status is 0 only when no
stage errored.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import classifier, dataset, encoders, metrics, store

CHANNEL_INDEX = {name: i for i, name in enumerate(encoders.CHANNEL_ORDER)}
ROW_LABELS = {"gaf": "GAF", "rp": "RP", "mtf": "MTF", "fused": "IFM"}


@dataclass
class PipelineConfig:
    """Every knob of the pipeline; round-trips losslessly through JSON."""

    seed: int = 0
    size: int = encoders.DEFAULT_FUSE_SIZE
    n_bins: int = encoders.DEFAULT_BINS
    eps_fraction: float = encoders.DEFAULT_EPS_FRACTION
    rp_mode: str = "binary"
    mtf_layout: str = "field"
    smote: str = "off"
    smote_k: int = dataset.DEFAULT_K_NEIGHBORS
    only_channel: str = "off"
    learning_rate: float = 0.01
    momentum: float = 0.9
    l2: float = 0.004
    batch_size: int = 64
    max_epochs: int = 200
    patience: int = 5
    val_fraction: float = 0.1

    def __post_init__(self):
        if self.only_channel not in ("off",) + encoders.CHANNEL_ORDER:
            raise ValueError(f"only_channel must be off/gaf/rp/mtf, got {self.only_channel!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def encoder_config(self) -> encoders.EncoderConfig:
        return encoders.EncoderConfig(size=self.size, n_bins=self.n_bins,
                                      eps_fraction=self.eps_fraction,
                                      rp_mode=self.rp_mode, mtf_layout=self.mtf_layout)

    def train_config(self) -> classifier.TrainConfig:
        return classifier.TrainConfig(learning_rate=self.learning_rate,
                                      momentum=self.momentum, l2=self.l2,
                                      batch_size=self.batch_size,
                                      max_epochs=self.max_epochs,
                                      patience=self.patience, seed=self.seed)


def parse_smote_spec(spec: str) -> dict[int, int] | str:
    """Parse --smote values: 'off', 'balance', or 'targets=<id>:<count>,...'."""
    if spec in ("off", "balance"):
        return spec
    if spec.startswith("targets="):
        targets = {}
        for item in spec[len("targets="):].split(","):
            try:
                cid, count = item.split(":")
                targets[int(cid)] = int(count)
            except ValueError:
                raise ValueError(f"bad smote target {item!r}; expected <class>:<count>") from None
        if not targets:
            raise ValueError("empty smote target list")
        return targets
    raise ValueError(f"smote spec must be off, balance, or targets=..., got {spec!r}")


def zero_channels(tensor: np.ndarray, keep: str) -> np.ndarray:
    """Copy of a fused tensor with all channels except ``keep`` zeroed."""
    if keep == "fused":
        return tensor
    if keep not in CHANNEL_INDEX:
        raise ValueError(f"channels must be one of gaf/rp/mtf/fused, got {keep!r}")
    out = tensor.copy()
    for name, idx in CHANNEL_INDEX.items():
        if name != keep:
            out[:, idx] = 0.0
    return out


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Config file (if any) as the base, explicit flags on top."""
    if getattr(args, "config", None):
        cfg = PipelineConfig.from_dict(store.read_json(args.config))
    else:
        cfg = PipelineConfig()
    for f in fields(PipelineConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)
    cfg.__post_init__()
    return cfg


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, OSError) as exc:
        raise ValueError(f"stage {name!r}: {exc}") from exc


def _load_series(args) -> np.ndarray:
    if args.series is not None:
        try:
            return np.asarray([float(tok) for tok in args.series.split(",")])
        except ValueError:
            raise ValueError("--series expects comma-separated numbers") from None
    if args.csv is None:
        raise ValueError("encode needs --csv or --series")
    beats = dataset.load_csv(args.csv)
    if not 0 <= args.row < len(beats):
        raise ValueError(f"--row {args.row} out of range for {len(beats)} beats")
    return beats.beats[args.row]


def cmd_encode(args: argparse.Namespace) -> None:
    cfg = resolve_config(args)
    x = _stage("load", _load_series, args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    gaf_img = _stage("gaf", encoders.gasf, x)
    rp_img = _stage("rp", encoders.recurrence_plot, x, mode=cfg.rp_mode,
                    eps_fraction=cfg.eps_fraction)
    mtf_img = _stage("mtf", encoders.mtf_image,
                     x, encoders.mtf_fit(x, cfg.n_bins), layout=cfg.mtf_layout)
    for name, img in (("gaf", gaf_img), ("rp", rp_img), ("mtf", mtf_img)):
        path = out_dir / f"{name}.png"
        _stage("write", store.write_gray_png, path, img)
        print(path)
    if args.fuse:
        fused = _stage("fuse", encoders.fuse, gaf_img, rp_img, mtf_img, size=cfg.size)
        path = out_dir / "fused.png"
        _stage("write", store.write_fused_png, path, fused)
        print(path)


def _build_split(name: str, beats: dataset.BeatDataset, cfg: PipelineConfig,
                 out_dir: Path) -> dict:
    tensor, labels = _stage(f"encode-{name}", dataset.encode_dataset,
                            beats, cfg.encoder_config())
    if cfg.only_channel != "off":
        tensor = zero_channels(tensor, cfg.only_channel)
    store_path = out_dir / f"{name}.f32"
    digest = _stage(f"write-{name}", store.save_fused_store,
                    store_path, tensor, labels, beats.class_names)
    return {
        "path": store_path.name,
        "rows": len(beats),
        "class_counts": {str(cid): count for cid, count in beats.class_counts().items()},
        "checksum": digest,
    }


def cmd_build(args: argparse.Namespace) -> None:
    cfg = resolve_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    train_beats = _stage("load-train", dataset.load_csv, args.train, split="train")
    test_beats = _stage("load-test", dataset.load_csv, args.test,
                        class_names=train_beats.class_names, split="test")
    smote_mode = parse_smote_spec(cfg.smote)
    if smote_mode != "off":
        targets = (dataset.balance_targets(train_beats) if smote_mode == "balance"
                   else smote_mode)
        smote_cfg = dataset.SmoteConfig(target_counts=targets,
                                        k_neighbors=cfg.smote_k, seed=cfg.seed)
        train_beats = _stage("smote", dataset.smote, train_beats, smote_cfg)

    manifest = {
        "format": store.MANIFEST_FORMAT,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "inputs": {"train_csv": Path(args.train).name, "test_csv": Path(args.test).name},
        "stores": {
            "train": _build_split("train", train_beats, cfg, out_dir),
            "test": _build_split("test", test_beats, cfg, out_dir),
        },
    }
    manifest_path = out_dir / "manifest.json"
    store.write_json(manifest_path, manifest)
    print(manifest_path)


def _dense_class_count(class_names: dict[int, str]) -> int:
    ids = sorted(class_names)
    if ids != list(range(len(ids))):
        raise ValueError(f"class ids must be 0..{len(ids) - 1}, got {ids}")
    return len(ids)


def cmd_train(args: argparse.Namespace) -> None:
    cfg = resolve_config(args)
    fused = _stage("load-store", store.load_fused_store, args.store)
    n_classes = _dense_class_count(fused.class_names)
    features = fused.features()
    keep_idx, val_idx = _stage("val-split", classifier.stratified_split,
                               fused.labels, cfg.val_fraction, cfg.seed)
    model = classifier.SoftmaxModel.zeros(n_classes, features.shape[1],
                                          fused.feature_side, fused.class_names)
    model, history = _stage("train", classifier.train, model,
                            features[keep_idx], fused.labels[keep_idx],
                            features[val_idx], fused.labels[val_idx],
                            cfg.train_config())
    _stage("checkpoint", store.save_checkpoint, args.out, model,
           cfg.to_dict(), history, seed=cfg.seed)
    print(Path(args.out).with_suffix(".json"))
    print(f"epochs={len(history['val_loss'])} "
          f"best_val_loss={min(history['val_loss']):.6f}", file=sys.stderr)


def _eval_rows(args: argparse.Namespace) -> list[str]:
    if args.ablation:
        return ["gaf", "rp", "mtf", "fused"]
    return [args.channels]


def cmd_eval(args: argparse.Namespace) -> None:
    fused = _stage("load-store", store.load_fused_store, args.store)
    model, _ = _stage("load-model", store.load_checkpoint, args.model)
    n_classes = model.n_classes
    if fused.labels.max() >= n_classes:
        raise ValueError(f"store labels reach {fused.labels.max()} but the model "
                         f"has {n_classes} classes")
    rows: dict[str, metrics.EvalReport] = {}
    for channel in _eval_rows(args):
        features = zero_channels(fused.tensor, channel)
        features = features.reshape(features.shape[0], -1).astype(np.float64)
        preds = _stage("predict", classifier.predict, model, features)
        rows[ROW_LABELS[channel]] = metrics.evaluate(preds, fused.labels, n_classes)
    print(metrics.format_ablation_table(rows))
    if args.report:
        report = {
            "format": "report/v1",
            "rows": {label: rep.to_dict() for label, rep in rows.items()},
        }
        store.write_json(args.report, report)


def _describe(path: Path) -> str:
    if path.suffix == store.TENSOR_SUFFIX:
        path = store.header_path(path)
    data = store.read_json(path)
    kind = data.get("format", "unknown")
    if kind == store.TENSOR_FORMAT:
        extra = f"shape={data['shape']} dtype={data['dtype']} checksum={data['checksum']}"
        if "labels" in data:
            extra += f" rows={len(data['labels'])} classes={data.get('class_names')}"
        return f"{path}: {kind} {extra}"
    if kind == store.MANIFEST_FORMAT:
        counts = {name: entry["rows"] for name, entry in data["stores"].items()}
        return f"{path}: {kind} seed={data['seed']} rows={counts}"
    if kind == store.CHECKPOINT_FORMAT:
        return (f"{path}: {kind} classes={data['n_classes']} "
                f"features={data['n_features']} side={data['feature_side']}")
    return f"{path}: {kind}"


def cmd_inspect(args: argparse.Namespace) -> None:
    for name in args.paths:
        print(_stage("inspect", _describe, Path(name)))


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON pipeline config; flags override it")
    parser.add_argument("--seed", type=int, default=None)


def _add_encoder_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--size", type=int, default=None,
                        help="fused image side length (default 227)")
    parser.add_argument("--Q", dest="n_bins", type=int, default=None,
                        help="quantile bin count for the transition field (default 10)")
    parser.add_argument("--eps-fraction", dest="eps_fraction", type=float, default=None,
                        help="recurrence threshold as a fraction of the series range")
    parser.add_argument("--rp-mode", dest="rp_mode", choices=["binary", "distance"],
                        default=None)
    parser.add_argument("--mtf-layout", dest="mtf_layout", choices=["field", "matrix"],
                        default=None)


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lr", dest="learning_rate", type=float, default=None)
    parser.add_argument("--momentum", type=float, default=None)
    parser.add_argument("--l2", type=float, default=None)
    parser.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    parser.add_argument("--max-epochs", dest="max_epochs", type=int, default=None)
    parser.add_argument("--patience", type=int, default=None)
    parser.add_argument("--val-fraction", dest="val_fraction", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecgfusion",
        description="Encode fixed-length beats into fused GAF/RP/MTF images "
                    "and run the train/eval pipeline on them.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode one beat to gaf/rp/mtf PNGs")
    p.add_argument("--csv", help="beat CSV to read from")
    p.add_argument("--row", type=int, default=0, help="row index within --csv")
    p.add_argument("--series", help="inline comma-separated samples")
    p.add_argument("--out-dir", default=".", help="where PNGs are written")
    p.add_argument("--fuse", action="store_true", help="also write fused.png (RGB)")
    _add_config_flags(p)
    _add_encoder_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("build", help="encode train/test CSVs into tensor stores")
    p.add_argument("--train", required=True, help="training beat CSV")
    p.add_argument("--test", required=True, help="test beat CSV")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--smote", default=None,
                   help="off | balance | targets=<class>:<count>,...")
    p.add_argument("--smote-k", dest="smote_k", type=int, default=None)
    p.add_argument("--only-channel", dest="only_channel",
                   choices=["off", "gaf", "rp", "mtf"], default=None,
                   help="zero all but one channel in the stores (per-modality runs)")
    _add_config_flags(p)
    _add_encoder_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("train", help="train the softmax classifier on a store")
    p.add_argument("--store", required=True, help="training tensor store (.f32)")
    p.add_argument("--out", required=True, help="checkpoint prefix")
    _add_config_flags(p)
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a store")
    p.add_argument("--store", required=True, help="test tensor store (.f32)")
    p.add_argument("--model", required=True, help="checkpoint prefix")
    p.add_argument("--channels", choices=["gaf", "rp", "mtf", "fused"],
                   default="fused", help="zero the unselected channels")
    p.add_argument("--ablation", action="store_true",
                   help="evaluate all four channel selections")
    p.add_argument("--report", help="write the report as JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect", help="summarize stores, manifests, checkpoints")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
