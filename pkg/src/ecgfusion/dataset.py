"""Beat dataset handling: CSV ingestion, class bookkeeping, minority
oversampling, and batch encoding into fused image tensors.

The on-disk input format is the pre-segmented beat layout: one beat per CSV
row, a fixed number of float columns followed by one integer class label, no
header. Oversampling interpolates new minority beats between existing ones
and is restricted to training splits.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .encoders import EncoderConfig, encode_fused

# Pre-mapped class ids of the two published beat-CSV distributions.
MITBIH_CLASSES = {0: "N", 1: "S", 2: "V", 3: "F", 4: "Q"}
PTB_CLASSES = {0: "normal", 1: "MI"}

DEFAULT_K_NEIGHBORS = 5


@dataclass
class BeatDataset:
    """Labeled beat collection: a (n, beat_length) matrix plus label vector."""

    beats: np.ndarray
    labels: np.ndarray
    class_names: dict[int, str]
    split: str = "train"

    def __post_init__(self):
        self.beats = np.asarray(self.beats, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.beats.ndim != 2:
            raise ValueError(f"beats must be 2-D, got shape {self.beats.shape}")
        if self.labels.shape != (self.beats.shape[0],):
            raise ValueError(f"{self.beats.shape[0]} beats but {self.labels.size} labels")
        if self.split not in ("train", "test"):
            raise ValueError(f"split must be 'train' or 'test', got {self.split!r}")
        unknown = set(np.unique(self.labels)) - set(self.class_names)
        if unknown:
            raise ValueError(f"labels {sorted(unknown)} missing from class_names")

    def __len__(self) -> int:
        return self.beats.shape[0]

    @property
    def beat_length(self) -> int:
        return self.beats.shape[1]

    def class_counts(self) -> dict[int, int]:
        """Beat count per class id, covering every known class."""
        counts = {cid: 0 for cid in sorted(self.class_names)}
        ids, n = np.unique(self.labels, return_counts=True)
        counts.update(zip(ids.tolist(), n.tolist()))
        return counts


@dataclass
class SmoteConfig:
    """Oversampling parameters: neighborhood size, per-class targets, seed."""

    target_counts: dict[int, int] = field(default_factory=dict)
    k_neighbors: int = DEFAULT_K_NEIGHBORS
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError(f"k_neighbors must be >= 1, got {self.k_neighbors}")


def load_csv(path, class_names: dict[int, str] | None = None,
             split: str = "train") -> BeatDataset:
    """Load a beat CSV: beat_length float fields plus an integer label field.

    The beat length is inferred from the first row and enforced on the rest.
    When ``class_names`` is given, rows with labels outside it are rejected;
    otherwise names default to the string form of each label present.
    Errors name the offending 1-based row.
    """
    beats = []
    labels = []
    beat_length = None
    with open(path, newline="") as fh:
        for row_num, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                values = np.asarray(row, dtype=np.float64)
            except ValueError:
                raise ValueError(f"{path}: row {row_num}: non-numeric field") from None
            if beat_length is None:
                if values.size < 3:
                    raise ValueError(f"{path}: row {row_num}: need at least 2 samples "
                                     f"plus a label, got {values.size} fields")
                beat_length = values.size - 1
            elif values.size != beat_length + 1:
                raise ValueError(f"{path}: row {row_num}: expected {beat_length + 1} "
                                 f"fields, got {values.size}")
            if not np.isfinite(values).all():
                raise ValueError(f"{path}: row {row_num}: non-finite value")
            raw_label = values[-1]
            if raw_label != int(raw_label):
                raise ValueError(f"{path}: row {row_num}: label {raw_label} is not an integer")
            label = int(raw_label)
            if class_names is not None and label not in class_names:
                raise ValueError(f"{path}: row {row_num}: unknown label {label}")
            beats.append(values[:-1])
            labels.append(label)
    if beat_length is None:
        raise ValueError(f"{path}: no beats found")
    if class_names is None:
        class_names = {cid: str(cid) for cid in sorted(set(labels))}
    return BeatDataset(np.vstack(beats), np.asarray(labels), dict(class_names), split)


def balance_targets(dataset: BeatDataset) -> dict[int, int]:
    """Per-class targets that bring every class up to the majority count."""
    counts = dataset.class_counts()
    top = max(counts.values())
    return {cid: top for cid in counts}


def _knn_indices(points: np.ndarray, k: int, chunk: int = 256) -> np.ndarray:
    """Exact k-nearest-neighbor index table (self excluded, ties by index)."""
    m = points.shape[0]
    nn = np.empty((m, k), dtype=np.int64)
    sq = np.einsum("ij,ij->i", points, points)
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        block = points[start:stop]
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (block @ points.T)
        d2[np.arange(stop - start), np.arange(start, stop)] = np.inf
        order = np.argsort(d2, axis=1, kind="stable")
        nn[start:stop] = order[:, :k]
    return nn


def smote(dataset: BeatDataset, config: SmoteConfig) -> BeatDataset:
    """Upsample minority classes by interpolating between same-class neighbors.

    Each synthetic beat is x + u * (x_nn - x) for a random class member x,
    one of its k nearest same-class neighbors x_nn (Euclidean distance in raw
    beat space), and u uniform in [0, 1). Originals are kept untouched ahead
    of the synthetics, per-class counts match the targets exactly, and the
    output is deterministic for a fixed seed. Test splits are rejected:
    evaluating on synthetic beats is meaningless.
    """
    if dataset.split != "train":
        raise ValueError("oversampling is restricted to the train split")
    counts = dataset.class_counts()
    for cid, target in config.target_counts.items():
        if cid not in counts:
            raise ValueError(f"target for unknown class {cid}")
        if target < counts[cid]:
            raise ValueError(f"class {cid}: target {target} below current count {counts[cid]}")

    rng = np.random.default_rng(config.seed)
    new_beats = [dataset.beats]
    new_labels = [dataset.labels]
    for cid in sorted(config.target_counts):
        needed = config.target_counts[cid] - counts[cid]
        if needed == 0:
            continue
        members = dataset.beats[dataset.labels == cid]
        if members.shape[0] < 2:
            raise ValueError(f"class {cid}: needs at least 2 members to oversample, "
                             f"has {members.shape[0]}")
        if config.k_neighbors >= members.shape[0]:
            raise ValueError(f"class {cid}: k_neighbors={config.k_neighbors} requires "
                             f"more than {config.k_neighbors} members, has {members.shape[0]}")
        neighbors = _knn_indices(members, config.k_neighbors)
        synth = np.empty((needed, dataset.beat_length))
        for i in range(needed):
            base = rng.integers(members.shape[0])
            pick = neighbors[base, rng.integers(config.k_neighbors)]
            u = rng.random()
            synth[i] = members[base] + u * (members[pick] - members[base])
        new_beats.append(synth)
        new_labels.append(np.full(needed, cid, dtype=np.int64))
    return BeatDataset(np.concatenate(new_beats), np.concatenate(new_labels),
                       dict(dataset.class_names), dataset.split)


def encode_dataset(dataset: BeatDataset,
                   config: EncoderConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Encode every beat to a fused image, returning (tensor, labels).

    The tensor has shape (n, 3, size, size) in float32 with rows aligned to
    ``labels``; beat order is preserved. Encoder failures abort with the
    offending beat index.
    """
    cfg = config if config is not None else EncoderConfig()
    tensor = np.zeros((len(dataset), 3, cfg.size, cfg.size), dtype=np.float32)
    for i in range(len(dataset)):
        try:
            fused = encode_fused(dataset.beats[i], cfg)
        except ValueError as exc:
            raise ValueError(f"beat {i}: {exc}") from exc
        tensor[i] = fused.channels.astype(np.float32)
    return tensor, dataset.labels.copy()
