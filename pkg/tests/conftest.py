import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))  # makes oracles importable


def make_beats(rng, n_per_class, length=187, noise=0.1):
    """Three-morphology toy corpus: sine, square, and upward-chirp beats."""
    t = np.arange(length) / length
    beats, labels = [], []
    for cid in range(3):
        for _ in range(n_per_class):
            freq = rng.uniform(3.0, 6.0)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            amp = rng.uniform(0.8, 1.2)
            if cid == 0:
                y = amp * np.sin(2.0 * np.pi * freq * t + phase)
            elif cid == 1:
                y = amp * np.sign(np.sin(2.0 * np.pi * freq * t + phase))
            else:
                y = amp * np.sin(2.0 * np.pi * (freq * t + 4.0 * t * t) + phase)
            beats.append(y + rng.normal(0.0, noise, length))
            labels.append(cid)
    return np.asarray(beats), np.asarray(labels)


def write_beats_csv(path, beats, labels):
    lines = []
    for row, label in zip(beats, labels):
        lines.append(",".join(format(v, ".10g") for v in row) + f",{label}")
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)
