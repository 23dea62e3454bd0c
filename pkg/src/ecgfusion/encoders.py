"""Signal-to-image transforms for fixed-length 1-D series.

Three encoders turn one series into one square grayscale image each:

* ``gasf`` -- angular summation field: rescale to [0, 1], read each value
  as the cosine of an angle, image pixel (i, k) = cos(angle_i + angle_k).
* ``recurrence_plot`` -- pixel (i, j) marks whether samples i and j lie
  within a threshold of each other (binary), or their scaled distance.
* ``mtf_image`` -- pixel (i, j) is the first-order transition probability
  between the quantile bins holding samples i and j.

``fuse`` stacks one image of each kind, resized to a common side length,
into a single three-channel tensor with fixed channel order (GAF, RP, MTF).
All arithmetic is float64; quantization happens only at image export.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

CHANNEL_ORDER = ("gaf", "rp", "mtf")

# Native pixel ranges per image kind; PNG export maps these linearly to 0-255.
VALUE_RANGES = {"gaf": (-1.0, 1.0), "rp": (0.0, 1.0), "mtf": (0.0, 1.0)}

DEFAULT_BINS = 10
DEFAULT_EPS_FRACTION = 0.1
DEFAULT_FUSE_SIZE = 227

# Slack for float overshoot when validating values expected to sit in [0, 1].
_RANGE_TOL = 1e-9


def _as_samples(series) -> np.ndarray:
    """Coerce a TimeSeries or array-like to a validated 1-D float64 vector."""
    if isinstance(series, TimeSeries):
        return series.samples
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"series must be 1-D, got shape {x.shape}")
    if x.size < 2:
        raise ValueError(f"series needs at least 2 samples, got {x.size}")
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise ValueError(f"non-finite sample at index {bad[0]}")
    return x


@dataclass
class TimeSeries:
    """One beat: a fixed-length real vector with an optional class label."""

    samples: np.ndarray
    label: int | None = None

    def __post_init__(self):
        self.samples = _as_samples(np.asarray(self.samples, dtype=np.float64))
        if self.label is not None:
            self.label = int(self.label)

    def __len__(self) -> int:
        return self.samples.size


@dataclass
class RescaledSeries:
    """Series mapped onto [0, 1], remembering the original value range."""

    samples: np.ndarray
    source_min: float
    source_max: float


@dataclass
class PolarEncoding:
    """Polar view of a rescaled series: values as angles, time as radius.

    ``angles[i] = arccos(samples[i])`` lies in [0, pi/2]; ``radii[i]`` is the
    1-based time stamp divided by ``regularizer`` (the series length), so
    radii increase strictly through (0, 1]. The radii are not consumed by the
    angular-field image but are kept as part of the encoding.
    """

    angles: np.ndarray
    radii: np.ndarray
    regularizer: int


@dataclass
class GrayImage:
    """Single-channel image from one encoder, with its declared value range."""

    pixels: np.ndarray
    kind: str
    value_range: tuple[float, float]

    def __post_init__(self):
        if self.kind not in CHANNEL_ORDER:
            raise ValueError(f"unknown image kind {self.kind!r}")
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2:
            raise ValueError(f"image pixels must be 2-D, got shape {self.pixels.shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape


@dataclass
class FusedImage:
    """Three-channel stack of GAF, RP, and MTF images of identical size.

    The channel order is fixed and never permuted; ``fuse`` rejects images
    passed in the wrong slots.
    """

    channels: np.ndarray  # (3, side, side)

    channel_order: ClassVar[tuple[str, str, str]] = CHANNEL_ORDER

    def __post_init__(self):
        self.channels = np.asarray(self.channels, dtype=np.float64)
        if self.channels.ndim != 3 or self.channels.shape[0] != 3:
            raise ValueError(f"fused image must be (3, S, S), got {self.channels.shape}")
        if self.channels.shape[1] != self.channels.shape[2]:
            raise ValueError(f"fused channels must be square, got {self.channels.shape}")

    @property
    def side(self) -> int:
        return self.channels.shape[1]


@dataclass
class MtfModel:
    """Quantile binning plus the bin-to-bin transition matrix of one series.

    ``bin_edges`` holds the n_bins - 1 interior empirical quantiles; a sample
    equal to an edge is assigned to the lower bin. Each row of ``transitions``
    sums to 1, or is entirely zero when its bin has no outgoing transitions.
    """

    n_bins: int
    bin_edges: np.ndarray
    transitions: np.ndarray

    def assign(self, series) -> np.ndarray:
        """Bin index in [0, n_bins) for every sample, edge ties going lower."""
        x = _as_samples(series)
        return np.digitize(x, self.bin_edges, right=True)


@dataclass
class EncoderConfig:
    """Knobs for the per-beat encode-and-fuse step."""

    size: int = DEFAULT_FUSE_SIZE
    n_bins: int = DEFAULT_BINS
    eps_fraction: float = DEFAULT_EPS_FRACTION
    rp_mode: str = "binary"
    mtf_layout: str = "field"

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"size must be >= 1, got {self.size}")
        if self.n_bins < 2:
            raise ValueError(f"n_bins must be >= 2, got {self.n_bins}")
        if self.rp_mode not in ("binary", "distance"):
            raise ValueError(f"rp_mode must be 'binary' or 'distance', got {self.rp_mode!r}")
        if self.mtf_layout not in ("field", "matrix"):
            raise ValueError(f"mtf_layout must be 'field' or 'matrix', got {self.mtf_layout!r}")


def rescale_unit(series) -> RescaledSeries:
    """Affinely map a series onto [0, 1].

    A constant series maps to all 0.5 rather than erroring, so batch
    pipelines survive flatline beats.
    """
    x = _as_samples(series)
    lo = float(x.min())
    hi = float(x.max())
    if hi > lo:
        scaled = (x - lo) / (hi - lo)
    else:
        scaled = np.full_like(x, 0.5)
    return RescaledSeries(scaled, lo, hi)


def polar_encode(rescaled) -> PolarEncoding:
    """Encode a [0, 1] series as angles via arccos, time stamps as radii."""
    if isinstance(rescaled, RescaledSeries):
        x = rescaled.samples
    else:
        x = _as_samples(rescaled)
    if float(x.min()) < -_RANGE_TOL or float(x.max()) > 1.0 + _RANGE_TOL:
        raise ValueError("polar encoding expects samples rescaled to [0, 1]")
    angles = np.arccos(np.clip(x, 0.0, 1.0))
    n = x.size
    radii = np.arange(1, n + 1, dtype=np.float64) / n
    return PolarEncoding(angles, radii, n)


def gasf(series) -> GrayImage:
    """Angular summation field of a series.

    Pixel (i, k) is cos(angle_i + angle_k) for the arccos angles of the
    rescaled samples, expanded as x_i*x_k - sqrt((1-x_i^2)*(1-x_k^2)) so
    that symmetry and the [-1, 1] range hold exactly in floating point.
    """
    x = rescale_unit(series).samples
    q = 1.0 - x * x
    pixels = np.outer(x, x) - np.sqrt(np.outer(q, q))
    return GrayImage(pixels, "gaf", VALUE_RANGES["gaf"])


def recurrence_plot(series, mode: str = "binary",
                    eps_fraction: float = DEFAULT_EPS_FRACTION) -> GrayImage:
    """Pairwise-distance image of a univariate series.

    Binary mode thresholds |x_i - x_j| at eps_fraction times the series
    range, counting exact-equality pairs as recurrent (step function is 1 at
    zero), so the diagonal is always 1 and a constant series is all ones.
    Distance mode returns |x_i - x_j| scaled into [0, 1] instead.
    """
    x = _as_samples(series)
    if mode not in ("binary", "distance"):
        raise ValueError(f"mode must be 'binary' or 'distance', got {mode!r}")
    dist = np.abs(x[:, None] - x[None, :])
    span = float(x.max() - x.min())
    if mode == "binary":
        if not 0.0 < eps_fraction <= 1.0:
            raise ValueError(f"eps_fraction must be in (0, 1], got {eps_fraction}")
        eps = eps_fraction * span
        pixels = (dist <= eps).astype(np.float64)
    else:
        pixels = dist / span if span > 0.0 else np.zeros_like(dist)
    return GrayImage(pixels, "rp", VALUE_RANGES["rp"])


def mtf_fit(series, n_bins: int = DEFAULT_BINS) -> MtfModel:
    """Fit quantile bins and the first-order bin transition matrix.

    Interior bin edges are the empirical quantiles at levels k/n_bins.
    Transition counts of consecutive sample pairs are normalized per row;
    rows of empty bins stay zero rather than being smoothed, since smoothing
    would fabricate transitions that never occurred.
    """
    x = _as_samples(series)
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    edges = np.quantile(x, np.arange(1, n_bins) / n_bins)
    model = MtfModel(n_bins, edges, np.zeros((n_bins, n_bins)))
    bins = model.assign(x)
    counts = np.zeros((n_bins, n_bins))
    np.add.at(counts, (bins[:-1], bins[1:]), 1.0)
    sums = counts.sum(axis=1, keepdims=True)
    model.transitions = np.divide(counts, sums, out=np.zeros_like(counts),
                                  where=sums > 0)
    return model


def mtf_image(series, model: MtfModel | None = None,
              layout: str = "field") -> GrayImage:
    """Transition-field image of a series.

    ``field`` (default) is the n x n image whose pixel (i, j) is the
    transition probability from the bin of sample i to the bin of sample j;
    it is generally not symmetric. ``matrix`` returns the n_bins x n_bins
    transition matrix itself as the image. Fits a model with default bins
    when none is given.
    """
    x = _as_samples(series)
    if layout not in ("field", "matrix"):
        raise ValueError(f"layout must be 'field' or 'matrix', got {layout!r}")
    if model is None:
        model = mtf_fit(x)
    if layout == "matrix":
        pixels = model.transitions.copy()
    else:
        bins = model.assign(x)
        pixels = model.transitions[np.ix_(bins, bins)]
    return GrayImage(pixels, "mtf", VALUE_RANGES["mtf"])


def _lerp_columns(a: np.ndarray, new_len: int) -> np.ndarray:
    """Linearly resample the columns of a 2-D array onto a corner-aligned grid."""
    n = a.shape[1]
    coords = np.linspace(0.0, n - 1.0, new_len)
    i0 = np.minimum(coords.astype(np.int64), n - 1)
    i1 = np.minimum(i0 + 1, n - 1)
    w = coords - i0
    lo = a[:, i0]
    # lo + w * (hi - lo) never leaves [min(lo, hi), max(lo, hi)] in floats.
    return lo + w * (a[:, i1] - lo)


def resize_bilinear(image: GrayImage, size: int) -> GrayImage:
    """Resize to size x size by bilinear interpolation.

    Sampling is corner-aligned: source coordinate = dst index *
    (src_len - 1) / (dst_len - 1), with a single output or input pixel
    degenerating to replication. Identity sizes reproduce pixels exactly and
    outputs stay within the input's value range.
    """
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    rows = _lerp_columns(image.pixels, size)
    pixels = _lerp_columns(rows.T, size).T
    return GrayImage(pixels, image.kind, image.value_range)


def fuse(gaf_image: GrayImage, rp_image: GrayImage, mtf_img: GrayImage,
         size: int = DEFAULT_FUSE_SIZE) -> FusedImage:
    """Resize the three images to a common side and stack them as channels.

    Slots are positional and checked against the fixed channel order, so a
    permuted call fails instead of silently swapping channels. No value
    renormalization happens beyond each encoder's native range.
    """
    images = (gaf_image, rp_image, mtf_img)
    for slot, img in zip(CHANNEL_ORDER, images):
        if not isinstance(img, GrayImage):
            raise ValueError(f"{slot} slot expects a GrayImage, got {type(img).__name__}")
        if img.kind != slot:
            raise ValueError(f"{slot} slot got a {img.kind!r} image; channel order is "
                             f"{'/'.join(CHANNEL_ORDER)}")
    channels = np.stack([resize_bilinear(img, size).pixels for img in images])
    return FusedImage(channels)


def encode_fused(series, config: EncoderConfig | None = None) -> FusedImage:
    """Run all three encoders on one series and fuse the results."""
    cfg = config if config is not None else EncoderConfig()
    x = _as_samples(series)
    gaf_img = gasf(x)
    rp_img = recurrence_plot(x, mode=cfg.rp_mode, eps_fraction=cfg.eps_fraction)
    mtf_img = mtf_image(x, mtf_fit(x, cfg.n_bins), layout=cfg.mtf_layout)
    return fuse(gaf_img, rp_img, mtf_img, size=cfg.size)
