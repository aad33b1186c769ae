"""Labeled dataset generation for the configuration-learning classifiers.

One sample per (speed, distance, repeat) grid cell: the six configurations
are simulated, the label is the throughput-maximizing configuration index,
and the feature vector is built from the received waveform captured under
that winning configuration -- the magnitudes of the 32 post-DFT bins of the
first data OFDM symbol on the first four photodetectors, flattened
detector-major into 128 nonnegative reals.
"""

from dataclasses import dataclass

import numpy as np

from . import linksim, phy
from . import channel as ch
from .errors import ContractError, ParseError
from .seeding import make_rng

N_FEATURES = 128
FEATURE_DETECTORS = 4

TASKS = ("binary_freq", "binary_time", "binary_rate", "three_class",
         "six_class")


@dataclass(frozen=True)
class DatasetPlan:
    """Grid reproducing the published dataset: 4 speeds x 60 distances x 4."""

    speeds_m_s: tuple = (0.1, 0.3, 0.4, 0.5)
    distances_m: tuple = tuple(float(d) for d in range(1, 61))
    repeats: int = 4

    @property
    def n_samples(self) -> int:
        return len(self.speeds_m_s) * len(self.distances_m) * self.repeats

    def sweep_plan(self) -> linksim.SweepPlan:
        return linksim.SweepPlan(speeds_m_s=self.speeds_m_s,
                                 distances_m=self.distances_m,
                                 repeats=self.repeats)


@dataclass(eq=False)
class MLSample:
    features: np.ndarray       # (128,) nonnegative reals
    label6: int                # 1..6
    distance_m: float
    speed_m_s: float
    repeat: int


def extract_features(capture: phy.FrameWaveform,
                     ofdm: phy.OfdmParams = None) -> np.ndarray:
    """128 bin magnitudes: 32 post-DFT bins x first 4 detectors.

    The capture must hold at least one data OFDM symbol on at least four
    detectors; only the first data symbol and detectors 0..3 contribute.
    """
    ofdm = ofdm or phy.OfdmParams()
    samples = np.atleast_2d(capture.samples)
    if samples.shape[0] < FEATURE_DETECTORS:
        raise ContractError(
            f"feature capture needs >= {FEATURE_DETECTORS} detectors")
    sym = capture.data_symbol_samples(ofdm)[:FEATURE_DETECTORS]
    bins = phy.ofdm_demodulate(sym, ofdm)
    return np.abs(bins).reshape(-1)


def generate(plan: DatasetPlan, seed: int,
             link: ch.OpticalLinkParams = None,
             ofdm: phy.OfdmParams = None,
             options: linksim.SimOptions = None,
             progress=None):
    """Simulate the grid and return (samples, sweep_rows).

    Samples come back in canonical (speed, distance, repeat) order; each
    carries the label of the throughput-maximizing configuration and the
    features extracted from that configuration's captured waveform.
    """
    ofdm = ofdm or phy.OfdmParams()
    rows = linksim.sweep(plan.sweep_plan(), seed, link=link, ofdm=ofdm,
                         options=options, keep_captures=True,
                         progress=progress)
    n_cfg = len(linksim.CONFIGS)
    per_cell = plan.repeats * n_cfg
    samples = []
    for start in range(0, len(rows), per_cell):
        cell = rows[start:start + per_cell]
        for rep in range(plan.repeats):
            group = cell[rep * n_cfg:(rep + 1) * n_cfg]
            label = linksim.optimal_config(group)
            winner = group[label - 1]
            samples.append(MLSample(
                features=extract_features(winner.capture, ofdm),
                label6=label,
                distance_m=winner.distance_m,
                speed_m_s=winner.speed_m_s,
                repeat=rep,
            ))
    return samples, rows


def project_labels(labels6, task: str) -> np.ndarray:
    """Project six-class labels onto one of the five classification tasks.

    binary tasks return 0/1 (1 = spreading on / long code); three_class
    returns 1..3 by spreading family; six_class is the identity.
    """
    labels6 = np.asarray(labels6, dtype=int)
    if np.any((labels6 < 1) | (labels6 > 6)):
        raise ContractError("six-class labels must lie in 1..6")
    if task == "binary_freq":
        return (labels6 >= 3).astype(int)
    if task == "binary_time":
        return (labels6 >= 5).astype(int)
    if task == "binary_rate":
        return (labels6 % 2 == 0).astype(int)
    if task == "three_class":
        return (labels6 + 1) // 2
    if task == "six_class":
        return labels6.copy()
    raise ContractError(f"unknown task {task!r}; valid: {TASKS}")


def feature_matrix(samples) -> np.ndarray:
    return np.stack([s.features for s in samples])


def labels6_of(samples) -> np.ndarray:
    return np.array([s.label6 for s in samples], dtype=int)


def kfold_split(n_samples: int, k: int, seed: int, labels=None):
    """Disjoint index folds covering range(n_samples); sizes differ by <= 1.

    With ``labels`` given the split is stratified: each class is shuffled
    and dealt round-robin, the dealing offset carrying over between classes
    so overall fold sizes stay balanced.
    """
    if k < 2:
        raise ContractError("k must be >= 2")
    if n_samples < k:
        raise ContractError("need at least k samples")
    rng = make_rng(seed)
    folds = [[] for _ in range(k)]
    if labels is None:
        order = rng.permutation(n_samples)
        for pos, idx in enumerate(order):
            folds[pos % k].append(idx)
    else:
        labels = np.asarray(labels)
        if labels.shape != (n_samples,):
            raise ContractError("labels must match the sample count")
        offset = 0
        for value in np.unique(labels):
            members = rng.permutation(np.flatnonzero(labels == value))
            for pos, idx in enumerate(members):
                folds[(offset + pos) % k].append(idx)
            offset = (offset + len(members)) % k
    return [np.sort(np.array(f, dtype=int)) for f in folds]


# ---------------------------------------------------------------------------
# CSV serialization

_BASE_COLUMNS = ("sample_id", "speed_mps", "distance_m", "repeat", "label6")
CSV_HEADER = ",".join(_BASE_COLUMNS
                      + tuple(f"f{i:03d}" for i in range(N_FEATURES)))


def save(samples, path):
    """Write the dataset CSV; floats use shortest round-trip decimals."""
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for i, s in enumerate(samples):
            feats = ",".join(repr(float(v)) for v in s.features)
            fh.write(f"{i},{s.speed_m_s!r},{s.distance_m!r},{s.repeat},"
                     f"{s.label6},{feats}\n")


def load(path):
    """Read a dataset CSV back into samples; bit-faithful round trip."""
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        if not header:
            raise ParseError("empty dataset file", line=1)
        columns = header.split(",")
        expected = CSV_HEADER.split(",")
        if columns != expected:
            for got, want in zip(columns, expected):
                if got != want:
                    raise ParseError(
                        f"header mismatch: expected column {want!r}, got "
                        f"{got!r}", line=1)
            raise ParseError("header has wrong column count", line=1)
        samples = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(expected):
                raise ParseError("wrong column count", line=lineno)
            try:
                samples.append(MLSample(
                    features=np.array([float(v) for v in parts[5:]]),
                    label6=int(parts[4]),
                    distance_m=float(parts[2]),
                    speed_m_s=float(parts[1]),
                    repeat=int(parts[3]),
                ))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
    if not samples:
        raise ParseError("dataset file holds no samples", line=2)
    return samples
