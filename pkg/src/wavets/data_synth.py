"""Synthetic series generators and corpus construction.

The generator kinds cover the pattern families the pipeline should handle
well (exponential trends, sparse spikes, frequency content that switches
over time) plus the two training augmentations: convex mixtures of
generated series and draws from Gaussian processes with randomly combined
kernels. Everything is deterministic under the spec's seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .data_io import Dataset, TimeSeries

KINDS = ("trend_exp", "sparse_spikes", "multi_freq_switch", "gp_kernel_mix", "tsmixup")

_EPOCH = datetime(2020, 1, 1)


@dataclass(frozen=True)
class GeneratorSpec:
    """One synthetic series: a kind, its parameters and an RNG seed.

    ``noise_level`` adds i.i.d. Gaussian noise of that standard deviation
    on top of the clean pattern.
    """

    kind: str
    length: int
    noise_level: float = 0.0
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if self.length < 2:
            raise ValueError(f"series length must be at least 2, got {self.length}")
        if self.noise_level < 0:
            raise ValueError(f"noise level must be non-negative, got {self.noise_level}")


def _trend_exp(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    a = float(spec.params.get("a", 1.0))
    b = float(spec.params.get("b", 3.0))
    t = np.linspace(0.0, 1.0, spec.length)
    return a * np.exp(b * t)


def _sparse_spikes(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    baseline = float(spec.params.get("baseline", 0.0))
    rate = float(spec.params.get("rate", 0.02))
    lo, hi = spec.params.get("height_range", (3.0, 10.0))
    y = np.full(spec.length, baseline)
    hits = rng.random(spec.length) < rate
    n_hits = int(hits.sum())
    if n_hits:
        heights = rng.uniform(lo, hi, n_hits) * rng.choice([-1.0, 1.0], n_hits)
        y[hits] += heights
    return y


def _multi_freq_switch(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    n_segments = int(spec.params.get("n_segments", 3))
    n_freqs = int(spec.params.get("n_freqs", 2))
    if n_segments < 1 or n_freqs < 1:
        raise ValueError("n_segments and n_freqs must be positive")
    cuts = np.sort(rng.choice(np.arange(1, spec.length), size=n_segments - 1, replace=False))
    bounds = np.concatenate([[0], cuts, [spec.length]])
    t = np.arange(spec.length, dtype=np.float64)
    y = np.zeros(spec.length)
    for s0, s1 in zip(bounds[:-1], bounds[1:]):
        freqs = rng.uniform(2.0, 24.0, n_freqs) / spec.length
        phases = rng.uniform(0.0, 2.0 * np.pi, n_freqs)
        seg = sum(np.sin(2.0 * np.pi * f * t[s0:s1] + p) for f, p in zip(freqs, phases))
        y[s0:s1] = seg / n_freqs
    return y


def _gp_kernel_mix(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    n_kernels = int(spec.params.get("n_kernels", rng.integers(1, 4)))
    t = np.linspace(0.0, 1.0, spec.length)
    diff = t[:, None] - t[None, :]

    def draw_kernel() -> np.ndarray:
        name = rng.choice(["rbf", "periodic", "linear"])
        if name == "rbf":
            scale = rng.uniform(0.05, 0.5)
            return np.exp(-0.5 * (diff / scale) ** 2)
        if name == "periodic":
            period = rng.uniform(0.1, 0.5)
            scale = rng.uniform(0.5, 2.0)
            return np.exp(-2.0 * np.sin(np.pi * np.abs(diff) / period) ** 2 / scale**2)
        center = rng.uniform(0.0, 1.0)
        return (t[:, None] - center) * (t[None, :] - center)

    cov = draw_kernel()
    for _ in range(n_kernels - 1):
        if rng.random() < 0.5:
            cov = cov + draw_kernel()
        else:
            cov = cov * draw_kernel()
    cov = cov + 1e-8 * np.eye(spec.length)
    chol = np.linalg.cholesky(cov)
    return chol @ rng.standard_normal(spec.length)


def _tsmixup(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    components = spec.params.get("components")
    if components is None:
        n_parts = int(spec.params.get("n_components", rng.integers(1, 4)))
        base_kinds = [k for k in KINDS if k != "tsmixup"]
        components = [
            GeneratorSpec(
                kind=str(rng.choice(base_kinds)),
                length=spec.length,
                noise_level=0.0,
                seed=int(rng.integers(0, 2**63)),
            )
            for _ in range(n_parts)
        ]
    if not 1 <= len(components) <= 3:
        raise ValueError(f"tsmixup takes 1-3 components, got {len(components)}")
    if any(c.length != spec.length for c in components):
        raise ValueError("tsmixup components must share the mixture's length")
    weights = rng.dirichlet(np.ones(len(components)))
    stacked = np.stack([generate(c).values for c in components])
    return weights @ stacked


_GENERATORS = {
    "trend_exp": _trend_exp,
    "sparse_spikes": _sparse_spikes,
    "multi_freq_switch": _multi_freq_switch,
    "gp_kernel_mix": _gp_kernel_mix,
    "tsmixup": _tsmixup,
}


def generate(spec: GeneratorSpec) -> TimeSeries:
    """Materialize one series; identical specs yield identical series."""
    rng = np.random.default_rng(spec.seed)
    values = _GENERATORS[spec.kind](spec, rng)
    if spec.noise_level > 0:
        values = values + spec.noise_level * rng.standard_normal(spec.length)
    return TimeSeries(
        item_id=f"{spec.kind}-{spec.seed}",
        start=_EPOCH,
        freq="h",
        values=values,
    )


def draw_corpus_kinds(n_series: int, mix: tuple[float, float], seed: int) -> list[str]:
    """Per-series generator kinds: ``tsmixup`` with probability ``mix[0]``,
    ``gp_kernel_mix`` with probability ``mix[1]``."""
    if n_series < 1:
        raise ValueError(f"need at least one series, got {n_series}")
    if not np.isclose(sum(mix), 1.0):
        raise ValueError(f"mixture probabilities must sum to 1, got {mix}")
    picker = np.random.default_rng(np.random.SeedSequence(seed).generate_state(1)[0])
    return ["tsmixup" if picker.random() < mix[0] else "gp_kernel_mix" for _ in range(n_series)]


def make_corpus(
    n_series: int,
    mix: tuple[float, float] = (0.9, 0.1),
    context_length: int = 512,
    horizon: int = 64,
    seed: int = 0,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Training windows: mixture-augmented series with GP draws mixed in.

    Each series is generated at length ``context_length + horizon`` from a
    per-series derived seed and split into a (context, horizon) pair of
    exactly those lengths.
    """
    kinds = draw_corpus_kinds(n_series, mix, seed)
    total = context_length + horizon
    children = np.random.SeedSequence(seed).spawn(n_series)
    pairs = []
    for kind, child in zip(kinds, children):
        child_seed = int(child.generate_state(1)[0])
        series = generate(GeneratorSpec(kind=kind, length=total, seed=child_seed))
        pairs.append((series.values[:context_length], series.values[context_length:]))
    return pairs


def make_dataset(
    n_series: int,
    mix: tuple[float, float] = (0.9, 0.1),
    context_length: int = 512,
    horizon: int = 64,
    seed: int = 0,
    freq: str = "h",
) -> Dataset:
    """Synthetic dataset of full-length series (context plus horizon),
    suitable for the file formats and the held-out-tail split."""
    pairs = make_corpus(n_series, mix, context_length, horizon, seed)
    series = [
        TimeSeries(
            item_id=f"synth-{i:05d}",
            start=_EPOCH,
            freq=freq,
            values=np.concatenate([ctx, hor]),
        )
        for i, (ctx, hor) in enumerate(pairs)
    ]
    return Dataset(series=series, freq=freq, prediction_length=horizon)
