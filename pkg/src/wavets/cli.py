"""Batch command-line front end.

Subcommands cover the full workflow: ``synth`` builds a synthetic dataset,
``fit-codebook`` pools training coefficients into a quantization codebook,
``tokenize``/``detokenize`` map datasets to token records and back,
``train``/``forecast``/``eval`` fit the reference sequence model, draw
sample paths and score them against the internally computed seasonal-naive
baseline, and ``ablate`` sweeps a configuration grid.

Configuration precedence is flags > config file (YAML or JSON) > defaults;
the defaults mirror the empirically optimal pipeline settings. Every
output file embeds the configuration fingerprint, and commands refuse to
mix artifacts with mismatched fingerprints.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import itertools
import json
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from .codebook import codebook_hash, fit_codebook, load_codebook, save_codebook
from .data_io import Dataset, load_dataset, save_dataset, split_last_h
from .data_synth import make_dataset
from .dwt import decompose
from .exceptions import FingerprintMismatchError, WavetsError
from .families import get_family
from .metrics import (
    QUANTILE_LEVELS,
    aggregate_relative,
    average_rank,
    mase,
    sample_quantiles,
    seasonal_naive,
    seasonality_for_freq,
    vrse,
    wql,
)
from .seq_model import load_model, sample_forecast, save_model, train_markov
from .thresholding import ThresholdSpec, apply_threshold
from .tokenizer import (
    TokenizerConfig,
    compute_scale,
    detokenize,
    fill_missing,
    pad_to_length,
    stream_from_record,
    stream_to_record,
    tokenize_pair,
)

_DEFAULTS = {
    "family": "bior2.2",
    "level": 1,
    "threshold_method": "none",
    "threshold_b": 0.5,
    "threshold_q": 0.05,
    "sigma_estimator": "mad_finest",
    "vocab_budget": 1024,
    "bound_lo": -30.0,
    "bound_hi": 30.0,
    "context_length": 512,
    "horizon": 64,
    "order": 3,
    "alpha": 0.1,
    "n_samples": 20,
    "temperature": 1.0,
    "seed": 0,
    "boundary_mode": "symmetric",
    "mix_tsmixup": 0.9,
}


@dataclass(frozen=True)
class RunConfig:
    """Validated pipeline configuration; hashable to a stable
    fingerprint."""

    family: str = "bior2.2"
    level: int = 1
    threshold_method: str = "none"
    threshold_b: float = 0.5
    threshold_q: float = 0.05
    sigma_estimator: str = "mad_finest"
    vocab_budget: int = 1024
    bound_lo: float = -30.0
    bound_hi: float = 30.0
    context_length: int = 512
    horizon: int = 64
    order: int = 3
    alpha: float = 0.1
    n_samples: int = 20
    temperature: float = 1.0
    seed: int = 0
    boundary_mode: str = "symmetric"
    mix_tsmixup: float = 0.9

    def __post_init__(self):
        get_family(self.family)  # raises for unknown names
        self.threshold_spec()  # validates method and parameters
        if self.level < 1:
            raise ValueError(f"decomposition level must be positive, got {self.level}")
        if self.vocab_budget < 5:
            raise ValueError(f"vocabulary budget must be at least 5, got {self.vocab_budget}")
        if not self.bound_lo < 0.0 < self.bound_hi:
            raise ValueError(f"bounds must straddle 0, got ({self.bound_lo}, {self.bound_hi})")
        if self.context_length < 2 or self.horizon < 2:
            raise ValueError("context length and horizon must be at least 2")
        if self.order < 1:
            raise ValueError(f"model order must be at least 1, got {self.order}")
        if self.alpha <= 0:
            raise ValueError(f"smoothing must be positive, got {self.alpha}")
        if self.n_samples < 1:
            raise ValueError(f"need at least one sample path, got {self.n_samples}")
        if not 0.0 <= self.mix_tsmixup <= 1.0:
            raise ValueError(f"mixup probability must be in [0, 1], got {self.mix_tsmixup}")

    def threshold_spec(self) -> ThresholdSpec:
        return ThresholdSpec(
            method=self.threshold_method,
            b=self.threshold_b,
            q=self.threshold_q,
            sigma_estimator=self.sigma_estimator,
        )

    def tokenizer_config(self) -> TokenizerConfig:
        return TokenizerConfig(
            family=self.family,
            level=self.level,
            threshold=self.threshold_spec(),
            boundary_mode=self.boundary_mode,
        )

    def bounds(self) -> tuple[float, float]:
        return (self.bound_lo, self.bound_hi)

    def fingerprint(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def build_config(args) -> RunConfig:
    """Merge defaults, config file and command-line flags."""
    merged = dict(_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        loaded = yaml.safe_load(Path(config_path).read_text()) or {}
        if not isinstance(loaded, dict):
            raise ValueError(f"config file {config_path} must hold a mapping")
        unknown = set(loaded) - set(_DEFAULTS) - {"grid"}
        if unknown:
            raise ValueError(f"unknown config keys in {config_path}: {sorted(unknown)}")
        merged.update({k: v for k, v in loaded.items() if k != "grid"})
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return RunConfig(**merged)


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="YAML/JSON config file")
    parser.add_argument("--family", help="wavelet family name")
    parser.add_argument("--level", type=int, help="decomposition level")
    parser.add_argument("--threshold-method", dest="threshold_method",
                        help="none | cdf | visu_soft | visu_hard | fdrc")
    parser.add_argument("--threshold-b", dest="threshold_b", type=float,
                        help="cutoff base for cdf thresholding")
    parser.add_argument("--threshold-q", dest="threshold_q", type=float,
                        help="error level for fdrc thresholding")
    parser.add_argument("--sigma-estimator", dest="sigma_estimator",
                        help="mad_finest | std_finest")
    parser.add_argument("--vocab-budget", dest="vocab_budget", type=int,
                        help="total vocabulary size budget")
    parser.add_argument("--bound-lo", dest="bound_lo", type=float, help="lower quantization bound")
    parser.add_argument("--bound-hi", dest="bound_hi", type=float, help="upper quantization bound")
    parser.add_argument("--context-length", dest="context_length", type=int)
    parser.add_argument("--horizon", type=int)
    parser.add_argument("--order", type=int, help="Markov model order")
    parser.add_argument("--alpha", type=float, help="Markov smoothing constant")
    parser.add_argument("--n-samples", dest="n_samples", type=int, help="sample paths per series")
    parser.add_argument("--temperature", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--boundary-mode", dest="boundary_mode",
                        help="symmetric | periodization")
    parser.add_argument("--mix-tsmixup", dest="mix_tsmixup", type=float,
                        help="probability of tsmixup (vs GP) in synthetic corpora")


def _windows(dataset: Dataset, config: RunConfig):
    """(item_id, fixed-length context, horizon) triples for every usable
    series; short contexts are left-padded with missing values."""
    _, pairs = split_last_h(dataset, config.horizon, config.context_length)
    return [
        (p.item_id, pad_to_length(p.context, config.context_length), p.horizon) for p in pairs
    ]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_synth(args) -> int:
    config = build_config(args)
    dataset = make_dataset(
        n_series=args.n_series,
        mix=(config.mix_tsmixup, 1.0 - config.mix_tsmixup),
        context_length=config.context_length,
        horizon=config.horizon,
        seed=config.seed,
    )
    dataset.meta = {"fingerprint": config.fingerprint()}
    save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} series to {args.out} (fingerprint {config.fingerprint()})")
    return 0


def cmd_fit_codebook(args) -> int:
    config = build_config(args)
    dataset = load_dataset(args.data)
    windows = _windows(dataset, config)
    if not windows:
        print("error: no usable training windows", file=sys.stderr)
        return 1
    family = get_family(config.family)
    spec = config.threshold_spec()
    pool = []
    for _, context, horizon in windows:
        scale = compute_scale(context)
        for window in (context, horizon):
            if not np.isfinite(window).any():
                continue
            z = (fill_missing(window) - scale.mu) / scale.sigma
            pyramid = apply_threshold(decompose(z, family, config.level, config.boundary_mode), spec)
            pool.append(pyramid.approx)
            pool.extend(pyramid.details)
    sample = np.concatenate(pool)
    codebook = fit_codebook(sample, config.vocab_budget, config.bounds())
    save_codebook(codebook, args.out)
    clamped = np.sum((sample < codebook.edges[0]) | (sample >= codebook.edges[-1]))
    print(
        f"fit {codebook.n_bins} bins (vocabulary {codebook.vocab_size}) "
        f"width {codebook.bin_width:.6g} clamp rate {clamped / sample.size:.4%} "
        f"hash {codebook_hash(codebook)} fingerprint {config.fingerprint()}"
    )
    return 0


def _check_fingerprint(found: str | None, expected: str, source: str):
    if found is not None and found != expected:
        raise FingerprintMismatchError(
            f"{source} was produced under fingerprint {found}, current configuration is {expected}"
        )


def cmd_tokenize(args) -> int:
    config = build_config(args)
    dataset = load_dataset(args.data)
    codebook = load_codebook(args.codebook)
    tok_config = config.tokenizer_config()
    fingerprint = config.fingerprint()
    cb_hash = codebook_hash(codebook)
    failures = []
    n_tokens = 0
    n_pad = 0
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"__meta__": {
            "fingerprint": fingerprint, "codebook": cb_hash,
            "family": config.family, "level": config.level}}, sort_keys=True) + "\n")
        for item_id, context, horizon in _windows(dataset, config):
            try:
                ctx_stream, hor_stream = tokenize_pair(context, horizon, tok_config, codebook)
            except Exception as exc:  # per-series isolation
                failures.append((item_id, exc))
                continue
            for kind, stream in (("context", ctx_stream), ("horizon", hor_stream)):
                record = {"item_id": item_id, "kind": kind, **stream_to_record(stream)}
                fh.write(json.dumps(record, sort_keys=True) + "\n")
                n_tokens += len(stream.tokens)
                n_pad += int(np.sum(stream.tokens == codebook.pad_id))
    pad_rate = n_pad / n_tokens if n_tokens else 0.0
    print(f"tokenized {args.data}: PAD rate {pad_rate:.4%}, fingerprint {fingerprint}")
    for item_id, exc in failures:
        print(f"error: series {item_id!r}: {exc}", file=sys.stderr)
    return 1 if failures else 0


def _read_token_records(path):
    meta = {}
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "__meta__" in record:
                meta = record["__meta__"]
            else:
                records.append(record)
    return meta, records


def cmd_detokenize(args) -> int:
    config = build_config(args)
    codebook = load_codebook(args.codebook)
    meta, records = _read_token_records(args.tokens)
    _check_fingerprint(meta.get("codebook"), codebook_hash(codebook), args.tokens)
    _check_fingerprint(meta.get("fingerprint"), config.fingerprint(), args.tokens)
    reference = {}
    if args.reference:
        ref_ds = load_dataset(args.reference)
        for item_id, context, horizon in _windows(ref_ds, config):
            reference[(item_id, "context")] = context
            reference[(item_id, "horizon")] = horizon
    errors = []
    failures = []
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"__meta__": meta}, sort_keys=True) + "\n")
        for record in records:
            try:
                stream = stream_from_record(record)
                values = detokenize(stream, codebook)
            except Exception as exc:
                failures.append((record.get("item_id"), exc))
                continue
            fh.write(json.dumps({
                "item_id": record["item_id"], "kind": record["kind"],
                "values": [float(v) for v in values]}, sort_keys=True) + "\n")
            key = (record["item_id"], record["kind"])
            if key in reference:
                truth = reference[key]
                observed = np.isfinite(truth)
                if observed.any():
                    errors.append(
                        float(np.sqrt(np.mean((values[observed] - truth[observed]) ** 2)))
                    )
    if errors:
        print(f"reconstruction RMSE over {len(errors)} windows: mean {np.mean(errors):.6g} "
              f"max {np.max(errors):.6g}")
    print(f"wrote {args.out}")
    for item_id, exc in failures:
        print(f"error: record {item_id!r}: {exc}", file=sys.stderr)
    return 1 if failures else 0


def cmd_train(args) -> int:
    config = build_config(args)
    codebook = load_codebook(args.codebook)
    meta, records = _read_token_records(args.tokens)
    _check_fingerprint(meta.get("codebook"), codebook_hash(codebook), args.tokens)
    _check_fingerprint(meta.get("fingerprint"), config.fingerprint(), args.tokens)
    by_item: dict[str, dict] = {}
    for record in records:
        by_item.setdefault(record["item_id"], {})[record["kind"]] = stream_from_record(record)
    corpus = [
        (streams["context"], streams["horizon"])
        for streams in by_item.values()
        if "context" in streams and "horizon" in streams
    ]
    model = train_markov(
        corpus, order=config.order, alpha=config.alpha,
        vocab_size=codebook.vocab_size, pad_id=codebook.pad_id,
    )
    save_model(model, args.out, meta={
        "fingerprint": config.fingerprint(), "codebook": codebook_hash(codebook)})
    print(f"trained order-{config.order} model on {len(corpus)} pairs -> {args.out}")
    return 0


_WORKER_STATE: dict = {}


def _forecast_init(model_path: str, codebook_path: str, config_blob: str):
    _WORKER_STATE["model"] = load_model(model_path)
    _WORKER_STATE["codebook"] = load_codebook(codebook_path)
    _WORKER_STATE["config"] = RunConfig(**json.loads(config_blob))


def _forecast_one(payload):
    item_id, context_values, horizon = payload
    config: RunConfig = _WORKER_STATE["config"]
    codebook = _WORKER_STATE["codebook"]
    model = _WORKER_STATE["model"]
    context = np.asarray(context_values, dtype=np.float64)
    ctx_stream, _ = tokenize_pair(
        context, np.zeros(config.horizon), config.tokenizer_config(), codebook
    )
    seed = int(
        np.random.SeedSequence(
            [config.seed, int(hashlib.sha256(item_id.encode()).hexdigest()[:8], 16)]
        ).generate_state(1)[0]
    )
    paths = sample_forecast(
        model, ctx_stream, horizon, config.tokenizer_config(), codebook,
        n_samples=config.n_samples, temperature=config.temperature, seed=seed,
    )
    return item_id, paths.tolist()


def cmd_forecast(args) -> int:
    config = build_config(args)
    codebook = load_codebook(args.codebook)
    model = load_model(args.model)
    _check_fingerprint(model.meta.get("codebook"), codebook_hash(codebook), args.model)
    _check_fingerprint(model.meta.get("fingerprint"), config.fingerprint(), args.model)
    dataset = load_dataset(args.data)
    windows = _windows(dataset, config)
    payloads = [(item_id, context.tolist(), config.horizon) for item_id, context, _ in windows]
    results = []
    failures = []
    if args.workers > 1:
        config_blob = json.dumps(asdict(config), sort_keys=True)
        with ProcessPoolExecutor(
            max_workers=args.workers,
            initializer=_forecast_init,
            initargs=(args.model, args.codebook, config_blob),
        ) as pool:
            results = list(pool.map(_forecast_one, payloads))
    else:
        _forecast_init(args.model, args.codebook, json.dumps(asdict(config), sort_keys=True))
        for payload in payloads:
            try:
                results.append(_forecast_one(payload))
            except Exception as exc:
                failures.append((payload[0], exc))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"__meta__": {
            "fingerprint": config.fingerprint(), "codebook": codebook_hash(codebook),
            "horizon": config.horizon, "n_samples": config.n_samples}}, sort_keys=True) + "\n")
        for item_id, paths in results:
            fh.write(json.dumps({"item_id": item_id, "samples": paths}, sort_keys=True) + "\n")
    print(f"forecast {len(results)} series -> {args.out}")
    for item_id, exc in failures:
        print(f"error: series {item_id!r}: {exc}", file=sys.stderr)
    return 1 if failures else 0


def _read_forecasts(path):
    meta = {}
    samples = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "__meta__" in record:
                meta = record["__meta__"]
            else:
                samples[record["item_id"]] = np.asarray(record["samples"], dtype=np.float64)
    return meta, samples


def _evaluate_dataset(name: str, dataset: Dataset, samples: dict, config: RunConfig):
    """Per-dataset WQL/MASE/VRSE for the model and the seasonal-naive
    baseline."""
    season = seasonality_for_freq(dataset.freq)
    windows = _windows(dataset, config)
    truths, model_q, naive_q = [], [], []
    model_mase, model_vrse, naive_mase, naive_vrse = [], [], [], []
    for item_id, context, horizon in windows:
        if item_id not in samples:
            raise WavetsError(f"dataset {name}: no forecast for series {item_id!r}")
        paths = samples[item_id]
        if paths.shape[1] != len(horizon):
            raise WavetsError(f"dataset {name}: forecast horizon mismatch for {item_id!r}")
        quantiles = sample_quantiles(paths)
        median = quantiles[QUANTILE_LEVELS.index(0.5)]
        observed_context = context[np.isfinite(context)]
        naive_point, naive_quantiles = seasonal_naive(
            observed_context, min(season, len(observed_context) - 1) or 1, len(horizon)
        )
        truths.append(horizon)
        model_q.append(quantiles)
        naive_q.append(naive_quantiles)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model_mase.append(mase(horizon, median, observed_context, min(season, len(observed_context) - 1) or 1))
            naive_mase.append(mase(horizon, naive_point, observed_context, min(season, len(observed_context) - 1) or 1))
            model_vrse.append(vrse(horizon, median))
            naive_vrse.append(vrse(horizon, naive_point))
    truth_stack = np.stack(truths)
    rows = {
        ("model", "wql"): wql(truth_stack, np.stack(model_q, axis=1)),
        ("model", "mase"): float(np.nanmean(model_mase)),
        ("model", "vrse"): float(np.nanmean(model_vrse)),
        ("seasonal_naive", "wql"): wql(truth_stack, np.stack(naive_q, axis=1)),
        ("seasonal_naive", "mase"): float(np.nanmean(naive_mase)),
        ("seasonal_naive", "vrse"): float(np.nanmean(naive_vrse)),
    }
    return rows


def cmd_eval(args) -> int:
    config = build_config(args)
    if len(args.data) != len(args.forecasts):
        print("error: need one --forecasts per --data", file=sys.stderr)
        return 1
    fingerprint = config.fingerprint()
    per_dataset = {}
    for data_path, forecast_path in zip(args.data, args.forecasts):
        dataset = load_dataset(data_path)
        meta, samples = _read_forecasts(forecast_path)
        _check_fingerprint(meta.get("fingerprint"), fingerprint, forecast_path)
        name = Path(data_path).name
        per_dataset[name] = _evaluate_dataset(name, dataset, samples, config)

    rows = []
    for name, scores in sorted(per_dataset.items()):
        for (model_name, metric), value in sorted(scores.items()):
            rows.append((name, model_name, metric, value))
    for metric in ("wql", "mase", "vrse"):
        model_scores = [per_dataset[n][("model", metric)] for n in sorted(per_dataset)]
        naive_scores = [per_dataset[n][("seasonal_naive", metric)] for n in sorted(per_dataset)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rel = aggregate_relative(model_scores, naive_scores)
            naive_rel = aggregate_relative(naive_scores, naive_scores)
        table = np.array([model_scores, naive_scores])
        if np.all(np.isfinite(table)):
            ranks = average_rank(table)
        else:
            ranks = [float("nan"), float("nan")]
        rows.append(("ALL", "model", f"relative_{metric}", rel))
        rows.append(("ALL", "seasonal_naive", f"relative_{metric}", naive_rel))
        rows.append(("ALL", "model", f"avg_rank_{metric}", float(ranks[0])))
        rows.append(("ALL", "seasonal_naive", f"avg_rank_{metric}", float(ranks[1])))

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "model", "metric", "value"])
        writer.writerow(["#fingerprint", fingerprint, "", ""])
        for row in rows:
            writer.writerow([row[0], row[1], row[2], repr(row[3])])
    print(f"wrote {args.out}")
    return 0


def _run_cell(config: RunConfig, dataset: Dataset):
    """Fit, train, forecast and score one ablation cell in memory."""
    windows = _windows(dataset, config)
    if not windows:
        raise WavetsError("no usable windows")
    family = get_family(config.family)
    tok_config = config.tokenizer_config()
    pool = []
    for _, context, horizon in windows:
        scale = compute_scale(context)
        for window in (context, horizon):
            mask = np.isfinite(window)
            if not mask.any():
                continue
            z = (fill_missing(window) - scale.mu) / scale.sigma
            pyramid = apply_threshold(
                decompose(z, family, config.level, config.boundary_mode), config.threshold_spec()
            )
            pool.append(pyramid.approx)
            pool.extend(pyramid.details)
    codebook = fit_codebook(np.concatenate(pool), config.vocab_budget, config.bounds())
    corpus = []
    for item_id, context, horizon in windows:
        corpus.append(tokenize_pair(context, horizon, tok_config, codebook))
    model = train_markov(
        corpus, order=config.order, alpha=config.alpha,
        vocab_size=codebook.vocab_size, pad_id=codebook.pad_id,
    )
    samples = {}
    for (item_id, context, horizon), (ctx_stream, _) in zip(windows, corpus):
        seed = int(
            np.random.SeedSequence(
                [config.seed, int(hashlib.sha256(item_id.encode()).hexdigest()[:8], 16)]
            ).generate_state(1)[0]
        )
        samples[item_id] = sample_forecast(
            model, ctx_stream, config.horizon, tok_config, codebook,
            n_samples=config.n_samples, temperature=config.temperature, seed=seed,
        )
    return _evaluate_dataset("cell", dataset, samples, config)


_GRID_KEYS = ("family", "level", "vocab_budget", "threshold_method", "boundary_mode")


def cmd_ablate(args) -> int:
    config = build_config(args)
    grid_spec = yaml.safe_load(Path(args.grid).read_text())
    if not isinstance(grid_spec, dict) or "grid" not in grid_spec:
        print("error: grid file must contain a 'grid' mapping", file=sys.stderr)
        return 1
    grid = grid_spec["grid"]
    unknown = set(grid) - set(_GRID_KEYS)
    if unknown:
        print(f"error: unsupported grid keys {sorted(unknown)}; allowed {_GRID_KEYS}",
              file=sys.stderr)
        return 1
    dataset = load_dataset(args.data)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    keys = sorted(grid)
    cells = list(itertools.product(*(grid[k] for k in keys)))
    results = []
    n_failed = 0
    for cell in cells:
        overrides = dict(zip(keys, cell))
        cell_config = replace(config, **overrides)
        fingerprint = cell_config.fingerprint()
        cell_path = out_dir / f"cell-{fingerprint}.json"
        if cell_path.exists():
            payload = json.loads(cell_path.read_text())
            if "error" not in payload:
                results.append(payload)
                print(f"cell {fingerprint} ({overrides}): cached")
                continue
        try:
            scores = _run_cell(cell_config, dataset)
            payload = {
                "fingerprint": fingerprint,
                "overrides": overrides,
                "scores": {f"{m}/{k}": v for (m, k), v in scores.items()},
            }
            results.append(payload)
            print(f"cell {fingerprint} ({overrides}): ok")
        except Exception as exc:
            payload = {"fingerprint": fingerprint, "overrides": overrides, "error": str(exc)}
            n_failed += 1
            print(f"cell {fingerprint} ({overrides}): FAILED: {exc}", file=sys.stderr)
        cell_path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")

    table_path = out_dir / "sweep.csv"
    with open(table_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fingerprint", *keys, "model_wql", "model_mase", "model_vrse",
                         "naive_wql", "naive_mase", "naive_vrse"])
        for payload in sorted(results, key=lambda p: p["fingerprint"]):
            scores = payload["scores"]
            writer.writerow([
                payload["fingerprint"],
                *[payload["overrides"].get(k, getattr(config, k)) for k in keys],
                *[repr(scores[f"model/{m}"]) for m in ("wql", "mase", "vrse")],
                *[repr(scores[f"seasonal_naive/{m}"]) for m in ("wql", "mase", "vrse")],
            ])
    print(f"wrote {table_path} ({len(results)} cells, {n_failed} failed)")
    return 1 if n_failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wavets",
        description="Wavelet tokenization, forecasting and evaluation for time series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--n-series", dest="n_series", type=int, default=100)
    _add_config_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit-codebook", help="fit the quantization codebook")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_fit_codebook)

    p = sub.add_parser("tokenize", help="tokenize dataset windows")
    p.add_argument("--data", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("detokenize", help="invert token records")
    p.add_argument("--tokens", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--reference", help="original dataset for RMSE reporting")
    _add_config_flags(p)
    p.set_defaults(func=cmd_detokenize)

    p = sub.add_parser("train", help="train the reference sequence model")
    p.add_argument("--tokens", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("forecast", help="sample forecast paths")
    p.add_argument("--data", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_config_flags(p)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("eval", help="score forecasts against held-out horizons")
    p.add_argument("--data", action="append", required=True)
    p.add_argument("--forecasts", action="append", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="sweep a configuration grid")
    p.add_argument("--data", required=True)
    p.add_argument("--grid", required=True, help="YAML file with a 'grid' mapping")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_ablate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (WavetsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
