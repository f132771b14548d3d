"""Per-frame latency benchmark: one full frame period of work on a full buffer."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .classifier import EvaluationDataset
from .matcher import MovementDictionary, MovementEntry, expand
from .pipeline import Engine, EngineConfig
from .scorer import score
from .sequencer import RleToken, segment
from .synth import SynthScript, build_samples, load_poses, render_stream


@dataclass(frozen=True)
class BenchmarkResult:
    iterations: int
    n_variants: int
    buffer_len: int
    median_ms: float
    p95_ms: float
    max_ms: float


def benchmark_dictionary(n_variants: int = 400, run_total: int = 100, seed: int = 0) -> MovementDictionary:
    """Random A/B/C movements whose variants all sit near ``run_total`` frames,
    so no variant can be skipped on length alone."""
    rng = np.random.default_rng(seed)
    per_entry = 50
    entries = []
    for e in range((n_variants + per_entry - 1) // per_entry):
        labels = ["A", "B", "C", "B", "A"] if e % 2 == 0 else ["C", "B", "A", "B", "C"]
        runs = rng.multinomial(run_total - len(labels), np.ones(len(labels)) / len(labels)) + 1
        ideal = tuple(RleToken(lb, int(r)) for lb, r in zip(labels, runs))
        variants = []
        while len(variants) < min(per_entry, n_variants - len(entries) * per_entry) - 1:
            v = tuple(RleToken(t.label, max(1, t.run + int(rng.integers(-4, 5)))) for t in ideal)
            if v != ideal and v not in variants:
                variants.append(v)
        entries.append(MovementEntry(f"m{e}", ideal, tuple(variants)))
    return MovementDictionary(entries)


def run_benchmark(iterations: int = 100, n_variants: int = 400, buffer_len: int = 100, seed: int = 0) -> BenchmarkResult:
    poses = load_poses()
    dataset = EvaluationDataset(tuple(build_samples(poses, 10, jitter=2.0, seed=seed)))
    dictionary = benchmark_dictionary(n_variants, buffer_len, seed)
    config = EngineConfig(buffer_capacity=buffer_len)
    engine = Engine(dataset, dictionary, config)

    runs = [buffer_len // 5] * 5
    runs[2] += buffer_len - sum(runs)
    script = SynthScript(tuple(zip("ABCBA", runs)), jitter=2.0, seed=seed)
    raws = render_stream(script, poses, config.frame_period_ms)
    for raw in raws[:-1]:
        engine.buffer.push(engine.classify_frame(raw))
    prepared = engine.buffer
    last = raws[-1]

    timings = []
    for _ in range(iterations):
        engine.buffer = prepared.copy()
        t0 = time.perf_counter()
        engine.buffer.push(engine.classify_frame(last))
        for cand in segment(engine.buffer, config.separator_len):
            # every candidate is matched regardless of closure: worst case
            result = engine.match(cand)
            if result is not None:
                entry = dictionary.entry(result.movement)
                score(cand.labels, expand(result.variant), cand.frame_accuracies, entry.adjacency, config.segment_len)
        timings.append((time.perf_counter() - t0) * 1000.0)

    timings.sort()
    return BenchmarkResult(
        iterations=iterations,
        n_variants=len(dictionary),
        buffer_len=buffer_len,
        median_ms=statistics.median(timings),
        p95_ms=timings[min(len(timings) - 1, int(0.95 * len(timings)))],
        max_ms=timings[-1],
    )
