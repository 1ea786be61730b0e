"""Monte Carlo generation of uniform excursions/bridges and empirical
verification of the moment predictions.

Sampling contract: bridges are uniform shuffles of N up and N down steps;
excursions come from the cycle lemma (shuffle N+1 ups and N downs, rotate
to the unique strictly dominating cyclic shift, drop the leading up-step).
RNG: numpy PCG64 seeded through SeedSequence; chains split the root seed
via SeedSequence.spawn and are merged in chain order, so a (seed, config,
backend) triple reproduces bit-identical summaries.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import backend, costs, numerics, oracle
from .errors import DomainError
from .numerics import _work, real

EXCURSION = "excursion"
BRIDGE = "bridge"

SCHEMA_VERSION = 1
_CHUNK = 1 << 16


def _steps_to_path(steps, ensemble: str) -> oracle.LatticePath:
    return oracle.LatticePath(tuple(int(s) for s in steps), ensemble)


def sample_bridge(size: int, rng: np.random.Generator) -> oracle.LatticePath:
    """One uniform bridge: a random arrangement of N ups and N downs."""
    if size < 1:
        raise DomainError("size must be >= 1")
    row = np.concatenate([np.ones(size, dtype=np.int8), -np.ones(size, dtype=np.int8)])
    rng.shuffle(row)
    return _steps_to_path(row, BRIDGE)


def sample_excursion(size: int, rng: np.random.Generator) -> oracle.LatticePath:
    """One uniform excursion via the cycle lemma."""
    if size < 1:
        raise DomainError("size must be >= 1")
    row = np.concatenate([np.ones(size + 1, dtype=np.int8), -np.ones(size, dtype=np.int8)])
    rng.shuffle(row)
    prefix = np.cumsum(row)
    last_min = len(row) - 1 - int(np.argmin(prefix[::-1]))
    rot = np.roll(row, -(last_min + 1))
    return _steps_to_path(rot[1:], EXCURSION)


@dataclass(frozen=True)
class SampleSummary:
    ensemble: str
    size: int
    count: int
    cost: str
    p: str
    eps: str
    rescale_exponent: float
    seed: int
    chains: int
    backend: str
    moments: list  # [(s, value, stderr)]
    bin_edges: list
    bin_counts: list

    def to_json(self) -> str:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "ensemble": self.ensemble,
            "size": self.size,
            "count": self.count,
            "cost": self.cost,
            "p": self.p,
            "eps": self.eps,
            "rescale_exponent": self.rescale_exponent,
            "seed": self.seed,
            "chains": self.chains,
            "backend": self.backend,
            "moments": [
                {"s": s, "value": value, "stderr": stderr}
                for s, value, stderr in self.moments
            ],
            "histogram": {"bin_edges": self.bin_edges, "bin_counts": self.bin_counts},
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def histogram_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("bin_left,bin_right,count\n")
            for i, c in enumerate(self.bin_counts):
                fh.write(f"{self.bin_edges[i]!r},{self.bin_edges[i + 1]!r},{c}\n")


def _chain_values(ensemble: str, size: int, count: int, w: np.ndarray, chain_seed: int) -> np.ndarray:
    out = np.empty(count)
    done = 0
    # per-chunk seeds derived deterministically from the chain seed
    sub = np.random.SeedSequence(chain_seed)
    chunk_seeds = sub.generate_state((count + _CHUNK - 1) // _CHUNK, dtype=np.uint64)
    for i, cs in enumerate(chunk_seeds):
        n = min(_CHUNK, count - done)
        steps = backend.sample_paths(ensemble, size, n, int(cs))
        out[done : done + n] = backend.batch_statistic(np.ascontiguousarray(steps), w)
        done += n
    return out


def run_experiment(ensemble: str, size: int, count: int, cost: costs.CostFunction,
                   eps=0, rescale_exponent: float | None = None, seed: int = 0,
                   s_max: int = 3, bins="fd", chains: int = 1, threads: int = 1,
                   bits: int | None = None) -> SampleSummary:
    """Draw ``count`` paths, accumulate moments of (A - eps N)/size^x and a
    histogram; deterministic for a fixed (seed, chains, backend)."""
    if ensemble not in (EXCURSION, BRIDGE):
        raise DomainError(f"unknown ensemble {ensemble!r}")
    if count < 0 or size < 1 or chains < 1:
        raise DomainError("need count >= 0, size >= 1, chains >= 1")
    if rescale_exponent is None:
        rescale_exponent = float(cost.p) + 0.5

    with _work(bits):
        eps_v = real(eps, bits)
        w = np.array(
            [float(x - eps_v) for x in costs.value_stream(cost, size, bits)]
        )

    if count == 0:
        values = np.empty(0)
    else:
        per = [count // chains + (1 if i < count % chains else 0) for i in range(chains)]
        seeds = [int(s.generate_state(1, dtype=np.uint64)[0])
                 for s in np.random.SeedSequence(seed).spawn(chains)]
        if threads > 1 and chains > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futs = [pool.submit(_chain_values, ensemble, size, n, w, cs)
                        for n, cs in zip(per, seeds) if n]
                parts = [f.result() for f in futs]
        else:
            parts = [_chain_values(ensemble, size, n, w, cs)
                     for n, cs in zip(per, seeds) if n]
        values = np.concatenate(parts) if parts else np.empty(0)
        values /= float(size) ** rescale_exponent

    moments = []
    n = len(values)
    for s in range(1, s_max + 1):
        if n == 0:
            moments.append((s, 0.0, 0.0))
            continue
        pw = values**s
        m = float(np.mean(pw))
        var = float(np.mean(values ** (2 * s))) - m * m
        moments.append((s, m, float(np.sqrt(max(var, 0.0) / n))))

    if n == 0:
        edges, counts = [0.0, 1.0], [0]
    else:
        if bins == "fd":
            q75, q25 = np.percentile(values, [75, 25])
            width = 2 * (q75 - q25) / n ** (1 / 3)
            span = float(np.max(values) - np.min(values))
            nbins = max(1, min(512, int(np.ceil(span / width)) if width > 0 else 64))
        else:
            nbins = int(bins)
        counts, edges = np.histogram(values, bins=nbins)
        edges, counts = [float(e) for e in edges], [int(c) for c in counts]

    return SampleSummary(
        ensemble=ensemble,
        size=size,
        count=count,
        cost=cost.describe(),
        p=str(cost.p),
        eps=str(eps),
        rescale_exponent=float(rescale_exponent),
        seed=seed,
        chains=chains,
        backend=backend.backend_name(),
        moments=moments,
        bin_edges=edges,
        bin_counts=counts,
    )


def raw_values(ensemble: str, size: int, count: int, cost: costs.CostFunction,
               eps=0, seed: int = 0, bits: int | None = None) -> np.ndarray:
    """Unrescaled statistic samples (for KS-style distribution tests)."""
    with _work(bits):
        eps_v = real(eps, bits)
        w = np.array([float(x - eps_v) for x in costs.value_stream(cost, size, bits)])
    seed64 = int(np.random.SeedSequence(seed).generate_state(1, dtype=np.uint64)[0])
    return _chain_values(ensemble, size, count, w, seed64)


def compare_to_reference(summary: SampleSummary, reference_moments) -> list:
    """Per-order z-scores (empirical - reference)/stderr; reference_moments
    holds the values for s = 1..s_max."""
    out = []
    for (s, value, stderr), ref in zip(summary.moments, reference_moments):
        refv = float(ref)
        z = 0.0 if stderr == 0 and value == refv else (value - refv) / stderr
        out.append((s, z))
    return out
