"""Trajectory generation for the discrete- and continuous-time graph processes.

Discrete runs draw i.i.d. edges from a normalized measure; continuous runs
assign each support edge an exponential first-arrival time with rate equal to
its (not necessarily normalized) mass.  Both produce a stream of
``ArrivalEvent`` records annotated with how many new vertices each arrival
brought.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ArrivalEvent",
    "Trajectory",
    "run_discrete",
    "run_continuous",
    "depoissonize",
    "replica_rng",
]


def replica_rng(master_seed, replica_index):
    """Independent per-replica stream: SeedSequence(master, spawn_key=(k,)).

    This is the single splitting rule used everywhere; replicas are safe to
    run in parallel and results reduce deterministically in index order.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(replica_index,))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class ArrivalEvent:
    index: int          # arrival ordinal, from 1
    time: float         # equals index for discrete runs
    edge: tuple         # canonical (i, j)
    new_vertices: int   # 0, 1 or 2
    new_component: bool  # true iff new_vertices == 2


@dataclass
class Trajectory:
    events: list
    horizon_kind: str   # "steps" or "time"
    horizon: float
    seed: object = None

    def __len__(self):
        return len(self.events)

    def edge_sequence(self):
        return [ev.edge for ev in self.events]

    def to_csv(self, path, header_lines=()):
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            wr = csv.writer(fh)
            wr.writerow(["index", "time", "i", "j", "new_vertices",
                         "new_component"])
            for ev in self.events:
                wr.writerow([ev.index, repr(ev.time), ev.edge[0], ev.edge[1],
                             ev.new_vertices, int(ev.new_component)])


def _annotate(times, edge_pairs):
    """Build events from sorted arrival times, tracking unseen endpoints."""
    seen = set()
    events = []
    for n, (t, (i, j)) in enumerate(zip(times, edge_pairs), start=1):
        new = (i not in seen) + (j not in seen)
        seen.add(i)
        seen.add(j)
        events.append(ArrivalEvent(index=n, time=float(t), edge=(i, j),
                                   new_vertices=new, new_component=(new == 2)))
    return events


def run_discrete(spec, n_steps, rng):
    """n_steps i.i.d. draws from the normalized measure.

    Repeated edges are re-emitted with new_vertices = 0; identification of
    parallel edges is the graph-state layer's concern.
    """
    if n_steps <= 0:
        raise ValueError("n_steps must be positive")
    spec = spec.normalize()
    ks = spec.sample_edge_indices(n_steps, rng)
    pairs = [(int(spec.ei[k]), int(spec.ej[k])) for k in ks]
    times = np.arange(1, n_steps + 1, dtype=float)
    return Trajectory(_annotate(times, pairs), "steps", n_steps)


def run_continuous(spec, horizon_T, rng, full_streams=False):
    """Arrivals in [0, T] of the poissonized process.

    Default mode draws one exponential first-arrival per support edge, which
    is sufficient for every simple-graph property.  ``full_streams`` draws
    complete per-edge Poisson streams instead, so parallel edges re-arrive.
    """
    if horizon_T <= 0:
        raise ValueError("horizon must be positive")
    w = spec.w
    if full_streams:
        counts = rng.poisson(w * horizon_T)
        total = int(counts.sum())
        times = rng.random(total) * horizon_T
        ks = np.repeat(np.arange(len(w)), counts)
    else:
        times = rng.exponential(1.0 / w)
        keep = times <= horizon_T
        times = times[keep]
        ks = np.nonzero(keep)[0]
    order = np.argsort(times, kind="stable")
    times = times[order]
    ks = ks[order]
    pairs = [(int(spec.ei[k]), int(spec.ej[k])) for k in ks]
    return Trajectory(_annotate(times, pairs), "time", horizon_T)


def depoissonize(spec, n, rng):
    """First n arrivals of the continuous process with full Poisson streams.

    The induced edge-order law coincides with ``run_discrete``'s.  Each edge
    can contribute at most n of the first n events, so n arrivals per edge
    (cumulative exponential waits) are enough to determine them.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    w = spec.w
    gaps = rng.exponential(1.0 / w[:, None], size=(len(w), n))
    times = np.cumsum(gaps, axis=1).ravel()
    ks = np.repeat(np.arange(len(w)), n)
    first = np.argpartition(times, n - 1)[:n]
    order = first[np.argsort(times[first], kind="stable")]
    pairs = [(int(spec.ei[k]), int(spec.ej[k])) for k in ks[order]]
    return Trajectory(_annotate(times[order], pairs), "steps", n)
