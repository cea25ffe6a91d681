"""Cumulative snapshot graphs and category membership flows over time.

A snapshot at cut ``t`` is the graph over every edge with timestamp
``<= t``.  Each snapshot is labeled with the bow-tie decomposition, and
consecutive snapshots are compared through an 8x8 flow matrix whose
extra ``FUTURE`` row/column accounts for addresses not yet (or no
longer) present.  ``FUTURE`` exists only in flow matrices; snapshot
memberships always stay seven-way.
"""

from __future__ import annotations

import enum
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bowtie import BowTieLabel, classify, membership_by_address
from .errors import InconsistentUniverseError
from .graph import SimpleDigraph, build_graph
from .ingest import NormalizedEdge

FUTURE = "FUTURE"

FLOW_LABELS: tuple[str, ...] = tuple(label.name for label in BowTieLabel) + (FUTURE,)

_FUTURE_IDX = len(FLOW_LABELS) - 1


class SnapshotMode(enum.Enum):
    CUMULATIVE = "cumulative"


@dataclass(frozen=True)
class SnapshotSpec:
    """Strictly increasing cut timestamps, cumulative edges per cut."""

    cut_timestamps: tuple[int, ...]
    mode: SnapshotMode = SnapshotMode.CUMULATIVE

    def __post_init__(self) -> None:
        cuts = tuple(self.cut_timestamps)
        if not cuts:
            raise ValueError("at least one cut timestamp is required")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ValueError("cut timestamps must be strictly increasing")
        object.__setattr__(self, "cut_timestamps", cuts)


@dataclass
class LabeledSnapshot:
    """Bow-tie membership of every address present at the cut."""

    cut: int
    membership: dict[str, BowTieLabel]


@dataclass
class FlowMatrix:
    """Address counts moving between categories across two cuts.

    ``counts[i][j]`` is the number of addresses labeled
    ``FLOW_LABELS[i]`` at the source cut and ``FLOW_LABELS[j]`` at the
    destination cut, with ``FUTURE`` standing in for "absent".
    """

    cut_from: int
    cut_to: int
    counts: np.ndarray

    def count(self, source: str, target: str) -> int:
        return int(self.counts[FLOW_LABELS.index(source), FLOW_LABELS.index(target)])

    def row_sums(self) -> dict[str, int]:
        return {lab: int(s) for lab, s in zip(FLOW_LABELS, self.counts.sum(axis=1))}

    def col_sums(self) -> dict[str, int]:
        return {lab: int(s) for lab, s in zip(FLOW_LABELS, self.counts.sum(axis=0))}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FlowMatrix):
            return NotImplemented
        return (
            self.cut_from == other.cut_from
            and self.cut_to == other.cut_to
            and np.array_equal(self.counts, other.counts)
        )


def _sorted_by_time(edges: Iterable[NormalizedEdge]) -> list[NormalizedEdge]:
    edge_list = list(edges)
    if any(
        edge_list[i].timestamp > edge_list[i + 1].timestamp
        for i in range(len(edge_list) - 1)
    ):
        edge_list.sort(key=lambda e: e.timestamp)  # stable: file order kept on ties
    return edge_list


def snapshot_graph(edges: Iterable[NormalizedEdge], cut: int) -> SimpleDigraph:
    """Graph over exactly the edges with timestamp <= cut."""
    edge_list = _sorted_by_time(edges)
    timestamps = [e.timestamp for e in edge_list]
    upto = bisect_right(timestamps, cut)
    return build_graph(edge_list[:upto])


def membership_timeline(
    edges: Iterable[NormalizedEdge], spec: SnapshotSpec
) -> list[LabeledSnapshot]:
    """One labeled snapshot per cut; empty cuts get empty memberships."""
    edge_list = _sorted_by_time(edges)
    timestamps = [e.timestamp for e in edge_list]
    snapshots: list[LabeledSnapshot] = []
    for cut in spec.cut_timestamps:
        upto = bisect_right(timestamps, cut)
        g = build_graph(edge_list[:upto])
        if g.node_count == 0:
            snapshots.append(LabeledSnapshot(cut, {}))
            continue
        partition = classify(g)
        snapshots.append(LabeledSnapshot(cut, membership_by_address(g, partition)))
    return snapshots


def flow_matrix(
    a: LabeledSnapshot,
    b: LabeledSnapshot,
    universe: Iterable[str],
) -> FlowMatrix:
    """Count address transitions between two snapshots over ``universe``."""
    if a.cut >= b.cut:
        raise ValueError("source snapshot must precede destination snapshot")
    universe_set = set(universe)
    for snap in (a, b):
        missing = next((addr for addr in snap.membership if addr not in universe_set), None)
        if missing is not None:
            raise InconsistentUniverseError(
                f"address {missing} present at cut {snap.cut} but not in universe"
            )
    counts = np.zeros((len(FLOW_LABELS), len(FLOW_LABELS)), dtype=np.int64)
    mem_a = a.membership
    mem_b = b.membership
    for addr in universe_set:
        la = mem_a.get(addr)
        lb = mem_b.get(addr)
        i = _FUTURE_IDX if la is None else int(la)
        j = _FUTURE_IDX if lb is None else int(lb)
        counts[i, j] += 1
    return FlowMatrix(a.cut, b.cut, counts)


def flow_matrices(
    timeline: Sequence[LabeledSnapshot],
    universe: Iterable[str] | None = None,
) -> list[FlowMatrix]:
    """Flow matrix for every consecutive snapshot pair.

    Defaults the universe to all addresses ever seen in the timeline,
    which makes ``FUTURE`` mean "not yet present" for cumulative cuts.
    """
    if universe is None:
        all_addrs: set[str] = set()
        for snap in timeline:
            all_addrs.update(snap.membership)
        universe = all_addrs
    else:
        universe = set(universe)
    return [
        flow_matrix(timeline[i], timeline[i + 1], universe)
        for i in range(len(timeline) - 1)
    ]


def check_scc_monotone(
    timeline: Sequence[LabeledSnapshot],
) -> list[tuple[str, int, int]]:
    """Every (address, cut_i, cut_j) where the address was SCC at cut_i
    and not SCC at the later cut_j.

    Cumulative snapshots are expected to return an empty list: once an
    address joins the core it cannot leave, because edges are never
    removed.  Any reported violation is real and worth surfacing.
    """
    violations: list[tuple[str, int, int]] = []
    scc_cuts: dict[str, list[int]] = {}
    for snap in timeline:
        membership = snap.membership
        for addr, earlier in scc_cuts.items():
            if membership.get(addr) != BowTieLabel.SCC:
                violations.extend((addr, cut_i, snap.cut) for cut_i in earlier)
        for addr, label in membership.items():
            if label == BowTieLabel.SCC:
                scc_cuts.setdefault(addr, []).append(snap.cut)
    return violations
