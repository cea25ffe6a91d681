"""Immutable interned-node directed graph over canonical addresses.

Nodes are dense integer ids assigned in first-seen order over the edge
stream.  Adjacency is stored CSR-style in sorted, duplicate-free numpy
arrays; parallel transactions between the same ordered pair are folded
into a multiplicity count.  The finished graph never mutates, so any
number of readers can share it.
"""

from __future__ import annotations

from array import array
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    CapacityExceededError,
    EmptyPopulationError,
    NodeOutOfRangeError,
)
from .ingest import NormalizedEdge


class SimpleDigraph:
    """Deduplicated directed graph with per-pair transaction counts.

    ``fwd_indices[fwd_indptr[n]:fwd_indptr[n+1]]`` are the distinct
    successors of node ``n`` in ascending order; ``multiplicity`` is
    aligned with ``fwd_indices`` and counts the underlying transactions
    for each ordered pair.  ``rev_*`` is the exact transpose.
    """

    __slots__ = (
        "node_count",
        "addresses",
        "fwd_indptr",
        "fwd_indices",
        "multiplicity",
        "rev_indptr",
        "rev_indices",
        "_id_by_address",
        "_neighbor_degrees",
    )

    def __init__(
        self,
        node_count: int,
        addresses: list[str],
        fwd_indptr: np.ndarray,
        fwd_indices: np.ndarray,
        multiplicity: np.ndarray,
        rev_indptr: np.ndarray,
        rev_indices: np.ndarray,
    ) -> None:
        if len(addresses) != node_count:
            raise ValueError("address table size does not match node count")
        self.node_count = node_count
        self.addresses = addresses
        self.fwd_indptr = fwd_indptr
        self.fwd_indices = fwd_indices
        self.multiplicity = multiplicity
        self.rev_indptr = rev_indptr
        self.rev_indices = rev_indices
        self._id_by_address: dict[str, int] | None = None
        self._neighbor_degrees: np.ndarray | None = None

    # -- basic accessors -------------------------------------------------

    @property
    def pair_count(self) -> int:
        """Number of distinct ordered (src, dst) pairs."""
        return int(self.fwd_indices.size)

    @property
    def edge_total(self) -> int:
        """Number of underlying transactions (sum of multiplicities)."""
        return int(self.multiplicity.sum())

    def successors(self, node: int) -> np.ndarray:
        self._check_node(node)
        return self.fwd_indices[self.fwd_indptr[node] : self.fwd_indptr[node + 1]]

    def predecessors(self, node: int) -> np.ndarray:
        self._check_node(node)
        return self.rev_indices[self.rev_indptr[node] : self.rev_indptr[node + 1]]

    def node_id(self, address: str) -> int:
        if self._id_by_address is None:
            self._id_by_address = {a: i for i, a in enumerate(self.addresses)}
        return self._id_by_address[address]

    def iter_pairs(self) -> Iterator[tuple[int, int, int]]:
        """Yield (src, dst, multiplicity) for every distinct pair."""
        indptr = self.fwd_indptr
        indices = self.fwd_indices
        mult = self.multiplicity
        for src in range(self.node_count):
            for p in range(indptr[src], indptr[src + 1]):
                yield src, int(indices[p]), int(mult[p])

    def _check_node(self, node: int) -> None:
        if not 0 <= node < self.node_count:
            raise NodeOutOfRangeError(node, self.node_count)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimpleDigraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.addresses == other.addresses
            and np.array_equal(self.fwd_indptr, other.fwd_indptr)
            and np.array_equal(self.fwd_indices, other.fwd_indices)
            and np.array_equal(self.multiplicity, other.multiplicity)
        )

    def __repr__(self) -> str:
        return (
            f"SimpleDigraph(nodes={self.node_count}, pairs={self.pair_count}, "
            f"transactions={self.edge_total})"
        )


def _assemble(addresses: list[str], src: np.ndarray, dst: np.ndarray) -> SimpleDigraph:
    """Build CSR forward/reverse adjacency from parallel id arrays."""
    n = len(addresses)
    if n == 0:
        empty_ptr = np.zeros(1, dtype=np.int64)
        empty = np.zeros(0, dtype=np.int64)
        return SimpleDigraph(0, [], empty_ptr, empty, empty.copy(), empty_ptr.copy(), empty.copy())

    # One int64 key per edge keeps the pair sort a single C-level pass.
    key = src * np.int64(n) + dst
    key.sort()
    first = np.ones(key.size, dtype=bool)
    if key.size:
        first[1:] = key[1:] != key[:-1]
    starts = np.flatnonzero(first)
    uniq = key[starts]
    mult = np.diff(np.append(starts, key.size)).astype(np.int64)

    usrc = uniq // n
    udst = uniq % n

    fwd_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(usrc, minlength=n), out=fwd_indptr[1:])
    fwd_indices = udst.astype(np.int64, copy=True)

    rorder = np.argsort(udst * np.int64(n) + usrc)
    rev_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(udst, minlength=n), out=rev_indptr[1:])
    rev_indices = usrc[rorder].astype(np.int64, copy=True)

    return SimpleDigraph(n, addresses, fwd_indptr, fwd_indices, mult, rev_indptr, rev_indices)


def build_graph(
    edges: Iterable[NormalizedEdge],
    *,
    max_nodes: int | None = None,
    max_edges: int | None = None,
) -> SimpleDigraph:
    """Intern addresses in first-seen order and assemble the graph.

    Raises ``CapacityExceededError`` as soon as a configured bound is
    crossed, before any further memory is committed.
    """
    index: dict[str, int] = {}
    addresses: list[str] = []
    src_ids = array("q")
    dst_ids = array("q")
    n_edges = 0
    get = index.get
    for edge in edges:
        n_edges += 1
        if max_edges is not None and n_edges > max_edges:
            raise CapacityExceededError("edge count", max_edges)
        s = get(edge.src)
        if s is None:
            s = len(addresses)
            if max_nodes is not None and s >= max_nodes:
                raise CapacityExceededError("node count", max_nodes)
            index[edge.src] = s
            addresses.append(edge.src)
        d = get(edge.dst)
        if d is None:
            d = len(addresses)
            if max_nodes is not None and d >= max_nodes:
                raise CapacityExceededError("node count", max_nodes)
            index[edge.dst] = d
            addresses.append(edge.dst)
        src_ids.append(s)
        dst_ids.append(d)
    src = np.frombuffer(src_ids, dtype=np.int64) if n_edges else np.zeros(0, np.int64)
    dst = np.frombuffer(dst_ids, dtype=np.int64) if n_edges else np.zeros(0, np.int64)
    return _assemble(addresses, src, dst)


def graph_from_pairs(
    pairs: Iterable[tuple[int, int]],
    *,
    node_count: int | None = None,
    addresses: Sequence[str] | None = None,
) -> SimpleDigraph:
    """Construct a graph directly from integer id pairs.

    Mostly a convenience for tests and synthetic structures; allows
    isolated nodes via an explicit ``node_count``.
    """
    pair_list = list(pairs)
    if pair_list:
        src = np.asarray([p[0] for p in pair_list], dtype=np.int64)
        dst = np.asarray([p[1] for p in pair_list], dtype=np.int64)
        implied = int(max(src.max(), dst.max())) + 1
    else:
        src = np.zeros(0, np.int64)
        dst = np.zeros(0, np.int64)
        implied = 0
    n = implied if node_count is None else node_count
    if n < implied:
        raise ValueError(f"node_count {n} too small for pair ids up to {implied - 1}")
    if addresses is None:
        addr_list = [f"0x{i:040x}" for i in range(n)]
    else:
        addr_list = list(addresses)
    return _assemble(addr_list, src, dst)


def neighbor_degrees(g: SimpleDigraph) -> np.ndarray:
    """Distinct-counterparty degree for every node, direction-blind.

    A self-loop contributes exactly 1 (the node counts itself once as a
    counterparty).  The result is cached on the graph.
    """
    if g._neighbor_degrees is not None:
        return g._neighbor_degrees
    n = g.node_count
    if n == 0:
        degs = np.zeros(0, dtype=np.int64)
    else:
        usrc = np.repeat(np.arange(n, dtype=np.int64), np.diff(g.fwd_indptr))
        udst = g.fwd_indices
        a = np.concatenate([usrc, udst])
        b = np.concatenate([udst, usrc])
        sym = np.unique(a * np.int64(n) + b)
        degs = np.bincount(sym // n, minlength=n).astype(np.int64)
    g._neighbor_degrees = degs
    return degs


def distinct_neighbor_degree(g: SimpleDigraph, node: int) -> int:
    """|successors ∪ predecessors| for one node."""
    g._check_node(node)
    return int(np.union1d(g.successors(node), g.predecessors(node)).size)


def average_degree(
    g: SimpleDigraph,
    subset: Iterable[int] | None = None,
    exclude: Iterable[int] | None = None,
) -> float:
    """Mean distinct-neighbor degree over a node population.

    Degrees are always computed against the full graph; ``subset`` and
    ``exclude`` only choose which nodes are averaged.
    """
    degs = neighbor_degrees(g)
    if subset is None:
        mask = np.ones(g.node_count, dtype=bool)
    else:
        mask = np.zeros(g.node_count, dtype=bool)
        for node in subset:
            g._check_node(node)
            mask[node] = True
    if exclude is not None:
        for node in exclude:
            g._check_node(node)
            mask[node] = False
    population = np.flatnonzero(mask)
    if population.size == 0:
        raise EmptyPopulationError("no nodes left to average over")
    return float(degs[population].sum()) / population.size
