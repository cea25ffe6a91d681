"""Token balance replay and whale identification.

A whale is an address whose net token balance meets a large threshold
(10^22 base units by default, i.e. 10,000 whole tokens of an 18-decimal
token).  Balances are replayed chronologically from the token-transfer
edges of one contract: every transfer credits the receiver and debits
the sender, and the running maximum per address is kept so that
addresses that later sold off ("historical whales") remain visible.

All arithmetic is exact integer arithmetic; running nets may go
negative for addresses that forward more than they ever received
through this contract (exchanges, routers).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

from .bowtie import BowTieLabel
from .ingest import ZERO_ADDRESS, NormalizedEdge, TxKind


@dataclass(frozen=True)
class WhaleConfig:
    """Which token to replay and what "large" means.

    ``zero_addresses`` are mint/burn endpoints: transfers from them only
    credit the receiver, transfers to them only debit the sender, and
    they never become whale candidates themselves.
    """

    token_contract: str
    threshold: int = 10**22
    zero_addresses: frozenset[str] = frozenset({ZERO_ADDRESS})

    def __post_init__(self) -> None:
        if self.threshold <= 0:
            raise ValueError("whale threshold must be positive")


class BalanceEntry(NamedTuple):
    final_net: int
    peak_net: int
    first_ts: int
    last_ts: int


@dataclass
class BalanceLedger:
    """Per-address net-balance trajectory summary.

    ``peak_net`` is the running maximum of the net balance sampled after
    each complete transfer, starting from an implicit zero balance, so
    it is never negative and never below ``final_net``... unless the
    address only ever sent (then the peak stays at the initial zero).
    """

    token_contract: str
    entries: dict[str, BalanceEntry]

    def final_net(self, address: str) -> int:
        entry = self.entries.get(address)
        return 0 if entry is None else entry.final_net

    def peak_net(self, address: str) -> int:
        entry = self.entries.get(address)
        return 0 if entry is None else entry.peak_net

    def __len__(self) -> int:
        return len(self.entries)


def replay_balances(
    edges: Iterable[NormalizedEdge], cfg: WhaleConfig
) -> BalanceLedger:
    """Replay the token transfers of ``cfg.token_contract`` in
    (timestamp, tx_id, log_index) order.

    Only edges with kind Token and a matching token contract take part;
    everything else is ignored by contract.  A self-transfer touches the
    activity timestamps but leaves net and peak unchanged.
    """
    token = cfg.token_contract
    transfers = [
        e
        for e in edges
        if e.kind == TxKind.TOKEN and e.token_contract == token
    ]
    transfers.sort(key=lambda e: (e.timestamp, e.tx_id, e.log_index))

    zero = cfg.zero_addresses
    # state per address: [net, peak, first_ts, last_ts]
    state: dict[str, list[int]] = {}
    for e in transfers:
        ts = e.timestamp
        if e.src == e.dst:
            if e.src not in zero:
                entry = state.get(e.src)
                if entry is None:
                    state[e.src] = [0, 0, ts, ts]
                else:
                    entry[3] = ts
            continue
        if e.dst not in zero:
            entry = state.get(e.dst)
            if entry is None:
                entry = state[e.dst] = [0, 0, ts, ts]
            net = entry[0] + e.value
            entry[0] = net
            if net > entry[1]:
                entry[1] = net
            entry[3] = ts
        if e.src not in zero:
            entry = state.get(e.src)
            if entry is None:
                entry = state[e.src] = [0, 0, ts, ts]
            entry[0] -= e.value  # debits never raise the peak
            entry[3] = ts

    entries = {
        addr: BalanceEntry(s[0], s[1], s[2], s[3]) for addr, s in state.items()
    }
    return BalanceLedger(token, entries)


def current_whales(ledger: BalanceLedger, cfg: WhaleConfig) -> set[str]:
    """Addresses whose final net balance meets the threshold ("at least")."""
    t = cfg.threshold
    return {addr for addr, e in ledger.entries.items() if e.final_net >= t}


def historical_whales(ledger: BalanceLedger, cfg: WhaleConfig) -> set[str]:
    """Addresses whose running net ever met the threshold.

    Always a superset of ``current_whales`` because the peak dominates
    the final net.
    """
    t = cfg.threshold
    return {addr for addr, e in ledger.entries.items() if e.peak_net >= t}


@dataclass
class WhaleCrosstab:
    """Whales per bow-tie category, plus those absent from the graph."""

    counts: dict[BowTieLabel, int]
    absent: int

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.absent


def whale_bowtie_crosstab(
    whale_set: Iterable[str],
    membership: Mapping[str, BowTieLabel],
) -> WhaleCrosstab:
    """Count whales per category of an address-keyed partition."""
    counts = {label: 0 for label in BowTieLabel}
    absent = 0
    for addr in whale_set:
        label = membership.get(addr)
        if label is None:
            absent += 1
        else:
            counts[label] += 1
    return WhaleCrosstab(counts, absent)
