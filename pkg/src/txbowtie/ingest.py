"""Parsing, normalization, and deduplication of transaction exports.

Input files are Etherscan-style dumps, one of:

* JSON Lines, one object per line with keys ``hash``, ``logIndex``,
  ``from``, ``to``, ``contractAddress``, ``timeStamp``, ``value``,
  ``kind``, ``tokenContract``;
* CSV with the same columns and a mandatory header row (RFC 4180).

``value`` is a non-negative 256-bit integer in base units and stays an
exact Python int through the whole pipeline; nothing here ever touches
floating point.  Addresses are canonicalized to lowercase ``0x`` + 40
hex digits.  Malformed rows are collected with their line numbers
rather than silently dropped.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, NamedTuple

from .errors import (
    MalformedRowError,
    NoDestinationError,
    UnknownFormatError,
    ValueOverflowError,
)

MAX_VALUE = 2**256 - 1
ZERO_ADDRESS = "0x" + "0" * 40

_HEX_DIGITS = frozenset("0123456789abcdef")

COLUMNS = (
    "hash",
    "logIndex",
    "from",
    "to",
    "contractAddress",
    "timeStamp",
    "value",
    "kind",
    "tokenContract",
)


class Format(enum.Enum):
    JSONL = "jsonl"
    CSV = "csv"


def parse_format(name: str | Format) -> Format:
    if isinstance(name, Format):
        return name
    try:
        return Format(str(name).strip().lower())
    except ValueError:
        raise UnknownFormatError(name) from None


class TxKind(enum.IntEnum):
    NORMAL = 0
    TOKEN = 1
    NFT = 2
    MULTI_TOKEN = 3
    INTERNAL = 4


_KIND_BY_NAME = {
    "normal": TxKind.NORMAL,
    "token": TxKind.TOKEN,
    "nft": TxKind.NFT,
    "multitoken": TxKind.MULTI_TOKEN,
    "multi-token": TxKind.MULTI_TOKEN,
    "multi_token": TxKind.MULTI_TOKEN,
    "internal": TxKind.INTERNAL,
}

_KIND_WIRE = {
    TxKind.NORMAL: "normal",
    TxKind.TOKEN: "token",
    TxKind.NFT: "nft",
    TxKind.MULTI_TOKEN: "multitoken",
    TxKind.INTERNAL: "internal",
}


def parse_kind(name: str) -> TxKind:
    kind = _KIND_BY_NAME.get(str(name).strip().lower())
    if kind is None:
        raise ValueError(f"unknown transaction kind: {name!r}")
    return kind


def kind_name(kind: TxKind) -> str:
    return _KIND_WIRE[TxKind(kind)]


def canonical_address(raw: str) -> str:
    """Lowercase ``0x`` + 40 hex digits; idempotent by construction."""
    s = raw.strip().lower()
    if (
        len(s) != 42
        or not s.startswith("0x")
        or not _HEX_DIGITS.issuperset(s[2:])
    ):
        raise ValueError(f"not a valid address: {raw!r}")
    return s


class TransactionRecord(NamedTuple):
    """One raw ledger entry after field-level validation."""

    tx_id: str
    log_index: int
    sender: str
    target: str | None
    contract: str | None
    timestamp: int
    value: int
    kind: TxKind
    token_contract: str | None


class NormalizedEdge(NamedTuple):
    """Directed transfer with its destination resolved.

    ``dst`` is the record's target when present, else its contract.
    ``tx_id`` and ``log_index`` ride along so downstream replays can
    order same-timestamp transfers deterministically.
    """

    src: str
    dst: str
    timestamp: int
    value: int
    kind: TxKind
    token_contract: str | None
    tx_id: str
    log_index: int


class RowIssue(NamedTuple):
    line_no: int
    reason: str


@dataclass
class IngestStats:
    """Tallies accumulated by the ingest pipeline stages."""

    rows: int = 0
    records: int = 0
    issues: list[RowIssue] = field(default_factory=list)
    duplicates: int = 0
    no_destination: int = 0
    by_kind: Counter = field(default_factory=Counter)

    @property
    def malformed(self) -> int:
        return len(self.issues)


class _BadRow(Exception):
    def __init__(self, reason: str) -> None:
        self.reason = reason


def _canon_or_none(raw: object, cache: dict, what: str) -> str | None:
    # None / "" mean "absent"; anything else must canonicalize.
    if raw is None or raw == "":
        return None
    got = cache.get(raw)
    if got is None:
        try:
            got = canonical_address(raw)  # type: ignore[arg-type]
        except (ValueError, TypeError, AttributeError):
            raise _BadRow(f"bad {what} address: {raw!r}") from None
        cache[raw] = got
    return got


def _to_int(raw: object, what: str) -> int:
    try:
        return int(raw)  # type: ignore[arg-type]
    except (ValueError, TypeError):
        raise _BadRow(f"non-numeric {what}: {raw!r}") from None


def _build_record(
    tx_id: object,
    log_index: object,
    sender: object,
    target: object,
    contract: object,
    timestamp: object,
    value: object,
    kind: object,
    token_contract: object,
    cache: dict,
) -> TransactionRecord:
    if not tx_id or not isinstance(tx_id, str):
        raise _BadRow("missing transaction hash")
    li = 0 if log_index in (None, "") else _to_int(log_index, "logIndex")
    if li < 0:
        raise _BadRow(f"negative logIndex: {log_index!r}")
    src = _canon_or_none(sender, cache, "from")
    if src is None:
        raise _BadRow("missing from address")
    dst = _canon_or_none(target, cache, "to")
    ctr = _canon_or_none(contract, cache, "contractAddress")
    ts = _to_int(timestamp, "timeStamp")
    if ts <= 0:
        raise _BadRow(f"non-positive timeStamp: {timestamp!r}")
    if isinstance(value, float):
        raise _BadRow(f"float value not allowed: {value!r}")
    val = _to_int(value, "value")
    if val < 0:
        raise _BadRow(f"negative value: {value!r}")
    if val > MAX_VALUE:
        raise _BadRow("value exceeds 256 bits")
    if isinstance(kind, str):
        k = _KIND_BY_NAME.get(kind.strip().lower())
    else:
        k = None
    if k is None:
        raise _BadRow(f"unknown transaction kind: {kind!r}")
    tok = _canon_or_none(token_contract, cache, "tokenContract")
    return TransactionRecord(tx_id, li, src, dst, ctr, ts, val, k, tok)


def _open_lines(source: str | Path | IO | bytes) -> Iterable[str]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"), newline="")
    if isinstance(source, io.TextIOBase):
        return source
    # binary stream
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def _report(
    line_no: int,
    reason: str,
    issues: list[RowIssue] | None,
    strict: bool,
) -> None:
    if strict:
        if reason == "value exceeds 256 bits":
            raise ValueOverflowError(line_no)
        raise MalformedRowError(line_no, reason)
    if issues is not None:
        issues.append(RowIssue(line_no, reason))


def _iter_jsonl(
    lines: Iterable[str],
    issues: list[RowIssue] | None,
    strict: bool,
    stats: IngestStats | None,
) -> Iterator[TransactionRecord]:
    cache: dict = {}
    loads = json.loads
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if stats is not None:
            stats.rows += 1
        try:
            obj = loads(line)
            rec = _build_record(
                obj.get("hash"),
                obj.get("logIndex"),
                obj.get("from"),
                obj.get("to"),
                obj.get("contractAddress"),
                obj.get("timeStamp"),
                obj.get("value"),
                obj.get("kind"),
                obj.get("tokenContract"),
                cache,
            )
        except _BadRow as exc:
            _report(line_no, exc.reason, issues, strict)
            continue
        except (json.JSONDecodeError, AttributeError):
            _report(line_no, "invalid JSON object", issues, strict)
            continue
        if stats is not None:
            stats.records += 1
            stats.by_kind[rec.kind] += 1
        yield rec


def _iter_csv(
    lines: Iterable[str],
    issues: list[RowIssue] | None,
    strict: bool,
    stats: IngestStats | None,
) -> Iterator[TransactionRecord]:
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        return
    positions = {name.strip(): i for i, name in enumerate(header)}
    missing = [c for c in COLUMNS if c not in positions]
    if missing:
        raise MalformedRowError(1, f"header missing columns: {', '.join(missing)}")
    cols = [positions[c] for c in COLUMNS]
    width = max(cols) + 1
    cache: dict = {}
    for row in reader:
        if not row:
            continue
        line_no = reader.line_num
        if stats is not None:
            stats.rows += 1
        if len(row) < width:
            _report(line_no, f"expected at least {width} columns, got {len(row)}", issues, strict)
            continue
        try:
            rec = _build_record(
                row[cols[0]],
                row[cols[1]],
                row[cols[2]],
                row[cols[3]],
                row[cols[4]],
                row[cols[5]],
                row[cols[6]],
                row[cols[7]],
                row[cols[8]],
                cache,
            )
        except _BadRow as exc:
            _report(line_no, exc.reason, issues, strict)
            continue
        if stats is not None:
            stats.records += 1
            stats.by_kind[rec.kind] += 1
        yield rec


def iter_records(
    source: str | Path | IO | bytes,
    fmt: str | Format,
    *,
    issues: list[RowIssue] | None = None,
    strict: bool = False,
    stats: IngestStats | None = None,
) -> Iterator[TransactionRecord]:
    """Stream records out of ``source`` in file order.

    Bad rows are appended to ``issues`` (or raised under ``strict``);
    they never silently disappear.
    """
    fmt = parse_format(fmt)
    lines = _open_lines(source)
    close = isinstance(source, (str, Path))
    try:
        if fmt is Format.JSONL:
            yield from _iter_jsonl(lines, issues, strict, stats)
        else:
            yield from _iter_csv(lines, issues, strict, stats)
    finally:
        if close:
            lines.close()  # type: ignore[union-attr]


def parse_records(
    source: str | Path | IO | bytes,
    fmt: str | Format,
    *,
    strict: bool = False,
) -> tuple[list[TransactionRecord], list[RowIssue]]:
    """Materialize all records plus the list of malformed-row reports."""
    issues: list[RowIssue] = []
    records = list(iter_records(source, fmt, issues=issues, strict=strict))
    return records, issues


def normalize(record: TransactionRecord) -> NormalizedEdge:
    """Resolve the edge destination; raises ``NoDestinationError`` if
    neither target nor contract is present."""
    dst = record.target if record.target is not None else record.contract
    if dst is None:
        raise NoDestinationError(f"no destination for tx {record.tx_id}")
    return NormalizedEdge(
        record.sender,
        dst,
        record.timestamp,
        record.value,
        record.kind,
        record.token_contract,
        record.tx_id,
        record.log_index,
    )


def normalize_records(
    records: Iterable[TransactionRecord],
    *,
    stats: IngestStats | None = None,
) -> Iterator[NormalizedEdge]:
    """Normalize a stream, dropping and counting destination-less records."""
    for rec in records:
        dst = rec.target if rec.target is not None else rec.contract
        if dst is None:
            if stats is not None:
                stats.no_destination += 1
            continue
        yield NormalizedEdge(
            rec.sender, dst, rec.timestamp, rec.value, rec.kind,
            rec.token_contract, rec.tx_id, rec.log_index,
        )


def dedupe(
    records: Iterable[TransactionRecord],
    *,
    stats: IngestStats | None = None,
) -> Iterator[TransactionRecord]:
    """Keep the first occurrence of each ``(tx_id, log_index, kind)``.

    Order-preserving and idempotent; the number of dropped duplicates
    lands in ``stats.duplicates``.
    """
    seen: set[str] = set()
    add = seen.add
    for rec in records:
        key = f"{rec.tx_id}\x00{rec.log_index}\x00{int(rec.kind)}"
        if key in seen:
            if stats is not None:
                stats.duplicates += 1
            continue
        add(key)
        yield rec


def stream_edges(
    source: str | Path | IO | bytes,
    fmt: str | Format,
    *,
    stats: IngestStats | None = None,
    strict: bool = False,
) -> Iterator[NormalizedEdge]:
    """Full ingest pipeline: parse, dedupe, normalize, as one lazy stream."""
    issues = stats.issues if stats is not None else None
    records = iter_records(source, fmt, issues=issues, strict=strict, stats=stats)
    return normalize_records(dedupe(records, stats=stats), stats=stats)
