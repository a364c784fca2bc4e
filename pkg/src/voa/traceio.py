"""Reading and writing post traces, impression logs and result tables.

Two on-disk layouts are accepted for every record type: JSON lines (the
canonical form) and CSV with a fixed header.  Timestamps are ISO-8601,
normalized to UTC and truncated to whole seconds.

Post record::

    {"id": "p1", "publisher": "outlet", "created_at": "2018-09-27T14:03:00Z"}

Impression record::

    {"user": "bot1", "post_id": "p1", "publisher": "outlet",
     "published_at": "...", "impressed_at": "...", "position": 1}

Impressions that share ``(user, impressed_at)`` form one snapshot.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import IO, Iterable, Iterator, Sequence

from .errors import DomainError, TraceFormatError
from .records import Impression, Post, Snapshot

logger = logging.getLogger(__name__)

POST_FIELDS = ("id", "publisher", "created_at")
IMPRESSION_FIELDS = ("user", "post_id", "publisher", "published_at", "impressed_at", "position")


class Format(str, enum.Enum):
    JSONL = "jsonl"
    CSV = "csv"


_FRACTION = re.compile(r"(\.\d+)")


def parse_timestamp(text) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime (whole seconds).

    A trailing ``Z`` is accepted; a timestamp without offset is taken as UTC.
    """
    if not isinstance(text, str):
        raise ValueError(f"timestamp must be a string, got {text!r}")
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    # fromisoformat before 3.11 only takes 3 or 6 fractional digits
    s = _FRACTION.sub(lambda m: m.group(1)[:7].ljust(7, "0"), s)
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _records(stream: IO[str], fmt, fields) -> Iterator[tuple[int, dict]]:
    fmt = Format(fmt)
    if fmt is Format.JSONL:
        for lineno, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceFormatError(f"invalid JSON: {exc.msg}", lineno) from None
            if not isinstance(rec, dict):
                raise TraceFormatError("record is not a JSON object", lineno)
            yield lineno, rec
    else:
        reader = csv.DictReader(stream)
        if reader.fieldnames is None:
            return
        missing = [f for f in fields if f not in reader.fieldnames]
        if missing:
            raise TraceFormatError(f"CSV header lacks column(s) {', '.join(missing)}", 1)
        for rec in reader:
            yield reader.line_num, rec


def _field(rec, name, lineno):
    value = rec.get(name)
    if value is None or value == "":
        raise TraceFormatError(f"missing field {name!r}", lineno)
    return value


def _timestamp_field(rec, name, lineno):
    raw = _field(rec, name, lineno)
    try:
        return parse_timestamp(raw)
    except ValueError:
        raise TraceFormatError(f"unparseable timestamp in {name!r}: {raw!r}", lineno) from None


def parse_posts(stream: IO[str], fmt=Format.JSONL) -> list[Post]:
    """Read a post trace, sorted ascending by ``(created_at, id)``.

    Raises :class:`TraceFormatError` on a malformed record, a bad timestamp
    or a repeated id; the message names the offending line.
    """
    posts = []
    seen = {}
    for lineno, rec in _records(stream, fmt, POST_FIELDS):
        pid = str(_field(rec, "id", lineno))
        publisher = str(_field(rec, "publisher", lineno))
        created = _timestamp_field(rec, "created_at", lineno)
        if pid in seen:
            raise TraceFormatError(f"duplicate post id {pid!r} (first on line {seen[pid]})", lineno)
        seen[pid] = lineno
        posts.append(Post(id=pid, publisher=publisher, created_at=created))
    posts.sort(key=Post.sort_key)
    return posts


@dataclass(frozen=True)
class ImpressionRecord:
    user: str
    impression: Impression
    line: int | None = None


def read_impression_records(stream: IO[str], fmt=Format.JSONL) -> list[ImpressionRecord]:
    out = []
    for lineno, rec in _records(stream, fmt, IMPRESSION_FIELDS):
        user = str(_field(rec, "user", lineno))
        post_id = str(_field(rec, "post_id", lineno))
        publisher = str(_field(rec, "publisher", lineno))
        published = _timestamp_field(rec, "published_at", lineno)
        impressed = _timestamp_field(rec, "impressed_at", lineno)
        raw_pos = _field(rec, "position", lineno)
        try:
            if isinstance(raw_pos, bool) or isinstance(raw_pos, float):
                raise ValueError
            position = int(raw_pos)
        except (TypeError, ValueError):
            raise TraceFormatError(f"position must be an integer, got {raw_pos!r}", lineno) from None
        if position < 1:
            raise TraceFormatError(f"position must be >= 1, got {position}", lineno)
        imp = Impression(post_id, publisher, published, impressed, position)
        out.append(ImpressionRecord(user, imp, lineno))
    return out


def group_snapshots(records: Iterable[ImpressionRecord]) -> tuple[list[Snapshot], int]:
    """Group impression records into snapshots.

    Returns the snapshots, sorted by ``taken_at`` (ties in input order), and
    the number of impressions dropped because their post already appeared at
    a lower position of the same snapshot.
    """
    groups: dict[tuple[str, datetime], list[ImpressionRecord]] = {}
    for rec in records:
        groups.setdefault((rec.user, rec.impression.impressed_at), []).append(rec)
    snapshots = []
    removed = 0
    for (user, taken_at), recs in groups.items():
        recs = sorted(recs, key=lambda r: r.impression.position)
        kept = []
        ids = set()
        for r in recs:
            if r.impression.post_id in ids:
                removed += 1
                continue
            if kept and kept[-1].position == r.impression.position:
                raise TraceFormatError(
                    f"two posts share position {r.impression.position} in snapshot of "
                    f"{user!r} at {format_timestamp(taken_at)}",
                    r.line,
                )
            ids.add(r.impression.post_id)
            kept.append(r.impression)
        snapshots.append(Snapshot(user=user, taken_at=taken_at, impressions=tuple(kept)))
    snapshots.sort(key=lambda s: s.taken_at)
    return snapshots, removed


def parse_impressions(stream: IO[str], fmt=Format.JSONL) -> list[Snapshot]:
    """Read an impression log and group it into deduplicated snapshots."""
    snapshots, removed = group_snapshots(read_impression_records(stream, fmt))
    if removed:
        logger.info("dropped %d repeated impressions within snapshots", removed)
    return snapshots


def _post_row(p: Post):
    return {"id": p.id, "publisher": p.publisher, "created_at": format_timestamp(p.created_at)}


def _impression_rows(snapshots: Iterable[Snapshot]):
    for snap in snapshots:
        for imp in snap.impressions:
            yield {
                "user": snap.user,
                "post_id": imp.post_id,
                "publisher": imp.publisher,
                "published_at": format_timestamp(imp.published_at),
                "impressed_at": format_timestamp(snap.taken_at),
                "position": imp.position,
            }


def _write_rows(stream, rows, fields, fmt):
    if Format(fmt) is Format.JSONL:
        for row in rows:
            stream.write(json.dumps(row) + "\n")
    else:
        writer = csv.DictWriter(stream, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def write_posts(posts: Iterable[Post], stream: IO[str], fmt=Format.JSONL) -> None:
    _write_rows(stream, (_post_row(p) for p in posts), POST_FIELDS, fmt)


def write_impressions(snapshots: Iterable[Snapshot], stream: IO[str], fmt=Format.JSONL) -> None:
    _write_rows(stream, _impression_rows(snapshots), IMPRESSION_FIELDS, fmt)


def write_csv(stream: IO[str], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write a result table: header row, ``.`` decimals, LF line endings."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    width = len(header)
    for row in rows:
        row = list(row)
        if len(row) != width:
            raise ValueError(f"row has {len(row)} columns, header has {width}")
        writer.writerow([_cell(v) for v in row])


def _cell(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return v


@dataclass(frozen=True)
class TraceMeta:
    post_count: int
    publisher_count: int
    time_span_hours: float
    estimated_lambda: float
    daily_counts: dict[str, int] = field(default_factory=dict)


def trace_meta(posts: Sequence[Post]) -> TraceMeta:
    """Summarize a trace; the rate estimate is ``count / span`` in posts per hour.

    ``daily_counts`` maps every UTC calendar day from the first to the last
    post (zeros included) to the number of posts created that day.
    """
    if not posts:
        raise DomainError("empty trace")
    times = [p.created_at for p in posts]
    first, last = min(times), max(times)
    span = (last - first).total_seconds() / 3600.0
    if span <= 0:
        raise DomainError("trace spans zero time; the rate cannot be estimated")
    daily: dict[str, int] = {}
    day = first.date()
    while day <= last.date():
        daily[day.isoformat()] = 0
        day += timedelta(days=1)
    for t in times:
        daily[t.date().isoformat()] += 1
    return TraceMeta(
        post_count=len(posts),
        publisher_count=len({p.publisher for p in posts}),
        time_span_hours=span,
        estimated_lambda=len(posts) / span,
        daily_counts=daily,
    )
