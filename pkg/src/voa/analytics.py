"""VoA and overlap statistics computed from measured snapshot logs."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from .errors import DomainError
from .records import Snapshot


def voa_from_snapshots(
    snapshots: Sequence[Snapshot], k_truncate: Optional[int] = None
) -> tuple[list[int], float]:
    """Novel impressions per snapshot for a single user.

    With ``k_truncate`` only positions ``<= k_truncate`` are considered, both
    for counting and for what counts as already seen.  Returns the per-snapshot
    counts and their mean (0.0 for no snapshots).
    """
    if k_truncate is not None and k_truncate < 1:
        raise DomainError(f"k_truncate must be >= 1, got {k_truncate}")
    users = {s.user for s in snapshots}
    if len(users) > 1:
        raise DomainError(f"snapshots from several users: {sorted(users)}")
    for a, b in zip(snapshots, snapshots[1:]):
        if b.taken_at < a.taken_at:
            raise DomainError("snapshots must be sorted by taken_at")
    seen: set[str] = set()
    counts = []
    for snap in snapshots:
        ids = snap.post_ids(k_truncate)
        counts.append(sum(1 for pid in ids if pid not in seen))
        seen.update(ids)
    mean = sum(counts) / len(counts) if counts else 0.0
    return counts, mean


def reorder_fifo(snapshot: Snapshot) -> Snapshot:
    """Reorder a snapshot reverse-chronologically and renumber positions 1..n.

    Ties in publication time are broken by ascending post id.
    """
    ordered = sorted(snapshot.impressions, key=lambda imp: imp.post_id)
    ordered.sort(key=lambda imp: imp.published_at, reverse=True)
    renumbered = tuple(replace(imp, position=i) for i, imp in enumerate(ordered, start=1))
    return replace(snapshot, impressions=renumbered)


def snapshots_by_user(snapshots: Iterable[Snapshot]) -> dict[str, list[Snapshot]]:
    """Split snapshots per user, keeping their relative order."""
    out: dict[str, list[Snapshot]] = {}
    for s in snapshots:
        out.setdefault(s.user, []).append(s)
    return out


@dataclass(frozen=True)
class OverlapTable:
    """2x2 partition of a universe of posts by whether X and Y viewed them."""

    both: int
    only_x: int
    only_y: int
    neither: int

    def __post_init__(self):
        if min(self.both, self.only_x, self.only_y, self.neither) < 0:
            raise DomainError("contingency counts must be >= 0")

    @property
    def universe_size(self) -> int:
        return self.both + self.only_x + self.only_y + self.neither

    def transposed(self) -> "OverlapTable":
        return OverlapTable(self.both, self.only_y, self.only_x, self.neither)


def overlap_table(x_posts, y_posts, universe) -> OverlapTable:
    x, y, u = set(x_posts), set(y_posts), set(universe)
    if not x <= u or not y <= u:
        raise DomainError("viewed posts must belong to the universe")
    both = len(x & y)
    only_x = len(x) - both
    only_y = len(y) - both
    return OverlapTable(both, only_x, only_y, len(u) - both - only_x - only_y)


def coverage_fraction(table: OverlapTable) -> float:
    """Share of Y's posts that X also viewed: ``both / (both + only_y)``."""
    denom = table.both + table.only_y
    if denom == 0:
        raise DomainError("Y viewed no posts; coverage is undefined")
    return table.both / denom


def pairwise_overlap(x_posts, y_posts, universe=None) -> float:
    """Symmetric overlap score: the larger of the two directional coverages.

    A direction whose target set is empty is skipped; both empty is an error.
    """
    if universe is None:
        universe = set(x_posts) | set(y_posts)
    return pairwise_overlap_from_table(overlap_table(x_posts, y_posts, universe))


def pairwise_overlap_from_table(table: OverlapTable) -> float:
    scores = []
    if table.both + table.only_y:
        scores.append(coverage_fraction(table))
    if table.both + table.only_x:
        scores.append(coverage_fraction(table.transposed()))
    if not scores:
        raise DomainError("both post sets are empty")
    return max(scores)


@dataclass(frozen=True)
class ViewerEcdf:
    """Empirical CDF of how many users viewed each post."""

    points: tuple[tuple[int, float], ...]

    def __call__(self, viewer_count: float) -> float:
        frac = 0.0
        for count, cum in self.points:
            if count > viewer_count:
                break
            frac = cum
        return frac


def viewer_ecdf(post_sets: Sequence[Iterable[str]]) -> ViewerEcdf:
    sets = [set(s) for s in post_sets]
    union = set().union(*sets) if sets else set()
    if not union:
        raise DomainError("no posts viewed by any user")
    viewers = Counter()
    for s in sets:
        viewers.update(s)
    hist = Counter(viewers.values())
    n = len(union)
    points = []
    acc = 0
    for count in sorted(hist):
        acc += hist[count]
        points.append((count, acc / n))
    return ViewerEcdf(tuple(points))
