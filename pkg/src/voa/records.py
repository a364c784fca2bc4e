"""Record types shared by the simulator, the analytics and the I/O layer."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime


def _check_utc(name, value):
    if not isinstance(value, datetime) or value.tzinfo is None:
        raise ValueError(f"{name} must be a timezone-aware datetime, got {value!r}")


@dataclass(frozen=True)
class Post:
    """A publication by a source, identified by ``id`` within a trace."""

    id: str
    publisher: str
    created_at: datetime

    def __post_init__(self):
        _check_utc("created_at", self.created_at)

    def sort_key(self):
        return (self.created_at, self.id)


@dataclass(frozen=True)
class Impression:
    post_id: str
    publisher: str
    published_at: datetime
    impressed_at: datetime
    position: int

    def __post_init__(self):
        if self.position < 1:
            raise ValueError(f"position must be >= 1, got {self.position}")


@dataclass(frozen=True)
class Snapshot:
    """One recorded timeline view: ``impressions`` ordered by position."""

    user: str
    taken_at: datetime
    impressions: tuple[Impression, ...]

    def __post_init__(self):
        object.__setattr__(self, "impressions", tuple(self.impressions))
        last = 0
        seen = set()
        for imp in self.impressions:
            if imp.position <= last:
                raise ValueError(
                    f"positions must be strictly increasing in snapshot of {self.user!r} "
                    f"at {self.taken_at.isoformat()}"
                )
            if imp.post_id in seen:
                raise ValueError(f"post {imp.post_id!r} repeated within one snapshot")
            last = imp.position
            seen.add(imp.post_id)

    def post_ids(self, k=None):
        """Post ids in position order, optionally keeping only positions ``<= k``."""
        return [imp.post_id for imp in self.impressions if k is None or imp.position <= k]

