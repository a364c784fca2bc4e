from datetime import datetime, timedelta, timezone

import pytest

from voa.kernels import available_backends
from voa.records import Impression, Post, Snapshot

T0 = datetime(2018, 9, 1, tzinfo=timezone.utc)


@pytest.fixture(params=sorted(available_backends()))
def backend(request):
    """Each kernel implementation importable in this environment."""
    return available_backends()[request.param]


def hours(h):
    return T0 + timedelta(hours=h)


def make_posts(n, spacing_hours=1.0):
    """Posts p1..pn created at hours 1..n (times spacing)."""
    return [Post(id=f"p{i}", publisher="src", created_at=hours(i * spacing_hours)) for i in range(1, n + 1)]


def make_snapshot(user, taken_h, post_ids, published_h=None):
    """Snapshot with ``post_ids`` at positions 1..n; publication hours default to 0."""
    published_h = published_h or [0.0] * len(post_ids)
    imps = tuple(
        Impression(pid, "src", hours(ph), hours(taken_h), pos)
        for pos, (pid, ph) in enumerate(zip(post_ids, published_h), start=1)
    )
    return Snapshot(user=user, taken_at=hours(taken_h), impressions=imps)
