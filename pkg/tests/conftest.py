import random

import pytest

from linkrec.linkstream import Event, LinkStream

# The two-user four-item toy stream used throughout: u1 picks i1, i2, i3, i2
# at t = 1, 2, 4, 6 and u2 picks i3, i3, i4, i4 at t = 1, 2, 3, 5.
TOY_EVENTS = (
    Event(1, "u1", "i1"),
    Event(1, "u2", "i3"),
    Event(2, "u1", "i2"),
    Event(2, "u2", "i3"),
    Event(3, "u2", "i4"),
    Event(4, "u1", "i3"),
    Event(5, "u2", "i4"),
    Event(6, "u1", "i2"),
)


@pytest.fixture
def toy_stream() -> LinkStream:
    return LinkStream.from_events(TOY_EVENTS)


def make_stream(
    seed: int,
    n_users: int = 5,
    n_items: int = 8,
    n_events: int = 40,
    t_max: int = 1000,
    with_ratings: bool = False,
) -> LinkStream:
    """Random but reproducible link stream for property-style tests."""
    rng = random.Random(seed)
    events = set()
    while len(events) < n_events:
        events.add(
            Event(
                t=rng.randrange(t_max),
                user=f"u{rng.randrange(n_users)}",
                item=f"i{rng.randrange(n_items)}",
                rating=float(rng.randint(0, 5)) if with_ratings else None,
            )
        )
    return LinkStream.from_events(events)


@pytest.fixture
def stream_factory():
    return make_stream
