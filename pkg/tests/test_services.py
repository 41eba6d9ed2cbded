import random

import pytest
from hypothesis import given
import hypothesis.strategies as st

from isqkit.natfu import counter_unit
from isqkit.services import (
    EMPTY_FAMILY,
    EMPTY_SERVICE,
    EmptyService,
    Reply,
    ServiceFamily,
    UnitService,
    compose,
    encapsulate,
    service_step,
    singleton,
)

from .strategies import random_family, random_service


# units compare by identity, so share one instance across the module
COUNTER = counter_unit()


def counter(state=0):
    return UnitService(COUNTER, state)


class TestServiceStep:
    def test_zero_test_true(self):
        reply, nxt = service_step(counter(0), "iszero")
        assert (reply, nxt) == (Reply.T, counter(0))

    def test_decrement_at_zero_fails(self):
        reply, nxt = service_step(counter(0), "decr")
        assert (reply, nxt) == (Reply.F, counter(0))

    def test_unknown_method_rejected(self):
        reply, nxt = service_step(counter(7), "bogus")
        assert (reply, nxt) == (Reply.D, EMPTY_SERVICE)

    def test_empty_service_rejects_everything(self):
        for method in ("incr", "bogus", "iszero"):
            assert service_step(EMPTY_SERVICE, method) == (Reply.D, EMPTY_SERVICE)


class TestFamilies:
    def test_singleton(self):
        family = singleton("f", counter(0))
        assert family.foci == {"f"}
        assert family.get("f") == counter(0)

    def test_singleton_of_empty_service(self):
        family = singleton("g", EMPTY_SERVICE)
        assert isinstance(family.get("g"), EmptyService)

    def test_disjoint_union(self):
        u = compose(singleton("f", counter(3)), singleton("g", counter(5)))
        assert u.get("f") == counter(3)
        assert u.get("g") == counter(5)

    def test_collision_collapses_to_empty(self):
        u = compose(singleton("f", counter(3)), singleton("f", counter(5)))
        assert u == singleton("f", EMPTY_SERVICE)

    def test_collision_of_equal_services_still_collapses(self):
        u = compose(singleton("f", counter(3)), singleton("f", counter(3)))
        assert u.get("f") == EMPTY_SERVICE

    def test_collision_not_recoverable(self):
        collided = compose(singleton("f", counter(3)), singleton("f", counter(5)))
        later = compose(collided, singleton("g", counter(1)))
        assert later.get("f") == EMPTY_SERVICE

    def test_encapsulate_hides(self):
        u = compose(singleton("f", counter(0)), singleton("g", EMPTY_SERVICE))
        assert encapsulate({"f"}, u) == singleton("g", EMPTY_SERVICE)

    def test_encapsulate_foreign_focus_is_noop(self):
        u = singleton("f", counter(0))
        assert encapsulate({"h"}, u) == u

    def test_bad_focus_rejected(self):
        with pytest.raises(ValueError):
            ServiceFamily({"Bad": counter(0)})


SEED_CASES = 400


class TestAlgebraSeeded:
    """The family algebra laws, checked on seeded random families."""

    def test_composition_laws(self):
        rng = random.Random(21)
        for _ in range(SEED_CASES):
            u, v, w = (random_family(rng) for _ in range(3))
            assert compose(u, EMPTY_FAMILY) == u
            assert compose(u, v) == compose(v, u)
            assert compose(compose(u, v), w) == compose(u, compose(v, w))

    def test_collision_law(self):
        rng = random.Random(22)
        for _ in range(SEED_CASES):
            first, second = random_service(rng), random_service(rng)
            assert compose(singleton("f", first), singleton("f", second)) == singleton(
                "f", EMPTY_SERVICE
            )

    def test_encapsulation_laws(self):
        rng = random.Random(23)
        for _ in range(SEED_CASES):
            u, v = random_family(rng), random_family(rng)
            hidden = {f for f in ("f", "g", "h") if rng.random() < 0.5}
            assert encapsulate(hidden, EMPTY_FAMILY) == EMPTY_FAMILY
            svc = random_service(rng)
            if "f" in hidden:
                assert encapsulate(hidden, singleton("f", svc)) == EMPTY_FAMILY
            else:
                assert encapsulate(hidden, singleton("f", svc)) == singleton("f", svc)
            assert encapsulate(hidden, compose(u, v)) == compose(
                encapsulate(hidden, u), encapsulate(hidden, v)
            )

    @given(st.randoms(use_true_random=False))
    def test_empty_encapsulation_set(self, rng):
        u = random_family(rng)
        assert encapsulate(frozenset(), u) == u
