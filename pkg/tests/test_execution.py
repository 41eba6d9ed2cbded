import random

import pytest

from isqkit.execution import (
    ExecMode,
    Reachable,
    Status,
    reachable_states,
    run,
)
from isqkit.funit import restrict
from isqkit.isa import parse_program
from isqkit.natfu import counter_unit, decr_n_unit
from isqkit.services import (
    EMPTY_FAMILY,
    Reply,
    UnitService,
    compose,
    encapsulate,
    service_step,
    singleton,
)
from isqkit.threads import DEADLOCK, TAU, TERM_N, TERM_P, extract

from .strategies import leaf, postcond, random_family, random_service, random_spec


COUNTER = counter_unit()


def counter_family(state=0, focus="f"):
    return singleton(focus, UnitService(COUNTER, state))


def ex(text):
    return extract(parse_program(text))


class TestRun:
    def test_immediate_termination_keeps_family(self):
        family = counter_family(9)
        out = run(ex("!t"), family)
        assert out.status is Status.COMPLETED
        assert out.reply is Reply.T
        assert out.family == family

    def test_missing_focus_diverges(self):
        out = run(ex("+g.m ; !t ; !f"), counter_family(0))
        assert out.status is Status.PROVEN_DIVERGENT
        assert out.reply is Reply.D
        assert out.family == EMPTY_FAMILY

    def test_counter_program(self):
        out = run(ex("f.incr ; f.incr ; +f.iszero ; !t ; !f"), counter_family(0))
        assert out.status is Status.COMPLETED
        assert out.reply is Reply.F
        assert out.family == counter_family(2)

    def test_cycle_detected(self):
        out = run(ex("+f.iszero ; \\1 ; !t"), counter_family(0))
        assert out.status is Status.PROVEN_DIVERGENT
        assert out.family == EMPTY_FAMILY

    def test_rejected_method_diverges(self):
        out = run(ex("f.bogus ; !t"), counter_family(0))
        assert out.status is Status.PROVEN_DIVERGENT

    def test_budget_exhaustion_reported(self):
        mode = ExecMode(budget=5, detect_cycles=False)
        out = run(ex("f.incr ; \\1"), counter_family(0), mode)
        assert out.status is Status.BUDGET_EXHAUSTED
        assert out.reply is Reply.D

    def test_unbounded_loop_without_cycles_is_budgeted(self):
        # states grow forever, so only the budget can stop the run
        out = run(ex("f.incr ; \\1"), counter_family(0), ExecMode(budget=1000))
        assert out.status is Status.BUDGET_EXHAUSTED
        assert out.steps == 1000

    def test_mode_requires_a_limit(self):
        with pytest.raises(ValueError):
            ExecMode(budget=None, detect_cycles=False)

    def test_trace_replay_reproduces_family(self):
        rng = random.Random(5)
        for _ in range(200):
            spec = random_spec(rng)
            family = random_family(rng)
            out = run(spec, family, collect_trace=True)
            if out.status is not Status.COMPLETED:
                continue
            replayed = family
            for step in out.trace:
                svc = replayed.get(step.action.focus)
                reply, nxt = service_step(svc, step.action.method)
                assert reply == step.reply
                replayed = replayed.updated(step.action.focus, nxt)
            assert replayed == out.family

    def test_outcome_coherence(self):
        # completed iff Boolean reply; any divergence leaves the empty family
        rng = random.Random(8)
        for _ in range(300):
            out = run(random_spec(rng), random_family(rng), ExecMode(budget=50))
            assert (out.reply in (Reply.T, Reply.F)) == (out.status is Status.COMPLETED)
            if out.status is not Status.COMPLETED:
                assert out.reply is Reply.D
                assert out.family == EMPTY_FAMILY

    def test_budget_monotone(self):
        rng = random.Random(6)
        for _ in range(200):
            spec = random_spec(rng)
            family = random_family(rng)
            small = run(spec, family, ExecMode(budget=4))
            if small.status is Status.BUDGET_EXHAUSTED:
                continue
            big = run(spec, family, ExecMode(budget=4000))
            assert (small.status, small.reply, small.family) == (
                big.status,
                big.reply,
                big.family,
            )


class TestAxiomInstances:
    """Each execution law instantiated directly against run."""

    def outcome(self, spec, family):
        out = run(spec, family)
        return out.status, out.reply, out.family

    def test_termination_and_deadlock_laws(self):
        rng = random.Random(31)
        for _ in range(300):
            u = random_family(rng)
            assert self.outcome(leaf(TERM_P), u) == (Status.COMPLETED, Reply.T, u)
            assert self.outcome(leaf(TERM_N), u) == (Status.COMPLETED, Reply.F, u)
            assert self.outcome(leaf(DEADLOCK), u) == (
                Status.PROVEN_DIVERGENT,
                Reply.D,
                EMPTY_FAMILY,
            )

    def test_internal_step_law(self):
        rng = random.Random(32)
        for _ in range(300):
            x = random_spec(rng, max_states=3)
            u = random_family(rng)
            assert self.outcome(postcond(TAU, x, x), u) == self.outcome(x, u)

    def test_missing_focus_law(self):
        rng = random.Random(33)
        for _ in range(300):
            x, y = random_spec(rng, 3), random_spec(rng, 3)
            u = random_family(rng)
            action = parse_program("f.m").instructions[0].basic
            hidden = encapsulate({"f"}, u)
            assert self.outcome(postcond(action, x, y), hidden) == (
                Status.PROVEN_DIVERGENT,
                Reply.D,
                EMPTY_FAMILY,
            )

    def test_processing_laws(self):
        from isqkit.isa import BasicInstruction

        rng = random.Random(34)
        for _ in range(300):
            x, y = random_spec(rng, 3), random_spec(rng, 3)
            u = random_family(rng)
            svc = random_service(rng)
            method = rng.choice(["m0", "m1", "nosuch"])
            family = compose(singleton("f", svc), encapsulate({"f"}, u))
            lhs = self.outcome(postcond(BasicInstruction("f", method), x, y), family)
            reply, nxt = service_step(svc, method)
            if reply is Reply.D:
                assert lhs == (Status.PROVEN_DIVERGENT, Reply.D, EMPTY_FAMILY)
            else:
                branch = x if reply is Reply.T else y
                updated = compose(singleton("f", nxt), encapsulate({"f"}, u))
                assert lhs == self.outcome(branch, updated)

    def test_projection_compatibility(self):
        from isqkit.threads import truncate

        rng = random.Random(35)
        checked = 0
        for _ in range(400):
            spec = random_spec(rng, 4)
            family = random_family(rng)
            depth = rng.randint(0, 6)
            cut = run(truncate(spec, depth), family)
            if cut.status is Status.COMPLETED and cut.steps <= depth:
                full = run(spec, family)
                assert (cut.status, cut.reply, cut.family) == (
                    full.status,
                    full.reply,
                    full.family,
                )
                checked += 1
        assert checked > 20


class TestReachableStates:
    def test_two_method_unit_closure(self):
        reach = reachable_states(decr_n_unit(2), 2, 10)
        assert reach == Reachable(frozenset({2, 0}), True)

    def test_state_preserving_method(self):
        reach = reachable_states(restrict(counter_unit(), {"iszero"}), 5, 10)
        assert reach == Reachable(frozenset({5}), True)

    def test_unbounded_growth_is_flagged(self):
        reach = reachable_states(counter_unit(), 0, 10)
        assert reach.states == frozenset(range(10))
        assert not reach.complete
