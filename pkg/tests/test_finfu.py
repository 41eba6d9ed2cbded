import random

import pytest

from isqkit.finfu import (
    ClosureBudget,
    compose_behavior,
    const_false,
    const_true,
    count_degrees,
    derivation_witnesses,
    derived_closure,
    diverged,
    enumerate_mo,
    equivalent_by_closure,
    leq_by_closure,
    minimal_generators,
    render_behavior,
)
from isqkit.funit import FunctionalUnit, MethodOperation, derived_op

from .strategies import random_table, random_unit

from .test_funit import brute_force_tables


class TestEnumerate:
    def test_two_states(self):
        assert len(enumerate_mo(2)) == 16

    def test_one_state(self):
        ops = enumerate_mo(1)
        assert len(ops) == 2
        assert {op.table for op in ops} == {((False, 0),), ((True, 0),)}

    def test_three_states(self):
        assert len(enumerate_mo(3)) == 216

    def test_tables_are_distinct(self):
        tables = [op.table for op in enumerate_mo(2)]
        assert len(set(tables)) == 16

    def test_deterministic_order(self):
        assert [op.table for op in enumerate_mo(2)] == [
            op.table for op in enumerate_mo(2)
        ]

    def test_bound_checked(self):
        with pytest.raises(ValueError):
            enumerate_mo(5)
        with pytest.raises(ValueError):
            enumerate_mo(0)


class TestDerivedClosure:
    def test_empty_unit(self):
        closed = derived_closure((), 2)
        assert closed.members == {const_true(2), const_false(2)}

    def test_generator_coinciding_with_base(self):
        identity_true = MethodOperation.from_table("m", const_true(2))
        closed = derived_closure([identity_true], 2)
        assert len(closed) == 2

    def test_swap_generator_against_brute_force(self):
        swap = MethodOperation.from_table("m", ((True, 1), (True, 0)))
        closed = derived_closure([swap], 2)
        unit = FunctionalUnit({"m": swap}, 2)
        assert closed.members == brute_force_tables(unit)

    def test_idempotent(self):
        rng = random.Random(51)
        for _ in range(30):
            generators = [random_table(rng, 2) for _ in range(rng.randint(0, 3))]
            once = derived_closure(generators, 2)
            again = derived_closure(once.members, 2)
            assert once.members == again.members

    def test_monotone(self):
        rng = random.Random(52)
        for _ in range(30):
            small = [random_table(rng, 2) for _ in range(rng.randint(0, 2))]
            big = small + [random_table(rng, 2)]
            assert derived_closure(small, 2).members <= derived_closure(big, 2).members

    def test_base_members_always_present(self):
        rng = random.Random(53)
        for _ in range(20):
            generators = [random_table(rng, 3) for _ in range(rng.randint(0, 3))]
            closed = derived_closure(generators, 3)
            assert const_true(3) in closed.members
            assert const_false(3) in closed.members
            for g in generators:
                assert g in closed.members

    def test_rejects_partial_generators(self):
        with pytest.raises(ValueError):
            derived_closure([diverged(2)], 2)


class TestWitnesses:
    def test_every_member_has_a_program(self):
        rng = random.Random(54)
        for _ in range(10):
            unit = random_unit(rng, 2, rng.randint(1, 2))
            witnesses = derivation_witnesses(unit)
            closed = derived_closure(unit.ops.values(), 2)
            assert set(witnesses) == closed.members
            for table, program in witnesses.items():
                assert derived_op(program, unit).tabulate(2) == table


class TestCountDegrees:
    def test_boolean_state_space(self):
        result = count_degrees(2)
        assert result.count == 12
        assert result.exact

    def test_single_state_space(self):
        # regression constant: computed once by exhaustive closure enumeration
        result = count_degrees(1)
        assert result.count == 1
        assert result.exact

    def test_generator_order_irrelevant(self):
        # a breadth-first exploration over a shuffled generator list reaches
        # exactly the same closures
        reference = {c.fingerprint for c in count_degrees(2).sets}
        rng = random.Random(99)
        for _ in range(3):
            tables = [op.table for op in enumerate_mo(2)]
            rng.shuffle(tables)
            start = derived_closure((), 2)
            seen = {start.fingerprint}
            queue = [start]
            while queue:
                current = queue.pop()
                for table in tables:
                    if table in current.members:
                        continue
                    extended = derived_closure(current.members | {table}, 2)
                    if extended.fingerprint not in seen:
                        seen.add(extended.fingerprint)
                        queue.append(extended)
            assert seen == reference

    def test_budget_flags_truncation(self):
        result = count_degrees(2, ClosureBudget(max_sets=4))
        assert not result.exact
        assert result.count <= 5

    def test_sets_are_distinct_closures(self):
        result = count_degrees(2)
        assert len({c.fingerprint for c in result.sets}) == result.count
        for closed in result.sets:
            assert derived_closure(closed.members, 2).members == closed.members


class TestLeqByClosure:
    def test_reflexive_and_vacuous(self):
        rng = random.Random(55)
        for _ in range(20):
            unit = random_unit(rng, 2, rng.randint(1, 3))
            assert leq_by_closure(unit, unit)
            assert leq_by_closure(FunctionalUnit({}, 2), unit)

    def test_mismatched_spaces_rejected(self):
        with pytest.raises(ValueError):
            leq_by_closure(random_unit(random.Random(0), 2, 1), random_unit(random.Random(0), 3, 1))

    def test_agrees_with_brute_force_for_singletons(self):
        rng = random.Random(56)
        ops = enumerate_mo(2)
        for _ in range(12):
            left = FunctionalUnit({"a": rng.choice(ops)}, 2)
            right = FunctionalUnit({"b": rng.choice(ops)}, 2)
            brute = left.ops["a"].table in brute_force_tables(right)
            assert leq_by_closure(left, right) == brute

    def test_equivalence_symmetry(self):
        rng = random.Random(57)
        for _ in range(10):
            a = random_unit(rng, 2, 1)
            b = random_unit(rng, 2, 1)
            assert equivalent_by_closure(a, b) == equivalent_by_closure(b, a)


class TestGeneratorsAndRendering:
    def test_minimal_generators_reproduce_closure(self):
        result = count_degrees(2)
        for closed in result.sets:
            generators = minimal_generators(closed)
            assert derived_closure(generators, 2).members == closed.members

    def test_empty_closure_needs_no_generators(self):
        closed = derived_closure((), 2)
        assert minimal_generators(closed) == ()

    def test_render(self):
        assert render_behavior(((True, 1), (False, 0))) == "T1,F0"
        assert render_behavior((None, (True, 0))) == "-,T0"


class TestComposeBehavior:
    def test_branches_on_reply(self):
        generator = ((True, 1), (False, 0))
        on_true = const_false(2)
        on_false = const_true(2)
        assert compose_behavior(generator, on_true, on_false) == ((False, 1), (True, 0))

    def test_divergence_propagates(self):
        generator = ((True, 0), (True, 1))
        assert compose_behavior(generator, diverged(2), const_true(2)) == (None, None)
