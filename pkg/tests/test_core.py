"""Exact types, schedules, optimum search, and the instance file format."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqsched import (
    BudgetExceededError,
    Instance,
    InstanceFormatError,
    as_rational,
    constrained_opt,
    format_instance,
    loads,
    makespan,
    opt,
    parse_instance,
)
from seqsched.verify import random_instance


class TestAsRational:
    @pytest.mark.parametrize(
        "value, expected",
        [
            (3, Fraction(3)),
            (Fraction(2, 7), Fraction(2, 7)),
            ("3", Fraction(3)),
            ("2/3", Fraction(2, 3)),
            ("0.01", Fraction(1, 100)),
            ("387/100", Fraction(387, 100)),
        ],
    )
    def test_exact_conversions(self, value, expected):
        result = as_rational(value)
        assert result == expected
        assert isinstance(result, Fraction)

    def test_decimal_strings_are_exact_not_binary_floats(self):
        assert as_rational("0.1") == Fraction(1, 10) != Fraction(0.1)

    def test_rejects_floats(self):
        with pytest.raises(TypeError):
            as_rational(0.1)

    def test_rejects_garbage_strings(self):
        with pytest.raises(ValueError):
            as_rational("three")


class TestInstance:
    def test_from_rows_mixed_tokens(self):
        inst = Instance.from_rows([["1/2", 1], [2, "0.25"]])
        assert inst.p == ((Fraction(1, 2), Fraction(1)), (Fraction(2), Fraction(1, 4)))
        assert inst.m == 2
        assert inst.n == 2
        assert inst.initial_loads == (Fraction(0), Fraction(0))

    def test_initial_loads(self):
        inst = Instance.from_rows([[1], [1]], initial_loads=["3/2", 0])
        assert inst.initial_loads == (Fraction(3, 2), Fraction(0))

    def test_rejects_ragged_rows(self):
        with pytest.raises(ValueError, match="unequal"):
            Instance.from_rows([[1, 2], [3]])

    def test_rejects_negative_times(self):
        with pytest.raises(ValueError, match="negative"):
            Instance.from_rows([[1, -1]])

    def test_rejects_wrong_load_count(self):
        with pytest.raises(ValueError, match="initial_loads"):
            Instance.from_rows([[1], [1]], initial_loads=[0])

    def test_rejects_zero_machines(self):
        with pytest.raises(ValueError, match="at least one machine"):
            Instance.from_rows([])


class TestLoadsAndMakespan:
    def test_complete_schedule(self, two_by_two):
        assert loads(two_by_two, (0, 1)) == (Fraction(2), Fraction(2))
        assert loads(two_by_two, (1, 0)) == (Fraction(1), Fraction(1))
        assert makespan(two_by_two, (1, 0)) == 1

    def test_partial_schedule_mapping(self, two_by_two):
        assert loads(two_by_two, {1: 0}) == (Fraction(1), Fraction(0))
        assert loads(two_by_two, {}) == (Fraction(0), Fraction(0))

    def test_initial_loads_are_included(self):
        inst = Instance.from_rows([[1], [1]], initial_loads=[5, 0])
        assert loads(inst, (1,)) == (Fraction(5), Fraction(1))

    def test_wrong_length_schedule_rejected(self, two_by_two):
        with pytest.raises(ValueError, match="covers"):
            loads(two_by_two, (0,))

    def test_out_of_range_machine_rejected(self, two_by_two):
        with pytest.raises(ValueError, match="machine index"):
            loads(two_by_two, (0, 2))


def brute_force_opt(inst):
    """Independent oracle: scan every schedule, keep the lexicographically
    smallest argmin."""
    best = None
    for schedule in itertools.product(range(inst.m), repeat=inst.n):
        ms = makespan(inst, schedule)
        if best is None or ms < best[0]:
            best = (ms, schedule)
    return best


class TestOpt:
    def test_known_instance(self, two_by_two):
        assert opt(two_by_two) == (Fraction(1), (1, 0))

    def test_matches_brute_force_on_random_instances(self, rng):
        for _ in range(40):
            m = rng.randint(1, 3)
            n = rng.randint(1, 5)
            inst = random_instance(rng, m, n)
            assert opt(inst) == brute_force_opt(inst)

    def test_budget_guard(self):
        inst = Instance.from_rows([[1, 1, 1], [1, 1, 1]])
        with pytest.raises(BudgetExceededError):
            opt(inst, budget=7)

    def test_respects_initial_loads(self):
        inst = Instance.from_rows([[1], [1]], initial_loads=[10, 0])
        assert opt(inst) == (Fraction(10), (1,))


class TestConstrainedOpt:
    def test_empty_fixed_equals_opt(self, two_by_two):
        assert constrained_opt(two_by_two, {}) == opt(two_by_two)

    def test_pin_forces_completion(self, two_by_two):
        ms, schedule = constrained_opt(two_by_two, {0: 0})
        assert schedule[0] == 0
        assert ms == Fraction(2)

    def test_matches_filtered_brute_force(self, rng):
        for _ in range(25):
            inst = random_instance(rng, 2, 4)
            fixed = {0: rng.randrange(2), 2: rng.randrange(2)}
            ms, schedule = constrained_opt(inst, fixed)
            candidates = [
                s
                for s in itertools.product(range(2), repeat=4)
                if all(s[j] == c for j, c in fixed.items())
            ]
            expected = min(candidates, key=lambda s: (makespan(inst, s), s))
            assert (ms, schedule) == (makespan(inst, expected), expected)

    def test_rejects_bad_pin(self, two_by_two):
        with pytest.raises(ValueError, match="job index"):
            constrained_opt(two_by_two, {7: 0})


class TestFileFormat:
    def test_round_trip(self, rng):
        for _ in range(20):
            inst = random_instance(rng, rng.randint(1, 3), rng.randint(1, 5))
            assert parse_instance(format_instance(inst)) == inst

    def test_round_trip_with_initial_loads(self):
        inst = Instance.from_rows([[1, "1/3"], [2, 0]], initial_loads=["5/7", 1])
        text = format_instance(inst)
        assert "initial_loads 5/7 1" in text
        assert parse_instance(text) == inst

    def test_comments_and_blank_lines_ignored(self):
        text = "# a comment\n\n2 1\n3\n\n# trailing\n4\n"
        assert parse_instance(text) == Instance.from_rows([[3], [4]])

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("", "empty"),
            ("2\n1 2\n3 4\n", "header"),
            ("x y\n", "integer"),
            ("0 2\n", "dimensions"),
            ("2 2\n1 2\n", "machine rows"),
            ("1 2\n1 2 3\n", "2 values"),
            ("1 1\n-1\n", "negative"),
        ],
    )
    def test_malformed_inputs(self, text, fragment):
        with pytest.raises(InstanceFormatError, match=fragment):
            parse_instance(text)

    def test_error_carries_line_number(self):
        with pytest.raises(InstanceFormatError) as exc_info:
            parse_instance("# comment\n2 1\n1\nbogus\n")
        assert exc_info.value.line_no == 4


@settings(max_examples=60, deadline=None)
@given(
    rows=st.lists(
        st.lists(st.integers(min_value=0, max_value=9), min_size=1, max_size=4),
        min_size=1,
        max_size=3,
    ).filter(lambda rows: len({len(r) for r in rows}) == 1)
)
def test_format_parse_identity_property(rows):
    inst = Instance.from_rows(rows)
    assert parse_instance(format_instance(inst)) == inst


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_opt_is_a_lower_bound_for_every_schedule(data):
    m = data.draw(st.integers(1, 3))
    n = data.draw(st.integers(1, 4))
    rows = data.draw(
        st.lists(
            st.lists(st.integers(0, 8), min_size=n, max_size=n),
            min_size=m,
            max_size=m,
        )
    )
    inst = Instance.from_rows(rows)
    ms, witness = opt(inst)
    assert makespan(inst, witness) == ms
    schedule = tuple(data.draw(st.integers(0, m - 1)) for _ in range(n))
    assert ms <= makespan(inst, schedule)
