import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import grammar_spaces, oracle_pp, scramble
from ordspace.errors import CapExceeded, InvalidSpace, MonotonicityViolation, ParseError
from ordspace.ppform import (
    BoundOverflow,
    Monomial,
    bound_B,
    check_tower,
    evaluate,
    evaluate_on_subspace,
    parse,
    parse_formula_file,
    search_counterexample_subspace,
)
from ordspace.qx import build_tower
from ordspace.ratpoly import parse_polynomial
from ordspace.structure import direct_sum, is_isomorphic, make_fan
from ordspace.space import one_point, push_element, subspace_generated


@pytest.fixture(scope="module")
def fan4():
    return make_fan(3)


@pytest.fixture(scope="module")
def tower2():
    return build_tower([[parse_polynomial("x^2-2")], [parse_polynomial("x^2-3")]])


# -- syntax --------------------------------------------------------------------


def test_parse_example():
    f = parse("E t1 t2 : t1*a1 in D(1, t2) & -a1 in D(1, t1*t2)")
    assert f.variables == ("t1", "t2")
    assert f.parameters == ("a1",)
    assert len(f.atoms) == 2
    assert f.atoms[1].p == Monomial(True, frozenset({"a1"}))
    assert parse(str(f)) == f


def test_parse_cancels_squares_and_ones():
    f = parse("E t : t*a*t in D(1, -1*1)")
    assert f.atoms[0].p == Monomial(False, frozenset({"a"}))
    assert f.atoms[0].q == Monomial(True, frozenset())


def test_parse_without_variables():
    f = parse("E : -1 in D(1, a)")
    assert f.variables == () and f.parameters == ("a",)


def test_formula_file():
    text = "# two formulas\nE t : t in D(1, a)\n\nE : a in D(1, b)  # trailing\n"
    fs = parse_formula_file(text)
    assert [f.parameters for f in fs] == [("a",), ("a", "b")]


@pytest.mark.parametrize(
    "bad",
    [
        "t in D(1, a)",
        "E t t : t in D(1, a)",
        "E t :",
        "E t : t in D(2, a)",
        "E t : t in D(1, a",
        "E in : t in D(1, a)",
        "E t : t in D(1, a) &",
        "E t : t D(1, a)",
        "E t : t in D(1, a) $",
    ],
)
def test_parse_errors(bad):
    with pytest.raises(ParseError) as info:
        parse(bad)
    assert info.value.position is not None


def test_declared_parameters():
    assert parse("E t : t in D(1, a)", parameters=["a"]).parameters == ("a",)
    with pytest.raises(ParseError, match="undeclared"):
        parse("E t : t in D(1, b)", parameters=["a"])


# -- evaluation ----------------------------------------------------------------


def test_frozen_examples(fan4):
    minus = parse("E : -1 in D(1, a)")
    assert evaluate(fan4, minus, {"a": "-1"}).holds
    assert not evaluate(fan4, minus, {"a": "f1"}).holds
    trivial = parse("E t : t in D(1, a)")
    v = evaluate(fan4, trivial, {"a": "f1"})
    assert v.holds and v.witness == {"t": 0}
    # t must be negative exactly where a is positive, which forces t = -a
    f = parse("E t : t in D(1, -a) & -t in D(1, a)")
    v = evaluate(fan4, f, {"a": "f1"})
    assert v.holds and fan4.format_element(v.witness["t"]) == "-f1"
    g = parse("E t : t in D(1, -a) & -t in D(1, a) & -1 in D(1, t*a*b)")
    assert not evaluate(fan4, g, {"a": "f1", "b": "f2"}).holds


def test_verdict_json(fan4):
    v = evaluate(fan4, parse("E t : -t in D(1, a)"), {"a": "f1"})
    assert v.to_json() == {"holds": True, "witness": {"t": "-1"}, "level": None}


def test_unbound_parameter(fan4):
    with pytest.raises(InvalidSpace):
        evaluate(fan4, parse("E t : t in D(1, a)"), {})


def test_assignment_cap(fan4):
    f = parse("E t u v : t*u*v in D(1, 1)")
    with pytest.raises(CapExceeded):
        evaluate(fan4, f, cap=100)


NAMES_V = ["t1", "t2"]
NAMES_P = ["a1", "a2"]


@st.composite
def formulas(draw):
    nvars = draw(st.integers(0, 2))
    variables = NAMES_V[:nvars]
    pool = variables + NAMES_P

    def term():
        names = draw(st.lists(st.sampled_from(pool), max_size=3))
        body = "*".join(names) or "1"
        return ("-" if draw(st.booleans()) else "") + body

    atoms = [f"{term()} in D(1, {term()})" for _ in range(draw(st.integers(1, 3)))]
    return parse("E " + " ".join(variables) + " : " + " & ".join(atoms))


def _random_binding(space, f, rnd):
    return {p: rnd.randrange(space.order) for p in f.parameters}


@settings(max_examples=100, deadline=None)
@given(grammar_spaces(budget=6), formulas(), st.randoms(use_true_random=False))
def test_evaluate_matches_brute_force(space, f, rnd):
    binding = _random_binding(space, f, rnd)
    expected, witness = oracle_pp(space, f, binding)
    v = evaluate(space, f, binding)
    assert v.holds == expected
    assert v.witness == witness


@settings(max_examples=40, deadline=None)
@given(grammar_spaces(budget=8), formulas(), st.randoms(use_true_random=False))
def test_truth_is_invariant_under_isomorphism(space, f, rnd):
    other = scramble(space, rnd)
    iso = is_isomorphic(space, other)
    binding = _random_binding(other, f, rnd)

    def image(b):
        # the group isomorphism G(other) -> G(space) on a bit vector
        a = 0
        for i, g in enumerate(other.generators):
            if b >> i & 1:
                a ^= iso.group_map[g]
        return a

    moved = {k: image(v) for k, v in binding.items()}
    assert evaluate(other, f, binding).holds == evaluate(space, f, moved).holds


@settings(max_examples=40, deadline=None)
@given(grammar_spaces(budget=8), formulas(), st.randoms(use_true_random=False))
def test_subspace_evaluation(space, f, rnd):
    binding = _random_binding(space, f, rnd)
    whole = evaluate_on_subspace(space, space.labels, f, binding)
    assert whole.holds == evaluate(space, f, binding).holds
    seed = rnd.sample(space.labels, rnd.randint(1, space.size))
    sub = subspace_generated(space, seed)
    pushed = {k: push_element(space, sub, v) for k, v in binding.items()}
    expected, _ = oracle_pp(sub.space, f, pushed)
    assert evaluate_on_subspace(space, seed, f, binding).holds == expected
    # generating from the whole subspace gives the same answer
    again = evaluate_on_subspace(space, sub.space.labels, f, binding)
    assert again.holds == expected


# -- counterexample search -----------------------------------------------------


def test_counterexample_examples(fan4):
    f = parse("E : -1 in D(1, a)")
    found = search_counterexample_subspace(fan4, f, {"a": "f1"}, max_points=1)
    # f1 is +1 on x0 only among the points where it restricts to 1
    assert found.seed == ("x0",) and found.subspace == ("x0",)
    assert found.to_json() == {"seed": ["x0"], "subspace": ["x0"]}
    assert search_counterexample_subspace(fan4, parse("E t : t in D(1, a)"), {"a": 1}, max_points=4) is None


def test_counterexample_is_genuine():
    rnd = random.Random(7)
    space = direct_sum([make_fan(3), one_point("y")])
    f = parse("E t : t in D(1, a) & -t in D(1, b)")
    for _ in range(20):
        binding = {"a": rnd.randrange(space.order), "b": rnd.randrange(space.order)}
        found = search_counterexample_subspace(space, f, binding, max_points=2)
        if found is None:
            continue
        assert not evaluate_on_subspace(space, found.seed, f, binding).holds


def test_counterexample_caps(fan4):
    f = parse("E : -1 in D(1, a)")
    with pytest.raises(InvalidSpace):
        search_counterexample_subspace(fan4, f, {"a": 1}, max_points=5)
    with pytest.raises(CapExceeded):
        search_counterexample_subspace(fan4, f, {"a": 1}, max_points=4, seed_cap=10)


# -- the size bound ----------------------------------------------------------


@pytest.mark.parametrize(
    "n, k, expected",
    [(1, 0, 1), (1, 1, 8), (1, 2, 2**34), (2, 1, 2**5), (2, 2, 4 * 2**512), (0, 1, 4), (3, 1, 2**9)],
)
def test_bound_values(n, k, expected):
    assert bound_B(n, k) == expected


@pytest.mark.parametrize("n", range(0, 6))
def test_bound_first_step(n):
    assert bound_B(n, 1) == 2 * 2 ** (2**n)


def test_bound_overflow():
    b = bound_B(2, 3)
    assert isinstance(b, BoundOverflow)
    assert b.log2 == 3 + 2**520
    assert b.tower == "2^(3 + 2^6*2^514)"
    assert b.to_json()["overflow"] is True
    deep = bound_B(3, 4)
    assert deep.log2 is None and deep.tower.count("2^(") >= 2


def _log2(b):
    return b.bit_length() - 1 if isinstance(b, int) else b.log2


@pytest.mark.parametrize("n", [1, 2])
def test_bound_increases_with_k(n):
    logs = [_log2(bound_B(n, k)) for k in range(4)]
    known = [x for x in logs if x is not None]
    assert known == sorted(known) and len(set(known)) == len(known)


def test_bound_rejects_negative():
    with pytest.raises(ValueError):
        bound_B(-1, 2)


# -- towers --------------------------------------------------------------------


def test_check_tower_true_at_base(tower2):
    sp = tower2.levels[0].space
    f = parse("E t : -t in D(1, a)")
    res = check_tower(tower2, f, {"a": sp.format_element(2)})
    assert res.holds and res.level == 0 and res.per_level == (True, True)
    assert res.to_json(tower2)["level"] == 0


def test_check_tower_false_everywhere(tower2):
    f = parse("E : -1 in D(1, a)")
    res = check_tower(tower2, f, {"a": 1})
    assert not res.holds and res.level is None and res.per_level == (False, False)


def test_check_tower_from_a_later_level(tower2):
    sp = tower2.levels[1].space
    res = check_tower(tower2, parse("E : -1 in D(1, a)"), {"a": sp.format_element(sp.minus_one)}, level=1)
    assert res.holds and res.level == 1
    with pytest.raises(InvalidSpace):
        check_tower(tower2, parse("E : -1 in D(1, a)"), {"a": 1}, level=2)


def test_check_tower_detects_broken_maps(tower2):
    gm = dict(tower2.group_maps)
    gm[(0, 1)] = tuple(0 for _ in gm[(0, 1)])
    broken = replace(tower2, group_maps=gm)
    sp = tower2.levels[0].space
    with pytest.raises(MonotonicityViolation):
        check_tower(broken, parse("E : -1 in D(1, a)"), {"a": sp.format_element(sp.minus_one)})


@settings(max_examples=20, deadline=None)
@given(formulas(), st.randoms(use_true_random=False))
def test_truth_persists_up_the_tower(f, rnd):
    t = build_tower([[parse_polynomial("x-1")], [parse_polynomial("x^2-2")]])
    base = t.levels[0].space
    binding = _random_binding(base, f, rnd)
    res = check_tower(t, f, binding)
    assert res.per_level == tuple(sorted(res.per_level))


def test_one_point_examples():
    pt = one_point()
    v = evaluate(pt, parse("E t1 : t1 in D(1, -1)"))
    assert v.holds and v.witness == {"t1": 0}
    assert not evaluate(pt, parse("E : -1 in D(1, 1)")).holds


@pytest.mark.parametrize("a1", ["f1", "f2", "-f1*f2"])
def test_fan_example_against_oracle(fan4, a1):
    f = parse("E t1 : a1 in D(1, t1) & -a1 in D(1, t1)")
    binding = {"a1": fan4.parse_element(a1)}
    expected, witness = oracle_pp(fan4, f, binding)
    v = evaluate(fan4, f, binding)
    assert (v.holds, v.witness) == (expected, witness)
    # a1 and -a1 both below t1 forces t1 = -1
    assert v.holds and v.witness == {"t1": fan4.minus_one}
