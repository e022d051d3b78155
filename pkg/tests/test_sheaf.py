"""Global-section feasibility: marginals, signalling, both decision modes."""

from fractions import Fraction

import pytest

from ctxcheck.linprog import verify_certificate
from ctxcheck.model import (
    EmpiricalTheory,
    RationalDistribution,
    State,
    system_type,
)
from ctxcheck.quantum import builtin_example, without_declarations
from ctxcheck.sheaf import (
    SignallingError,
    check_contextuality,
    find_global_section,
    global_section_system,
    marginal_weights,
    require_no_signalling,
    signalling_violations,
    verify_global_section,
)

H = Fraction(1, 2)


def _pair_state(name, cover, tables):
    return State(
        name=name,
        table={
            ctx: RationalDistribution(domain=ctx, weights=tables[ctx])
            for ctx in cover
        },
    )


def _triangle(anti=True):
    """Three binary labels, pairwise contexts, one perfectly (anti)correlated state."""
    cover = (("a", "b"), ("a", "c"), ("b", "c"))
    system = system_type({m: ("0", "1") for m in "abc"}, cover)
    pair = (
        {("0", "1"): H, ("1", "0"): H}
        if anti
        else {("0", "0"): H, ("1", "1"): H}
    )
    tables = {ctx: dict(pair) for ctx in cover}
    return EmpiricalTheory(
        system=system, states={"s": _pair_state("s", cover, tables)}
    )


def test_marginal_weights():
    dist = RationalDistribution(
        domain=("a", "b"),
        weights={("0", "1"): H, ("1", "0"): H},
    )
    assert marginal_weights(dist, ("a",)) == {("0",): H, ("1",): H}
    assert marginal_weights(dist, ("b", "a")) == {
        ("1", "0"): H,
        ("0", "1"): H,
    }


def test_signalling_detection():
    cover = (("a", "b"), ("a", "c"))
    system = system_type({m: ("0", "1") for m in "abc"}, cover)
    tables = {
        ("a", "b"): {("0", "0"): Fraction(1)},
        ("a", "c"): {("1", "0"): Fraction(1)},  # a-marginal disagrees
    }
    theory = EmpiricalTheory(
        system=system, states={"s": _pair_state("s", cover, tables)}
    )
    assert signalling_violations(theory)
    with pytest.raises(SignallingError):
        require_no_signalling(theory)
    with pytest.raises(SignallingError):
        check_contextuality(theory)


def test_anticorrelated_triangle_contextual_both_modes():
    theory = _triangle(anti=True)
    prob = check_contextuality(theory, mode="probabilistic")
    assert prob.contextual
    assert verify_certificate(prob.system, prob.certificate)
    poss = check_contextuality(theory, mode="possibilistic")
    assert poss.contextual
    assert poss.blocked


def test_correlated_triangle_feasible_both_modes():
    theory = _triangle(anti=False)
    prob = check_contextuality(theory, mode="probabilistic")
    assert not prob.contextual
    assert verify_global_section(theory, prob.sections) == []
    poss = check_contextuality(theory, mode="possibilistic")
    assert not poss.contextual
    # the two fully supported assignments: constant 0 and constant 1
    assert poss.boolean_sections["s"] == (("0", "0", "0"), ("1", "1", "1"))


def test_find_global_section_none_when_contextual():
    assert find_global_section(_triangle(anti=True)) is None
    sections = find_global_section(_triangle(anti=False))
    assert sections is not None
    assert verify_global_section(_triangle(anti=False), sections) == []


def test_verify_global_section_rejects_wrong_marginals():
    theory = _triangle(anti=False)
    wrong = {
        "s": RationalDistribution(
            domain=("a", "b", "c"),
            weights={("0", "0", "1"): Fraction(1)},
        )
    }
    assert verify_global_section(theory, wrong)
    assert verify_global_section(theory, {}) == [
        "missing section for state 's'"
    ]


def test_declarations_enter_the_system():
    example = builtin_example("spekkens-preparation")
    with_rows = global_section_system(example.theory)
    without_rows = global_section_system(without_declarations(example.theory))
    assert len(with_rows.constraints) > len(without_rows.constraints)
    names = {c.name for c in with_rows.constraints}
    assert any(name.startswith("mix:state[") for name in names)


def test_measurement_declarations_enter_the_system():
    example = builtin_example("spekkens-unsharp")
    lp = global_section_system(example.theory)
    names = {c.name for c in lp.constraints}
    assert any(name.startswith("mix:meas[") for name in names)


def test_variable_count_matches_assignment_space():
    bell = builtin_example("bell").theory
    lp = global_section_system(bell)
    # one state, four binary labels
    assert len(lp.variables) == 16
    mermin = builtin_example("mermin").theory
    assert len(global_section_system(mermin).variables) == 64
