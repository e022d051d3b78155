"""Random-instance generators: determinism, feasibility by construction,
frustration, duplication, and factorizable representation sampling."""

import random
from fractions import Fraction

from ctxcheck import (
    analyze_representation,
    check_contextuality,
    duplicated_label_theory,
    minimalize,
    parity_bump,
    random_factorizable_representation,
    random_feasible_theory,
    random_frustrated_cycle,
    random_instance,
    random_sections,
    random_system,
    require_no_signalling,
    theory_from_sections,
    validate_representation,
    validate_theory,
    verify_global_section,
)


def test_generators_are_seed_deterministic():
    a = random_instance(random.Random(7))
    b = random_instance(random.Random(7))
    assert a.system.labels == b.system.labels
    assert a.system.cover == b.system.cover
    for name in a.states:
        for ctx in a.system.cover:
            assert a.states[name].table[ctx].weights == b.states[name].table[ctx].weights


def test_random_systems_validate():
    for seed in range(30):
        system = random_system(random.Random(seed))
        assert 2 <= len(system.labels) <= 5
        for ctx in system.cover:
            assert ctx == system.sort_context(ctx)


def test_sections_are_positive_and_reproduce_marginals():
    rng = random.Random(3)
    system = random_system(rng)
    sections = random_sections(rng, system, ("p", "q"))
    for dist in sections.values():
        assert all(w > 0 for w in dist.weights.values())
        assert sum(dist.weights.values()) == 1
    theory = theory_from_sections(system, sections)
    assert validate_theory(theory) == []
    # the sections must certify feasibility exactly
    assert verify_global_section(theory, sections) == []


def test_feasible_theories_come_with_witness_sections():
    for seed in range(20):
        theory, sections = random_feasible_theory(random.Random(seed))
        assert verify_global_section(theory, sections) == []
        require_no_signalling(theory)
        verdict = check_contextuality(theory)
        assert not verdict.contextual


def test_parity_bump_keeps_no_signalling():
    bumps = 0
    for seed in range(40):
        rng = random.Random(seed)
        theory, _ = random_feasible_theory(rng)
        bumped = parity_bump(rng, theory)
        if bumped is None:
            continue
        bumps += 1
        assert validate_theory(bumped) == []
        require_no_signalling(bumped)
    assert bumps > 0


def test_frustrated_cycles_are_contextual_when_noise_free():
    found_clean = False
    for seed in range(60):
        theory = random_frustrated_cycle(random.Random(seed))
        assert validate_theory(theory) == []
        require_no_signalling(theory)
        halves = {Fraction(1, 2), Fraction(0), Fraction(1)}
        weights = {
            w
            for state in theory.states.values()
            for ctx in theory.system.cover
            for w in state.table[ctx].weights.values()
        }
        if weights <= halves:
            # zero-noise draw: pure odd frustration, necessarily contextual
            found_clean = True
            assert check_contextuality(theory).contextual
    assert found_clean


def test_random_instances_mix_verdicts():
    verdicts = [
        check_contextuality(random_instance(random.Random(2000 + i))).contextual
        for i in range(40)
    ]
    assert any(verdicts) and not all(verdicts)


def test_duplicated_label_collapses_under_minimalization():
    rng = random.Random(11)
    theory, _ = random_feasible_theory(rng)
    doubled = duplicated_label_theory(rng, theory)
    assert validate_theory(doubled) == []
    assert len(doubled.system.labels) == len(theory.system.labels) + 1
    minimal, mapping = minimalize(doubled)
    # the twin label is statistically identical and never co-occurs with its
    # original, so the quotient stage must merge it away
    assert not mapping.quotient_map.is_identity()
    assert len(minimal.system.labels) < len(mapping.split_theory.system.labels)


def test_random_factorizable_representations_analyze_clean():
    for seed in range(15):
        rep = random_factorizable_representation(random.Random(seed))
        assert validate_representation(rep) == []
        report = analyze_representation(rep)
        assert report.realizes
        assert report.factorizable
        assert report.outcome_deterministic
        assert report.noncontextual()
