"""Ontological representations: validation, analysis flags, canonical form."""

import random
from fractions import Fraction

import pytest

from ctxcheck.bridge import to_operational
from ctxcheck.generate import (
    random_factorizable_representation,
    random_feasible_theory,
)
from ctxcheck.model import (
    ConvexComponent,
    ConvexDeclaration,
    EmpiricalTheory,
    RationalDistribution,
    State,
    system_type,
)
from ctxcheck.ontology import (
    OntologicalRepresentation,
    RepresentationError,
    analyze_representation,
    canonical_representation,
    check_sharpness_forces_determinism,
    induced_theory,
    realized_weight,
    sharpness_report,
    trivial_representation,
    validate_representation,
    verify_realization,
)
from ctxcheck.quantum import builtin_example, without_declarations
from ctxcheck.sheaf import check_contextuality, find_global_section, verify_global_section

H = Fraction(1, 2)


def _specker_one_point():
    theory = builtin_example("specker-triangle").theory
    return trivial_representation(to_operational(theory))


def test_trivial_representation_realizes_the_triangle():
    rep = _specker_one_point()
    assert rep.ontic == ("[coin]",)
    assert validate_representation(rep) == []
    ok, witness = verify_realization(rep)
    assert ok and witness is None
    assert realized_weight(rep, "coin", "a,b", "0,1") == H
    assert realized_weight(rep, "coin", "a,b", "0,0") == 0


def test_one_point_representation_flag_profile():
    report = analyze_representation(_specker_one_point())
    assert report.realizes
    assert report.preparation_nc
    assert report.measurement_nc
    assert not report.outcome_deterministic
    assert not report.factorizable
    assert report.parameter_independent
    assert "factorizable" in report.counterexamples
    assert "outcome_deterministic" in report.counterexamples


def test_validate_representation_catches_misalignment():
    rep = _specker_one_point()
    broken = OntologicalRepresentation(
        ontic=rep.ontic,
        mu={p: {"ghost": Fraction(1)} for p in rep.mu},
        xi=rep.xi,
        target=rep.target,
    )
    assert validate_representation(broken)
    unnormalized = OntologicalRepresentation(
        ontic=rep.ontic,
        mu={p: {rep.ontic[0]: H} for p in rep.mu},
        xi=rep.xi,
        target=rep.target,
    )
    assert validate_representation(unnormalized)


def test_verify_realization_reports_first_mismatch():
    rep = _specker_one_point()
    rep.target.statistics[("coin", "a")] = {"0": Fraction(1)}
    ok, witness = verify_realization(rep)
    assert not ok
    assert witness == ("coin", "a", "0")


def test_canonical_representation_flags_on_random_theories():
    rng = random.Random(17)
    for _ in range(20):
        theory, sections = random_feasible_theory(rng)
        rep = canonical_representation(theory, sections)
        report = analyze_representation(rep)
        assert report.realizes
        assert report.preparation_nc
        assert report.measurement_nc
        assert report.factorizable
        assert report.parameter_independent


def test_canonical_representation_rejects_contextual_input():
    theory = builtin_example("specker-triangle").theory
    bogus = {
        "coin": RationalDistribution(
            domain=theory.system.labels,
            weights={("0", "1", "0"): Fraction(1)},
        )
    }
    with pytest.raises(RepresentationError):
        canonical_representation(theory, bogus)


def test_induced_theory_round_trip():
    rng = random.Random(19)
    for _ in range(20):
        rep = random_factorizable_representation(rng)
        theory, sections = induced_theory(rep)
        assert verify_global_section(theory, sections) == []
        verdict = check_contextuality(theory)
        assert not verdict.contextual


def test_induced_theory_requires_factorizability():
    rep = _specker_one_point()  # not factorizable
    with pytest.raises(RepresentationError):
        induced_theory(rep)


def _predictable_theory():
    """One binary label; two pure states and a declared half/half mixture."""
    system = system_type({"m": ("0", "1")}, [("m",)])

    def point(name, value):
        other = "1" if value == "0" else "0"
        return State(
            name=name,
            table={
                ("m",): RationalDistribution(
                    domain=("m",),
                    weights={(value,): Fraction(1), (other,): Fraction(0)},
                )
            },
        )

    mix = State(
        name="mix",
        table={
            ("m",): RationalDistribution(
                domain=("m",), weights={("0",): H, ("1",): H}
            )
        },
    )
    convex = (
        ConvexDeclaration(
            kind="state",
            target="mix",
            components=(
                ConvexComponent(coefficient=H, name="p0"),
                ConvexComponent(coefficient=H, name="p1"),
            ),
        ),
    )
    return EmpiricalTheory(
        system=system,
        states={"p0": point("p0", "0"), "p1": point("p1", "1"), "mix": mix},
        convex=convex,
    )


def test_sharpness_report_finds_certainty_witnesses():
    theory = _predictable_theory()
    op = to_operational(theory)
    report = sharpness_report(op)
    assert report.perfectly_predictable == {"m": {"0": "p0", "1": "p1"}}
    assert report.maximally_mixed == ("mix",)


def test_check_sharpness_forces_determinism_on_canonical_representation():
    theory = _predictable_theory()
    sections = find_global_section(theory)
    rep = canonical_representation(theory, sections)
    report = sharpness_report(rep.target, convex=theory.convex)
    ok, witness = check_sharpness_forces_determinism(rep, report)
    assert ok and witness is None


def test_check_sharpness_forces_determinism_requires_preconditions():
    rep = _specker_one_point()
    report = sharpness_report(rep.target)
    # the triangle has no perfectly predictable measurement and no mixture
    with pytest.raises(RepresentationError):
        check_sharpness_forces_determinism(rep, report)


def test_noncontextual_builtins_admit_canonical_representations():
    for name in ("spekkens-preparation", "spekkens-unsharp"):
        theory = without_declarations(builtin_example(name).theory)
        sections = find_global_section(theory)
        rep = canonical_representation(theory, sections)
        report = analyze_representation(rep)
        assert report.realizes
        assert report.preparation_nc
        assert report.factorizable
        assert report.parameter_independent
        if name == "spekkens-preparation":
            assert report.measurement_nc
            assert report.noncontextual()


def test_canonical_measurement_nc_fails_on_degenerate_equivalences():
    """The stripped unsharp scenario keeps a pair of complementary events
    with identical weight for every preparation (the uniform anti-correlated
    joint context), so delta responses cannot respect their equivalence.
    Generic theories have no such collision."""
    theory = without_declarations(builtin_example("spekkens-unsharp").theory)
    sections = find_global_section(theory)
    report = analyze_representation(canonical_representation(theory, sections))
    assert not report.measurement_nc
    pair_a, pair_b, _ = report.counterexamples["measurement_nc"]
    assert {pair_a[0], pair_b[0]} <= {"Pabc", "PABC", "Pabc,PABC"}
