"""Exact feasibility solver: hand-worked systems and randomized soundness."""

import random
from fractions import Fraction

import pytest

from ctxcheck.linprog import (
    FarkasCertificate,
    Feasible,
    Infeasible,
    LinearConstraint,
    LinearSystem,
    LinearSystemError,
    certificate_margin,
    is_robust,
    solve_feasibility,
    verify_certificate,
    verify_point,
)


def _system(rows, variables):
    return LinearSystem(
        variables=tuple(variables),
        constraints=tuple(
            LinearConstraint(
                name=name,
                coeffs={v: Fraction(a) for v, a in coeffs.items()},
                rhs=Fraction(rhs),
            )
            for name, coeffs, rhs in rows
        ),
    )


def test_simple_feasible_system():
    system = _system(
        [("sum", {"x": 1, "y": 1}, 1), ("half", {"x": 1}, "1/3")],
        ["x", "y"],
    )
    result = solve_feasibility(system)
    assert isinstance(result, Feasible)
    assert result.point["x"] == Fraction(1, 3)
    assert result.point["y"] == Fraction(2, 3)
    assert verify_point(system, result.point)


def test_contradictory_rows_yield_verified_certificate():
    system = _system(
        [("one", {"x": 1, "y": 1}, 1), ("two", {"x": 1, "y": 1}, 2)],
        ["x", "y"],
    )
    result = solve_feasibility(system)
    assert isinstance(result, Infeasible)
    assert verify_certificate(system, result.certificate)
    # multipliers (1, -1) on the two rows give combined rhs -1, margin 1
    assert result.margin == 1
    assert certificate_margin(system, result.certificate) == result.margin


def test_negative_rhs_with_nonnegative_row_is_infeasible():
    system = _system([("neg", {"x": 2, "y": 3}, -1)], ["x", "y"])
    result = solve_feasibility(system)
    assert isinstance(result, Infeasible)
    assert verify_certificate(system, result.certificate)
    # single multiplier 1 on the row itself; margin is the |rhs|
    assert result.margin == 1


def test_verify_certificate_rejects_wrong_multipliers():
    system = _system(
        [("one", {"x": 1, "y": 1}, 1), ("two", {"x": 1, "y": 1}, 2)],
        ["x", "y"],
    )
    assert not verify_certificate(system, FarkasCertificate(multipliers={}))
    assert not verify_certificate(
        system, FarkasCertificate(multipliers={"one": Fraction(1)})
    )
    assert not verify_certificate(
        system, FarkasCertificate(multipliers={"ghost": Fraction(1)})
    )
    # the honest direction
    assert verify_certificate(
        system,
        FarkasCertificate(
            multipliers={"one": Fraction(1), "two": Fraction(-1)}
        ),
    )


def test_verify_point_checks_negativity_and_rows():
    system = _system([("sum", {"x": 1, "y": 1}, 1)], ["x", "y"])
    assert verify_point(system, {"x": Fraction(1), "y": Fraction(0)})
    assert not verify_point(system, {"x": Fraction(2), "y": Fraction(-1)})
    assert not verify_point(system, {"x": Fraction(1, 2), "y": Fraction(1, 4)})


def test_duplicate_names_rejected():
    with pytest.raises(LinearSystemError):
        _system([("r", {"x": 1}, 1), ("r", {"x": 1}, 1)], ["x"])
    with pytest.raises(LinearSystemError):
        LinearSystem(variables=("x", "x"), constraints=())


def test_unknown_variable_rejected():
    with pytest.raises(LinearSystemError):
        _system([("r", {"ghost": 1}, 1)], ["x"])


def test_is_robust_strict_inequality():
    assert is_robust(Fraction(1, 8), 4, Fraction(1, 64))
    assert not is_robust(Fraction(1, 8), 8, Fraction(1, 64))
    assert is_robust(Fraction(1, 1000), 10, Fraction(0))


def _random_feasible_system(rng):
    n_vars = rng.randint(2, 6)
    variables = [f"v{i}" for i in range(n_vars)]
    point = {v: Fraction(rng.randint(0, 6), rng.randint(1, 4)) for v in variables}
    rows = []
    for r in range(rng.randint(1, 5)):
        coeffs = {
            v: Fraction(rng.randint(-4, 4))
            for v in rng.sample(variables, rng.randint(1, n_vars))
        }
        coeffs = {v: a for v, a in coeffs.items() if a}
        if not coeffs:
            continue
        rhs = sum(a * point[v] for v, a in coeffs.items())
        rows.append((f"r{r}", coeffs, rhs))
    return _system(rows, variables), point


def test_random_systems_with_known_point_are_feasible():
    rng = random.Random(11)
    for _ in range(150):
        system, _ = _random_feasible_system(rng)
        result = solve_feasibility(system)
        assert isinstance(result, Feasible)
        assert verify_point(system, result.point)


def test_random_systems_with_planted_contradiction_are_infeasible():
    rng = random.Random(13)
    for _ in range(150):
        system, point = _random_feasible_system(rng)
        if not system.constraints:
            continue
        row = rng.choice(system.constraints)
        clash = LinearConstraint(
            name="clash", coeffs=dict(row.coeffs), rhs=row.rhs + Fraction(1, 3)
        )
        bad = LinearSystem(
            variables=system.variables,
            constraints=system.constraints + (clash,),
        )
        result = solve_feasibility(bad)
        assert isinstance(result, Infeasible)
        assert verify_certificate(bad, result.certificate)
        assert result.margin > 0
        assert certificate_margin(bad, result.certificate) == result.margin


def test_margin_normalization_max_multiplier_is_one():
    system = _system(
        [("one", {"x": 1, "y": 1}, 1), ("two", {"x": 2, "y": 2}, 5)],
        ["x", "y"],
    )
    result = solve_feasibility(system)
    assert isinstance(result, Infeasible)
    scale = max(abs(y) for y in result.certificate.multipliers.values())
    assert scale == 1
    # rows scaled (1, -1/2): combined rhs 1 - 5/2 = -3/2
    assert result.margin == Fraction(3, 2)
