"""Global sections of empirical theories and the contextuality decision.

A theory is noncontextual when every state's context tables arise as the
marginals of one exact distribution over full outcome assignments, with any
declared convex relations holding at that underlying level too.  This module
builds that condition as an exact linear system and decides it, returning
either the underlying distributions or a Farkas certificate.

The possibilistic variant asks the same question of supports: every supported
local section must extend to a full assignment that is supported everywhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from ctxcheck.linprog import (
    FarkasCertificate,
    Feasible,
    LinearConstraint,
    LinearSystem,
    solve_feasibility,
)
from ctxcheck.model import (
    Context,
    ConvexDeclaration,
    EmpiricalTheory,
    ModelError,
    ONE,
    RationalDistribution,
    SystemType,
    ZERO,
    component_outcome_map,
)


class SignallingError(ModelError):
    """Raised when an operation requires marginal-consistent tables."""


def context_outcome_tuples(system: SystemType, context: Context):
    """All outcome tuples over ``context``, lexicographic (first label slowest)."""
    return itertools.product(*(system.outcomes_of(m).labels for m in context))


def global_outcome_tuples(system: SystemType):
    """All outcome tuples over the full label set."""
    return context_outcome_tuples(system, system.labels)


def restrict_values(
    system: SystemType, values: tuple[str, ...], context: Context
) -> tuple[str, ...]:
    """Project a full outcome tuple onto a context (both in global order)."""
    return tuple(values[system.label_position(m)] for m in context)


def marginal_weights(
    dist: RationalDistribution, sub: tuple[str, ...]
) -> dict[tuple[str, ...], Fraction]:
    """Pushforward of a distribution along restriction to ``sub`` labels."""
    pos = [dist.domain.index(m) for m in sub]
    acc: dict[tuple[str, ...], Fraction] = {}
    for values, w in dist.items():
        key = tuple(values[i] for i in pos)
        acc[key] = acc.get(key, ZERO) + w
    return acc


def signalling_violations(theory: EmpiricalTheory) -> list[str]:
    """Context pairs whose tables disagree on shared labels, per state."""
    system = theory.system
    out: list[str] = []
    for name, state in theory.states.items():
        for ctx, other in itertools.combinations(system.cover, 2):
            shared = tuple(m for m in ctx if m in other)
            if not shared:
                continue
            a = marginal_weights(state.distribution(ctx), shared)
            b = marginal_weights(state.distribution(other), shared)
            if a != b:
                out.append(
                    f"state {name!r}: contexts {ctx} and {other} disagree on {shared}"
                )
    return out


def require_no_signalling(theory: EmpiricalTheory) -> None:
    violations = signalling_violations(theory)
    if violations:
        raise SignallingError("; ".join(violations))


def variable_name(state: str, values: tuple[str, ...]) -> str:
    return f"d[{state};{','.join(values)}]"


def global_section_system(
    theory: EmpiricalTheory,
    state_names: tuple[str, ...] | None = None,
    include_declarations: bool = True,
) -> LinearSystem:
    """The exact linear system whose nonnegative solutions are global sections.

    One variable per (state, full outcome assignment).  Rows: normalization
    per state, every context marginal per state, and one row per declared
    convex relation (state mixtures bind assignment-wise; measurement
    mixtures bind the aggregated per-label statistics of the underlying
    distribution, using the declared outcome identifications).
    """
    system = theory.system
    if state_names is None:
        state_names = tuple(theory.states)
    for s in state_names:
        theory.state(s)
    assignments = list(global_outcome_tuples(system))
    variables = tuple(
        variable_name(s, g) for s in state_names for g in assignments
    )
    constraints: list[LinearConstraint] = []
    for s in state_names:
        constraints.append(
            LinearConstraint(
                name=f"norm[{s}]",
                coeffs={variable_name(s, g): ONE for g in assignments},
                rhs=ONE,
            )
        )
        state = theory.state(s)
        for ctx in system.cover:
            groups: dict[tuple[str, ...], list[str]] = {}
            for g in assignments:
                groups.setdefault(restrict_values(system, g, ctx), []).append(
                    variable_name(s, g)
                )
            dist = state.distribution(ctx)
            for t in context_outcome_tuples(system, ctx):
                constraints.append(
                    LinearConstraint(
                        name=f"marg[{s};{','.join(ctx)};{','.join(t)}]",
                        coeffs={v: ONE for v in groups.get(tuple(t), ())},
                        rhs=dist.weight(tuple(t)),
                    )
                )
    if include_declarations:
        included = set(state_names)
        for index, decl in enumerate(theory.convex):
            constraints.extend(
                _declaration_rows(
                    theory, decl, index, state_names, included, assignments
                )
            )
    return LinearSystem(variables=variables, constraints=tuple(constraints))


def _declaration_rows(
    theory: EmpiricalTheory,
    decl: ConvexDeclaration,
    index: int,
    state_names: tuple[str, ...],
    included: set[str],
    assignments: list[tuple[str, ...]],
) -> list[LinearConstraint]:
    system = theory.system
    rows: list[LinearConstraint] = []
    if decl.kind == "state":
        needed = {decl.target, *(c.name for c in decl.components)}
        if not needed <= included:
            raise ModelError(
                f"state mixture {decl.target!r} references states outside the system"
            )
        for g in assignments:
            coeffs = {variable_name(decl.target, g): ONE}
            for c in decl.components:
                v = variable_name(c.name, g)
                coeffs[v] = coeffs.get(v, ZERO) - c.coefficient
            rows.append(
                LinearConstraint(
                    name=f"mix:state[{decl.target}#{index};{','.join(g)}]",
                    coeffs={k: v for k, v in coeffs.items() if v != 0},
                    rhs=ZERO,
                )
            )
    else:
        target_pos = system.label_position(decl.target)
        inverse_maps = []
        for c in decl.components:
            bij = component_outcome_map(system, decl, c)
            inverse_maps.append(
                (c, {target: comp for comp, target in bij.items()})
            )
        for s in state_names:
            for k in system.outcomes_of(decl.target).labels:
                coeffs: dict[str, Fraction] = {}
                for g in assignments:
                    if g[target_pos] == k:
                        v = variable_name(s, g)
                        coeffs[v] = coeffs.get(v, ZERO) + ONE
                for c, inv in inverse_maps:
                    comp_pos = system.label_position(c.name)
                    want = inv[k]
                    for g in assignments:
                        if g[comp_pos] == want:
                            v = variable_name(s, g)
                            coeffs[v] = coeffs.get(v, ZERO) - c.coefficient
                rows.append(
                    LinearConstraint(
                        name=f"mix:meas[{decl.target}#{index};{k};{s}]",
                        coeffs={k2: v for k2, v in coeffs.items() if v != 0},
                        rhs=ZERO,
                    )
                )
    return rows


@dataclass
class ContextualityVerdict:
    """Outcome of a contextuality decision, with its supporting evidence.

    Probabilistic mode fills ``sections`` (one exact full-assignment
    distribution per state) or ``certificate``/``margin``.  Possibilistic
    mode fills ``boolean_sections`` (the supported-everywhere assignments
    per state) and ``blocked`` (supported local sections none of them hits).
    """

    contextual: bool
    mode: str
    variable_count: int = 0
    constraint_count: int = 0
    sections: dict[str, RationalDistribution] | None = None
    certificate: FarkasCertificate | None = None
    margin: Fraction | None = None
    system: LinearSystem | None = None
    boolean_sections: dict[str, tuple[tuple[str, ...], ...]] | None = None
    blocked: tuple[tuple[str, Context, tuple[str, ...]], ...] = ()


def check_contextuality(
    theory: EmpiricalTheory, mode: str = "probabilistic"
) -> ContextualityVerdict:
    """Decide whether the theory is contextual.

    Probabilistic mode is the exact feasibility question (declarations
    included); possibilistic mode asks whether every supported local section
    extends to a fully supported assignment, per state.
    """
    require_no_signalling(theory)
    if mode == "probabilistic":
        return _check_probabilistic(theory)
    if mode == "possibilistic":
        return _check_possibilistic(theory)
    raise ModelError(f"unknown mode {mode!r}")


def _check_probabilistic(theory: EmpiricalTheory) -> ContextualityVerdict:
    lp = global_section_system(theory)
    result = solve_feasibility(lp)
    if isinstance(result, Feasible):
        sections = extract_sections(theory, result.point)
        return ContextualityVerdict(
            contextual=False,
            mode="probabilistic",
            variable_count=len(lp.variables),
            constraint_count=len(lp.constraints),
            sections=sections,
            system=lp,
        )
    return ContextualityVerdict(
        contextual=True,
        mode="probabilistic",
        variable_count=len(lp.variables),
        constraint_count=len(lp.constraints),
        certificate=result.certificate,
        margin=result.margin,
        system=lp,
    )


def extract_sections(
    theory: EmpiricalTheory, point: dict[str, Fraction]
) -> dict[str, RationalDistribution]:
    """Per-state full-assignment distributions from a solved LP point."""
    system = theory.system
    sections: dict[str, RationalDistribution] = {}
    for s in theory.states:
        weights = {
            g: point[variable_name(s, g)]
            for g in global_outcome_tuples(system)
            if point.get(variable_name(s, g), ZERO) != 0
        }
        sections[s] = RationalDistribution(domain=system.labels, weights=weights)
    return sections


def verify_global_section(
    theory: EmpiricalTheory, sections: dict[str, RationalDistribution]
) -> list[str]:
    """Exact re-check that ``sections`` marginalize to every table and
    satisfy every declaration; returns violations (empty = verified)."""
    system = theory.system
    out: list[str] = []
    for name, state in theory.states.items():
        if name not in sections:
            out.append(f"missing section for state {name!r}")
            continue
        dist = sections[name]
        if dist.domain != system.labels:
            out.append(f"section for {name!r} has wrong domain {dist.domain}")
            continue
        for ctx in system.cover:
            acc: dict[tuple[str, ...], Fraction] = {}
            for g, w in dist.items():
                key = restrict_values(system, g, ctx)
                acc[key] = acc.get(key, ZERO) + w
            table = state.distribution(ctx)
            for t in context_outcome_tuples(system, ctx):
                if acc.get(tuple(t), ZERO) != table.weight(tuple(t)):
                    out.append(
                        f"state {name!r}: marginal at {ctx} differs at {t}"
                    )
                    break
    for decl in theory.convex:
        if decl.kind == "state":
            if decl.target not in sections or any(
                c.name not in sections for c in decl.components
            ):
                out.append(f"state mixture {decl.target!r}: section missing")
                continue
            target = sections[decl.target]
            for g in global_outcome_tuples(system):
                want = sum(
                    (
                        c.coefficient * sections[c.name].weight(g)
                        for c in decl.components
                    ),
                    start=ZERO,
                )
                if target.weight(g) != want:
                    out.append(
                        f"state mixture {decl.target!r} violated at {g}"
                    )
                    break
        else:
            target_pos = system.label_position(decl.target)
            for name, dist in sections.items():
                for k in system.outcomes_of(decl.target).labels:
                    lhs = sum(
                        (w for g, w in dist.items() if g[target_pos] == k),
                        start=ZERO,
                    )
                    rhs = ZERO
                    for c in decl.components:
                        bij = component_outcome_map(system, decl, c)
                        inv = {t: o for o, t in bij.items()}
                        pos = system.label_position(c.name)
                        rhs += c.coefficient * sum(
                            (w for g, w in dist.items() if g[pos] == inv[k]),
                            start=ZERO,
                        )
                    if lhs != rhs:
                        out.append(
                            f"measurement mixture {decl.target!r} violated for "
                            f"state {name!r} at outcome {k!r}"
                        )
    return out


def _check_possibilistic(theory: EmpiricalTheory) -> ContextualityVerdict:
    system = theory.system
    boolean: dict[str, tuple[tuple[str, ...], ...]] = {}
    blocked: list[tuple[str, Context, tuple[str, ...]]] = []
    for name, state in theory.states.items():
        supports = {
            ctx: set(state.distribution(ctx).weights) for ctx in system.cover
        }
        kept = [
            g
            for g in global_outcome_tuples(system)
            if all(
                restrict_values(system, g, ctx) in supports[ctx]
                for ctx in system.cover
            )
        ]
        boolean[name] = tuple(kept)
        reached = {
            ctx: {restrict_values(system, g, ctx) for g in kept}
            for ctx in system.cover
        }
        for ctx in system.cover:
            for t in sorted(supports[ctx]):
                if t not in reached[ctx]:
                    blocked.append((name, ctx, t))
    return ContextualityVerdict(
        contextual=bool(blocked),
        mode="possibilistic",
        variable_count=sum(len(v) for v in boolean.values()),
        boolean_sections=boolean,
        blocked=tuple(blocked),
    )


def find_global_section(
    theory: EmpiricalTheory,
) -> dict[str, RationalDistribution] | None:
    """The per-state global-section distributions, or None if contextual."""
    verdict = check_contextuality(theory, mode="probabilistic")
    return verdict.sections
