"""Core data model: measurement scenarios, exact-rational tables, theories.

All probability data is held as ``fractions.Fraction`` (arbitrary precision,
always in lowest terms with positive denominator).  Floating point is
confined to the quantum front end in ``ctxcheck.quantum``.

Instances are treated as immutable after construction; validation that
reports problems as *data* (rather than raising) lives in
``validate_system_type`` and ``validate_theory``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class ModelError(ValueError):
    """Structural misuse of the data model (unknown label, bad arity, ...)."""


class InvalidSystemError(ModelError):
    """Raised when an operation requires a valid system type but got violations."""

    def __init__(self, violations: list[str]):
        super().__init__("invalid system type: " + "; ".join(violations))
        self.violations = violations


def parse_rational(text: str | int) -> Fraction:
    """Parse ``"3/8"``, ``"1"`` or an int into an exact ``Fraction``."""
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ModelError(f"rational must be a 'p/q' string or int, got {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ModelError(f"cannot parse rational {text!r}: {exc}") from exc


def format_rational(value: Fraction) -> str:
    """Render a Fraction as ``"p/q"`` (or ``"p"`` for integers)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class OutcomeSet:
    """Finite, nonempty, ordered set of distinct outcome labels."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.labels:
            raise ModelError("outcome set must be nonempty")
        if len(set(self.labels)) != len(self.labels):
            raise ModelError(f"duplicate outcome labels in {self.labels}")
        if not all(isinstance(o, str) and o for o in self.labels):
            raise ModelError("outcome labels must be nonempty strings")

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, item: object) -> bool:
        return item in self.labels

    def index(self, outcome: str) -> int:
        return self.labels.index(outcome)


Context = tuple[str, ...]


@dataclass(frozen=True)
class SystemType:
    """A measurement scenario: labels, their outcome sets, and a cover.

    ``labels`` fixes a global order used everywhere for determinism.
    Contexts are stored as tuples of labels in that global order.
    """

    labels: tuple[str, ...]
    outcomes: tuple[OutcomeSet, ...]
    cover: tuple[Context, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.outcomes):
            raise ModelError("labels and outcome sets must align")
        if len(set(self.labels)) != len(self.labels):
            raise ModelError("duplicate measurement labels")
        object.__setattr__(
            self, "_index", {m: i for i, m in enumerate(self.labels)}
        )

    def outcomes_of(self, label: str) -> OutcomeSet:
        try:
            return self.outcomes[self._index[label]]  # type: ignore[attr-defined]
        except KeyError:
            raise ModelError(f"unknown measurement label {label!r}") from None

    def label_position(self, label: str) -> int:
        try:
            return self._index[label]  # type: ignore[attr-defined]
        except KeyError:
            raise ModelError(f"unknown measurement label {label!r}") from None

    def sort_context(self, labels: Iterable[str]) -> Context:
        """Return the labels as a context tuple in global label order."""
        seen = set()
        for m in labels:
            if m in seen:
                raise ModelError(f"label {m!r} repeated in context")
            seen.add(m)
        return tuple(sorted(seen, key=self.label_position))


def system_type(
    outcomes: Mapping[str, Iterable[str]], cover: Iterable[Iterable[str]]
) -> SystemType:
    """Convenience constructor from a label->outcomes mapping and a cover."""
    labels = tuple(outcomes)
    outs = tuple(OutcomeSet(tuple(outcomes[m])) for m in labels)
    order = {m: i for i, m in enumerate(labels)}
    ctxs = tuple(
        tuple(sorted(set(ctx), key=lambda m: order.get(m, len(order))))
        for ctx in cover
    )
    return SystemType(labels=labels, outcomes=outs, cover=ctxs)


def validate_system_type(system: SystemType) -> list[str]:
    """Check the scenario structure; returns a list of violations (empty = valid)."""
    violations: list[str] = []
    label_set = set(system.labels)
    for ctx in system.cover:
        if not ctx:
            violations.append("empty context in cover")
        for m in ctx:
            if m not in label_set:
                violations.append(f"context {ctx} uses unknown label {m!r}")
        if list(ctx) != sorted(set(ctx), key=lambda m: system.labels.index(m) if m in label_set else -1):
            violations.append(f"context {ctx} not in global label order")
    covered = {m for ctx in system.cover for m in ctx}
    for m in system.labels:
        if m not in covered:
            violations.append(f"label {m!r} not covered by any context")
    for i, ctx in enumerate(system.cover):
        for j, other in enumerate(system.cover):
            if i != j and set(ctx) <= set(other):
                if set(ctx) == set(other):
                    if i < j:
                        violations.append(f"duplicate context {ctx}")
                else:
                    violations.append(f"context {ctx} contained in {other} (cover must be an antichain)")
    return violations


def require_valid_system(system: SystemType) -> None:
    violations = validate_system_type(system)
    if violations:
        raise InvalidSystemError(violations)


@dataclass(frozen=True)
class Section:
    """An assignment of one outcome to each label of a domain."""

    domain: tuple[str, ...]
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.domain) != len(self.values):
            raise ModelError("section domain and values must align")

    def __call__(self, label: str) -> str:
        try:
            return self.values[self.domain.index(label)]
        except ValueError:
            raise ModelError(f"label {label!r} outside section domain {self.domain}") from None

    def restrict(self, sub: tuple[str, ...]) -> "Section":
        return Section(sub, tuple(self(m) for m in sub))

    def as_dict(self) -> dict[str, str]:
        return dict(zip(self.domain, self.values))


@dataclass
class RationalDistribution:
    """Exact finitely-supported probability distribution over sections.

    ``weights`` maps outcome tuples (aligned with ``domain``) to Fractions.
    Zero entries are dropped so equality is canonical.
    """

    domain: tuple[str, ...]
    weights: dict[tuple[str, ...], Fraction]

    def __post_init__(self) -> None:
        cleaned: dict[tuple[str, ...], Fraction] = {}
        total = ZERO
        for values, w in self.weights.items():
            if len(values) != len(self.domain):
                raise ModelError(
                    f"outcome tuple {values} does not match domain {self.domain}"
                )
            w = Fraction(w)
            if w < 0:
                raise ModelError(f"negative probability {w} at {values}")
            total += w
            if w != 0:
                cleaned[tuple(values)] = w
        if total != ONE:
            raise ModelError(f"distribution weights sum to {total}, expected 1")
        self.weights = cleaned

    def weight(self, values: tuple[str, ...]) -> Fraction:
        return self.weights.get(tuple(values), ZERO)

    def support(self) -> Iterator[tuple[str, ...]]:
        return iter(sorted(self.weights))

    def items(self) -> Iterator[tuple[tuple[str, ...], Fraction]]:
        return iter(sorted(self.weights.items()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalDistribution):
            return NotImplemented
        return self.domain == other.domain and self.weights == other.weights


@dataclass
class State:
    """An empirical state: one exact distribution table per cover context."""

    name: str
    table: dict[Context, RationalDistribution]

    def distribution(self, context: Context) -> RationalDistribution:
        try:
            return self.table[tuple(context)]
        except KeyError:
            raise ModelError(
                f"state {self.name!r} has no table for context {context}"
            ) from None


@dataclass(frozen=True)
class ConvexComponent:
    """One weighted component of a declared convex combination."""

    coefficient: Fraction
    name: str
    # measurement mixtures: component outcome -> target outcome bijection
    outcome_map: tuple[tuple[str, str], ...] | None = None

    def outcome_bijection(self) -> dict[str, str]:
        if self.outcome_map is None:
            raise ModelError(f"component {self.name!r} carries no outcome identification")
        return dict(self.outcome_map)


@dataclass(frozen=True)
class ConvexDeclaration:
    """A declared convex combination of states or of measurement labels.

    These are *declarations* supplied with a theory, not consequences of the
    tables: the global-section problem imposes them as exact linear
    constraints.
    """

    kind: str  # "state" or "measurement"
    target: str
    components: tuple[ConvexComponent, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("state", "measurement"):
            raise ModelError(f"unknown convex declaration kind {self.kind!r}")
        if not self.components:
            raise ModelError("convex declaration needs at least one component")
        total = sum((c.coefficient for c in self.components), start=ZERO)
        if total != ONE:
            raise ModelError(f"convex coefficients sum to {total}, expected 1")
        for c in self.components:
            if c.coefficient <= 0:
                raise ModelError(f"coefficient {c.coefficient} must be positive")
        names = [c.name for c in self.components]
        if len(set(names)) != len(names):
            raise ModelError("convex declaration components must be distinct")


@dataclass
class EmpiricalTheory:
    """A measurement scenario together with its states and declarations."""

    system: SystemType
    states: dict[str, State]
    convex: tuple[ConvexDeclaration, ...] = ()

    def state_names(self) -> tuple[str, ...]:
        return tuple(self.states)

    def state(self, name: str) -> State:
        try:
            return self.states[name]
        except KeyError:
            raise ModelError(f"unknown state {name!r}") from None


def validate_theory(theory: EmpiricalTheory) -> list[str]:
    """Structural validation of a theory; returns a list of violations."""
    violations = list(validate_system_type(theory.system))
    system = theory.system
    for name, state in theory.states.items():
        if name != state.name:
            violations.append(f"state stored under {name!r} is named {state.name!r}")
        for ctx in system.cover:
            if tuple(ctx) not in state.table:
                violations.append(f"state {name!r} missing table for context {ctx}")
        for ctx, dist in state.table.items():
            if tuple(ctx) not in system.cover:
                violations.append(f"state {name!r} has table for non-cover context {ctx}")
                continue
            if dist.domain != tuple(ctx):
                violations.append(
                    f"state {name!r}: table domain {dist.domain} != context {ctx}"
                )
                continue
            outcome_sets = [system.outcomes_of(m).labels for m in ctx]
            for values in dist.support():
                for v, allowed in zip(values, outcome_sets):
                    if v not in allowed:
                        violations.append(
                            f"state {name!r}: outcome {v!r} not allowed in context {ctx}"
                        )
    for decl in theory.convex:
        if decl.kind == "state":
            for c in decl.components:
                if c.name not in theory.states:
                    violations.append(f"state mixture references unknown state {c.name!r}")
            if decl.target not in theory.states:
                violations.append(f"state mixture targets unknown state {decl.target!r}")
        else:
            if decl.target not in system.labels:
                violations.append(
                    f"measurement mixture targets unknown label {decl.target!r}"
                )
                continue
            target_outs = set(system.outcomes_of(decl.target).labels)
            for c in decl.components:
                if c.name not in system.labels:
                    violations.append(
                        f"measurement mixture references unknown label {c.name!r}"
                    )
                    continue
                if c.outcome_map is None:
                    comp_outs = system.outcomes_of(c.name).labels
                    if set(comp_outs) != target_outs:
                        violations.append(
                            f"measurement mixture {decl.target!r}: component {c.name!r} "
                            "needs an explicit outcome identification"
                        )
                else:
                    bij = dict(c.outcome_map)
                    comp_outs = set(system.outcomes_of(c.name).labels)
                    if set(bij) != comp_outs or set(bij.values()) != target_outs or len(
                        set(bij.values())
                    ) != len(bij):
                        violations.append(
                            f"measurement mixture {decl.target!r}: outcome identification "
                            f"for {c.name!r} is not a bijection"
                        )
    return violations


def component_outcome_map(
    system: SystemType, decl: ConvexDeclaration, component: ConvexComponent
) -> dict[str, str]:
    """Outcome identification for a measurement-mixture component.

    Defaults to the identity when the outcome sets coincide.
    """
    if component.outcome_map is not None:
        return component.outcome_bijection()
    comp = system.outcomes_of(component.name).labels
    target = system.outcomes_of(decl.target).labels
    if set(comp) != set(target):
        raise ModelError(
            f"no outcome identification between {component.name!r} and {decl.target!r}"
        )
    return {o: o for o in comp}


# ---------------------------------------------------------------------------
# Operational theories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Measurement:
    """A measurement procedure, possibly a joint one over base labels.

    ``outcome_values`` aligns each outcome id with the tuple of base-label
    outcomes it stands for, enabling projections onto sub-measurements.
    """

    name: str
    labels: tuple[str, ...]
    outcomes: tuple[str, ...]
    outcome_values: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self) -> None:
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ModelError(f"measurement {self.name!r} has duplicate outcomes")
        mapping = dict(self.outcome_values)
        if set(mapping) != set(self.outcomes):
            raise ModelError(f"measurement {self.name!r}: outcome values misaligned")
        for o, vals in mapping.items():
            if len(vals) != len(self.labels):
                raise ModelError(
                    f"measurement {self.name!r}: outcome {o!r} arity mismatch"
                )

    def values_of(self, outcome: str) -> tuple[str, ...]:
        return dict(self.outcome_values)[outcome]

    def project(self, sub_labels: tuple[str, ...], outcome: str) -> tuple[str, ...]:
        """Project an outcome onto a subset of the base labels."""
        vals = self.values_of(outcome)
        pos = {m: i for i, m in enumerate(self.labels)}
        return tuple(vals[pos[m]] for m in sub_labels)


def elementary_measurement(name: str, outcomes: Iterable[str]) -> Measurement:
    outs = tuple(outcomes)
    return Measurement(
        name=name,
        labels=(name,),
        outcomes=outs,
        outcome_values=tuple((o, (o,)) for o in outs),
    )


@dataclass
class OperationalTheory:
    """Preparations, measurements and their exact outcome statistics."""

    preparations: tuple[str, ...]
    measurements: dict[str, Measurement]
    statistics: dict[tuple[str, str], dict[str, Fraction]]
    convex: tuple[ConvexDeclaration, ...] = ()

    def distribution(self, prep: str, meas: str) -> dict[str, Fraction]:
        try:
            return self.statistics[(prep, meas)]
        except KeyError:
            raise ModelError(f"no statistics for ({prep!r}, {meas!r})") from None

    def measurement(self, name: str) -> Measurement:
        try:
            return self.measurements[name]
        except KeyError:
            raise ModelError(f"unknown measurement {name!r}") from None


def validate_operational_theory(theory: OperationalTheory) -> list[str]:
    """Structural + marginal-consistency validation; returns violations."""
    violations: list[str] = []
    for (p, m), dist in theory.statistics.items():
        if p not in theory.preparations:
            violations.append(f"statistics reference unknown preparation {p!r}")
        if m not in theory.measurements:
            violations.append(f"statistics reference unknown measurement {m!r}")
            continue
        meas = theory.measurements[m]
        if set(dist) - set(meas.outcomes):
            violations.append(f"({p!r},{m!r}): unknown outcomes {set(dist) - set(meas.outcomes)}")
        total = sum(dist.values(), start=ZERO)
        if total != ONE:
            violations.append(f"({p!r},{m!r}): outcome weights sum to {total}")
        if any(w < 0 for w in dist.values()):
            violations.append(f"({p!r},{m!r}): negative weight")
    for p in theory.preparations:
        for m in theory.measurements:
            if (p, m) not in theory.statistics:
                violations.append(f"missing statistics for ({p!r}, {m!r})")
    # marginal consistency along the joint-measurability order
    by_labels = {frozenset(meas.labels): name for name, meas in theory.measurements.items()}
    for name, meas in theory.measurements.items():
        for other_labels, other_name in by_labels.items():
            if other_labels < frozenset(meas.labels):
                sub = theory.measurements[other_name]
                for p in theory.preparations:
                    if (p, name) not in theory.statistics or (p, other_name) not in theory.statistics:
                        continue
                    joint = theory.statistics[(p, name)]
                    marg: dict[tuple[str, ...], Fraction] = {}
                    for o, w in joint.items():
                        key = meas.project(sub.labels, o)
                        marg[key] = marg.get(key, ZERO) + w
                    for o in sub.outcomes:
                        want = theory.statistics[(p, other_name)].get(o, ZERO)
                        got = marg.get(sub.values_of(o), ZERO)
                        if want != got:
                            violations.append(
                                f"({p!r}): {other_name!r} inconsistent with marginal of "
                                f"{name!r} at outcome {o!r} ({want} != {got})"
                            )
    return violations


def maximal_measurements(theory: OperationalTheory) -> list[str]:
    """Names of measurements maximal in the joint-measurability order."""
    names = sorted(theory.measurements)
    out = []
    for name in names:
        labels = frozenset(theory.measurements[name].labels)
        if not any(
            labels < frozenset(theory.measurements[o].labels)
            for o in names
            if o != name
        ):
            out.append(name)
    return out


def elementary_measurements(theory: OperationalTheory) -> list[str]:
    """Names of measurements minimal in the joint-measurability order."""
    names = sorted(theory.measurements)
    out = []
    for name in names:
        labels = frozenset(theory.measurements[name].labels)
        if not any(
            frozenset(theory.measurements[o].labels) < labels
            for o in names
            if o != name
        ):
            out.append(name)
    return out


def outcome_tuples(outcome_sets: list[tuple[str, ...]]) -> Iterator[tuple[str, ...]]:
    """Lexicographic product of outcome sets (first label varies slowest)."""
    return itertools.product(*outcome_sets)
