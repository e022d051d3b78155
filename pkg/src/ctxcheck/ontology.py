"""Ontological representations and their (non)contextuality properties.

A representation explains an operational theory's statistics through a finite
set of ontic values: preparations become distributions over the values,
measurements become per-value response distributions, and realization means
the law of total probability reproduces every table exactly.

The analysis battery computes six exact flags: realization, preparation and
measurement non-contextuality (statistically equivalent things must get
identical distributions), outcome determinism, parameter independence, and
factorizability of joint-measurement responses into single-measurement ones.
Constructions: the trivial representation (one ontic value per preparation
class), the canonical representation (ontic values are the supported full
assignments of the minimalized theory, with delta responses), and the
induced empirical theory of a factorizable non-contextual representation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from ctxcheck.equivalence import (
    minimalize,
    transport_sections_to_minimal,
)
from ctxcheck.model import (
    EmpiricalTheory,
    Measurement,
    ModelError,
    ONE,
    OperationalTheory,
    RationalDistribution,
    State,
    ZERO,
    elementary_measurements,
    maximal_measurements,
    system_type,
)
from ctxcheck.sheaf import marginal_weights, verify_global_section

Weights = dict[str, Fraction]


class RepresentationError(ModelError):
    """A representation fails a precondition; carries the analysis if known."""

    def __init__(self, message: str, report: "RepresentationReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass
class OntologicalRepresentation:
    """Finite ontic values with preparation and response distributions."""

    ontic: tuple[str, ...]
    mu: dict[str, Weights]  # preparation -> ontic value -> weight
    xi: dict[str, dict[str, Weights]]  # measurement -> ontic value -> outcome -> w
    target: OperationalTheory

    def mu_of(self, prep: str) -> Weights:
        try:
            return self.mu[prep]
        except KeyError:
            raise ModelError(f"no preparation distribution for {prep!r}") from None

    def xi_of(self, meas: str, value: str) -> Weights:
        try:
            return self.xi[meas][value]
        except KeyError:
            raise ModelError(
                f"no response for measurement {meas!r} at ontic value {value!r}"
            ) from None


def validate_representation(rep: OntologicalRepresentation) -> list[str]:
    """Structural checks: alignment, normalization, no unreachable value."""
    out: list[str] = []
    target = rep.target
    values = set(rep.ontic)
    if len(values) != len(rep.ontic):
        out.append("duplicate ontic values")
    if set(rep.mu) != set(target.preparations):
        out.append("preparation distributions do not match target preparations")
    if set(rep.xi) != set(target.measurements):
        out.append("response families do not match target measurements")
    for p, dist in rep.mu.items():
        if set(dist) - values:
            out.append(f"mu[{p!r}] uses unknown ontic values")
        if any(w < 0 for w in dist.values()):
            out.append(f"mu[{p!r}] has a negative weight")
        if sum(dist.values(), start=ZERO) != ONE:
            out.append(f"mu[{p!r}] does not sum to 1")
    for m, family in rep.xi.items():
        meas = target.measurements.get(m)
        if meas is None:
            continue
        if set(family) != values:
            out.append(f"xi[{m!r}] missing some ontic values")
        for lam, dist in family.items():
            if set(dist) - set(meas.outcomes):
                out.append(f"xi[{m!r}][{lam!r}] uses unknown outcomes")
            if any(w < 0 for w in dist.values()):
                out.append(f"xi[{m!r}][{lam!r}] has a negative weight")
            if sum(dist.values(), start=ZERO) != ONE:
                out.append(f"xi[{m!r}][{lam!r}] does not sum to 1")
    reached = {lam for dist in rep.mu.values() for lam, w in dist.items() if w > 0}
    for lam in rep.ontic:
        if lam not in reached:
            out.append(f"ontic value {lam!r} unreachable by every preparation")
    return out


def realized_weight(
    rep: OntologicalRepresentation, prep: str, meas: str, outcome: str
) -> Fraction:
    mu = rep.mu_of(prep)
    family = rep.xi[meas]
    total = ZERO
    for lam, w in mu.items():
        if w == 0:
            continue
        total += w * family[lam].get(outcome, ZERO)
    return total


def verify_realization(
    rep: OntologicalRepresentation,
) -> tuple[bool, tuple[str, str, str] | None]:
    """Exact check of the total-probability law; first failing (p, m, k)."""
    target = rep.target
    for p in target.preparations:
        for m in sorted(target.measurements):
            stats = target.distribution(p, m)
            for k in target.measurements[m].outcomes:
                if realized_weight(rep, p, m, k) != stats.get(k, ZERO):
                    return False, (p, m, k)
    return True, None


# ---------------------------------------------------------------------------
# Operational-side equivalences
# ---------------------------------------------------------------------------


def preparation_classes(target: OperationalTheory) -> tuple[tuple[str, ...], ...]:
    """Preparations grouped by identical statistics on every measurement."""
    def key(p: str):
        return tuple(
            tuple(sorted(target.distribution(p, m).items()))
            for m in sorted(target.measurements)
        )
    groups: dict = {}
    for p in sorted(target.preparations):
        groups.setdefault(key(p), []).append(p)
    classes = [tuple(g) for g in groups.values()]
    classes.sort(key=lambda c: c[0])
    return tuple(classes)


def outcome_pair_classes(
    target: OperationalTheory,
) -> tuple[tuple[tuple[str, str], ...], ...]:
    """(measurement, outcome) pairs grouped by per-preparation weight."""
    preps = sorted(target.preparations)
    def key(pair: tuple[str, str]):
        m, k = pair
        return tuple(target.distribution(p, m).get(k, ZERO) for p in preps)
    groups: dict = {}
    for m in sorted(target.measurements):
        for k in target.measurements[m].outcomes:
            groups.setdefault(key((m, k)), []).append((m, k))
    classes = [tuple(g) for g in groups.values()]
    classes.sort(key=lambda c: c[0])
    return tuple(classes)


# ---------------------------------------------------------------------------
# Analysis battery
# ---------------------------------------------------------------------------


@dataclass
class RepresentationReport:
    """Six exact flags with a concrete witness for every False."""

    realizes: bool
    preparation_nc: bool
    measurement_nc: bool
    outcome_deterministic: bool
    parameter_independent: bool
    factorizable: bool
    counterexamples: dict[str, tuple] = field(default_factory=dict)

    def noncontextual(self) -> bool:
        return self.preparation_nc and self.measurement_nc


def _elementary_by_label(target: OperationalTheory) -> dict[str, str]:
    out: dict[str, str] = {}
    for name in sorted(target.measurements):
        meas = target.measurements[name]
        if len(meas.labels) == 1:
            out.setdefault(meas.labels[0], name)
    return out


def analyze_representation(
    rep: OntologicalRepresentation,
) -> RepresentationReport:
    """Compute all six flags exactly (see module docstring)."""
    target = rep.target
    problems = validate_representation(rep)
    if problems:
        raise RepresentationError("; ".join(problems))
    counter: dict[str, tuple] = {}

    realizes, witness = verify_realization(rep)
    if not realizes:
        counter["realizes"] = witness

    prep_nc = True
    for cls in preparation_classes(target):
        base = rep.mu_of(cls[0])
        for other in cls[1:]:
            if _weights_differ(base, rep.mu_of(other)):
                prep_nc = False
                counter["preparation_nc"] = (cls[0], other)
                break
        if not prep_nc:
            break

    meas_nc = True
    for cls in outcome_pair_classes(target):
        m0, k0 = cls[0]
        for m1, k1 in cls[1:]:
            for lam in rep.ontic:
                a = rep.xi[m0][lam].get(k0, ZERO)
                b = rep.xi[m1][lam].get(k1, ZERO)
                if a != b:
                    meas_nc = False
                    counter["measurement_nc"] = ((m0, k0), (m1, k1), lam)
                    break
            if not meas_nc:
                break
        if not meas_nc:
            break

    deterministic = True
    for m in sorted(target.measurements):
        for lam in rep.ontic:
            for k, w in rep.xi[m][lam].items():
                if w != 0 and w != 1:
                    deterministic = False
                    counter["outcome_deterministic"] = (m, lam, k)
                    break
            if not deterministic:
                break
        if not deterministic:
            break

    param_ind = True
    names = sorted(target.measurements)
    for a, b in itertools.combinations(names, 2):
        ma, mb = target.measurements[a], target.measurements[b]
        shared = tuple(sorted(set(ma.labels) & set(mb.labels)))
        if not shared:
            continue
        for lam in rep.ontic:
            pa = _project_response(ma, rep.xi[a][lam], shared)
            pb = _project_response(mb, rep.xi[b][lam], shared)
            if pa != pb:
                param_ind = False
                counter["parameter_independent"] = (a, b, lam, shared)
                break
        if not param_ind:
            break

    factorizable = True
    elem = _elementary_by_label(target)
    for m in names:
        meas = target.measurements[m]
        if len(meas.labels) < 2:
            continue
        missing = [x for x in meas.labels if x not in elem]
        if missing:
            raise RepresentationError(
                f"cannot assess factorizability: no single measurement for {missing}"
            )
        for lam in rep.ontic:
            for k in meas.outcomes:
                product = ONE
                for x in meas.labels:
                    ex = target.measurements[elem[x]]
                    sub = meas.project((x,), k)
                    kx = _outcome_for_values(ex, sub)
                    product *= rep.xi[elem[x]][lam].get(kx, ZERO)
                    if product == 0:
                        break
                if rep.xi[m][lam].get(k, ZERO) != product:
                    factorizable = False
                    counter["factorizable"] = (m, lam, k)
                    break
            if not factorizable:
                break
        if not factorizable:
            break

    return RepresentationReport(
        realizes=realizes,
        preparation_nc=prep_nc,
        measurement_nc=meas_nc,
        outcome_deterministic=deterministic,
        parameter_independent=param_ind,
        factorizable=factorizable,
        counterexamples=counter,
    )


def _weights_differ(a: Weights, b: Weights) -> bool:
    keys = set(a) | set(b)
    return any(a.get(k, ZERO) != b.get(k, ZERO) for k in keys)


def _project_response(
    meas: Measurement, dist: Weights, shared: tuple[str, ...]
) -> dict[tuple[str, ...], Fraction]:
    out: dict[tuple[str, ...], Fraction] = {}
    for k, w in dist.items():
        if w == 0:
            continue
        key = meas.project(shared, k)
        out[key] = out.get(key, ZERO) + w
    return out


def _outcome_for_values(meas: Measurement, values: tuple[str, ...]) -> str:
    for o, vals in meas.outcome_values:
        if vals == values:
            return o
    raise ModelError(
        f"measurement {meas.name!r} has no outcome with values {values}"
    )


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------


def trivial_representation(target: OperationalTheory) -> OntologicalRepresentation:
    """One ontic value per preparation class; responses read off the tables."""
    classes = preparation_classes(target)
    name_of_class = {cls: f"[{cls[0]}]" for cls in classes}
    class_of_prep = {p: cls for cls in classes for p in cls}
    ontic = tuple(name_of_class[cls] for cls in classes)
    mu = {
        p: {name_of_class[class_of_prep[p]]: ONE} for p in target.preparations
    }
    xi: dict[str, dict[str, Weights]] = {}
    for m in target.measurements:
        family: dict[str, Weights] = {}
        for cls in classes:
            stats = target.distribution(cls[0], m)
            family[name_of_class[cls]] = {k: w for k, w in stats.items() if w != 0}
        xi[m] = family
    return OntologicalRepresentation(ontic=ontic, mu=mu, xi=xi, target=target)


def ontic_name(values: tuple[str, ...]) -> str:
    return f"w[{','.join(values)}]"


def canonical_representation(
    theory: EmpiricalTheory, sections: dict[str, RationalDistribution]
) -> OntologicalRepresentation:
    """Delta-response representation built on the minimalized theory.

    Ontic values are the full assignments supported by the transported
    sections; each preparation's distribution is its state class's
    transported section; responses answer each measurement by reading the
    assignment back through the minimalization maps.  Realizes the theory's
    operational form exactly and is preparation non-contextual, parameter
    independent, outcome deterministic, and factorizable by construction.
    """
    from ctxcheck.bridge import to_operational

    violations = verify_global_section(theory, sections)
    if violations:
        raise RepresentationError(
            "sections do not verify: " + "; ".join(violations)
        )
    m_theory, mmap = minimalize(theory)
    m_sections = transport_sections_to_minimal(theory, mmap, sections)
    target = to_operational(theory)

    support = sorted(
        {g for dist in m_sections.values() for g, w in dist.items() if w != 0}
    )
    ontic = tuple(ontic_name(g) for g in support)

    qmap = mmap.quotient_map
    smap = mmap.split_map
    original_of: dict[tuple[str, ...], tuple[str, ...]] = {}
    for g in support:
        lifted = qmap.lift_assignment(smap.split_labels, g)
        decoded = smap.decode(lifted)
        if decoded is None:
            raise RepresentationError(
                "internal error: supported assignment does not decode"
            )
        original_of[g] = decoded

    labels = theory.system.labels
    pos = {m: i for i, m in enumerate(labels)}
    mu: dict[str, Weights] = {}
    for p in target.preparations:
        dist = m_sections[qmap.state_forward[p]]
        mu[p] = {ontic_name(g): w for g, w in dist.items()}

    xi: dict[str, dict[str, Weights]] = {}
    for name in target.measurements:
        meas = target.measurements[name]
        outcome_of = {vals: o for o, vals in meas.outcome_values}
        family: dict[str, Weights] = {}
        for g in support:
            orig = original_of[g]
            values = tuple(orig[pos[x]] for x in meas.labels)
            family[ontic_name(g)] = {outcome_of[values]: ONE}
        xi[name] = family
    return OntologicalRepresentation(ontic=ontic, mu=mu, xi=xi, target=target)


def induced_theory(
    rep: OntologicalRepresentation,
) -> tuple[EmpiricalTheory, dict[str, RationalDistribution]]:
    """Empirical theory of a factorizable non-contextual representation.

    Labels are the minimal measurements, the cover collects the maximal
    ones, and each state's table is the factorized joint.  Also returns the
    explicit global section each preparation's distribution induces, so the
    result is non-contextual by construction.
    """
    report = analyze_representation(rep)
    if not (report.factorizable and report.noncontextual()):
        raise RepresentationError(
            "representation must be factorizable and non-contextual", report
        )
    target = rep.target
    minimal = elementary_measurements(target)
    maximal = maximal_measurements(target)
    label_sets = [frozenset(target.measurements[m].labels) for m in minimal]
    for big in maximal:
        cover_labels = set(target.measurements[big].labels)
        parts = [s for s in label_sets if s <= cover_labels]
        if sum(len(s) for s in parts) != len(cover_labels) or set().union(
            *parts
        ) != cover_labels:
            raise RepresentationError(
                f"maximal measurement {big!r} is not partitioned by minimal ones"
            )

    outcomes = {m: tuple(target.measurements[m].outcomes) for m in minimal}
    cover = []
    for big in maximal:
        cover_labels = set(target.measurements[big].labels)
        ctx = tuple(
            m
            for m in minimal
            if set(target.measurements[m].labels) <= cover_labels
        )
        if ctx not in cover:
            cover.append(ctx)
    system = system_type({m: outcomes[m] for m in minimal}, cover)

    # global section per preparation from the product formula
    assignments = list(itertools.product(*(outcomes[m] for m in minimal)))
    sections: dict[str, RationalDistribution] = {}
    for p in target.preparations:
        weights: dict[tuple[str, ...], Fraction] = {}
        for values in assignments:
            total = ZERO
            for lam, w in rep.mu_of(p).items():
                if w == 0:
                    continue
                product = w
                for m, k in zip(minimal, values):
                    product *= rep.xi[m][lam].get(k, ZERO)
                    if product == 0:
                        break
                total += product
            if total != 0:
                weights[values] = total
        sections[p] = RationalDistribution(domain=tuple(minimal), weights=weights)

    states: dict[str, State] = {}
    for p in target.preparations:
        table = {}
        for ctx in system.cover:
            table[ctx] = RationalDistribution(
                domain=ctx, weights=marginal_weights(sections[p], ctx)
            )
        states[p] = State(name=p, table=table)
    theory = EmpiricalTheory(system=system, states=states, convex=())
    return theory, sections


# ---------------------------------------------------------------------------
# Sharpness: perfect predictability and maximally mixed preparations
# ---------------------------------------------------------------------------


@dataclass
class SharpnessReport:
    """Which measurements are perfectly predictable, and by which witnesses;
    which preparations pass the maximally-mixed conditions against the
    declared convex structure."""

    perfectly_predictable: dict[str, dict[str, str]]  # meas -> outcome -> prep
    maximally_mixed: tuple[str, ...]


def sharpness_report(
    target: OperationalTheory, convex=None
) -> SharpnessReport:
    """Scan statistics for certainty witnesses and mixed-preparation status.

    Maximal mixedness is decided against the finitely many declared convex
    combinations only: the preparation must decompose (up to statistical
    equivalence of targets) through every other preparation, and through a
    certainty family for every perfectly predictable measurement.
    """
    if convex is None:
        convex = target.convex
    predictable: dict[str, dict[str, str]] = {}
    for m in sorted(target.measurements):
        witnesses: dict[str, str] = {}
        for k in target.measurements[m].outcomes:
            for p in sorted(target.preparations):
                if target.distribution(p, m).get(k, ZERO) == ONE:
                    witnesses[k] = p
                    break
            else:
                break
        else:
            predictable[m] = witnesses

    classes = preparation_classes(target)
    class_of = {p: cls for cls in classes for p in cls}
    state_decls = [d for d in convex if d.kind == "state"]
    mixed: list[str] = []
    for p in sorted(target.preparations):
        decls = [d for d in state_decls if class_of[d.target] == class_of[p]]
        if not decls:
            continue
        covers_all_preps = all(
            any(
                class_of[c.name] == class_of[q]
                for d in decls
                for c in d.components
            )
            for q in target.preparations
            if class_of[q] != class_of[p]
        )
        if not covers_all_preps:
            continue
        ok = True
        for m, witnesses in predictable.items():
            outcomes = set(target.measurements[m].outcomes)
            found = False
            for d in decls:
                predicted: set[str] = set()
                family = True
                for c in d.components:
                    hits = [
                        k
                        for k in outcomes
                        if target.distribution(c.name, m).get(k, ZERO) == ONE
                    ]
                    if not hits:
                        family = False
                        break
                    predicted.update(hits)
                if family and predicted == outcomes:
                    found = True
                    break
            if not found:
                ok = False
                break
        if ok:
            mixed.append(p)
    return SharpnessReport(
        perfectly_predictable=predictable, maximally_mixed=tuple(mixed)
    )


def check_sharpness_forces_determinism(
    rep: OntologicalRepresentation, report: SharpnessReport
) -> tuple[bool, tuple[str, str, str] | None]:
    """Consistency check: preparation-noncontextual representations must
    answer perfectly predictable measurements deterministically when a
    maximally mixed preparation exists.  Returns False with a (m, λ, k)
    witness when the claimed preconditions cannot actually hold."""
    analysis = analyze_representation(rep)
    if not analysis.preparation_nc:
        raise RepresentationError(
            "representation is not preparation non-contextual", analysis
        )
    if not report.maximally_mixed:
        raise RepresentationError("target has no maximally mixed preparation")
    if not report.perfectly_predictable:
        raise RepresentationError("target has no perfectly predictable measurement")
    for m in sorted(report.perfectly_predictable):
        for lam in rep.ontic:
            for k, w in rep.xi[m][lam].items():
                if w != 0 and w != 1:
                    return False, (m, lam, k)
    return True, None
