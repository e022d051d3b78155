"""Seeded random instances for property tests and benchmarks.

Theories are built from explicit full-assignment distributions, so the
generated tables always admit a global section by construction; a parity
bump on a two-label context then produces maybe-contextual variants
without introducing signalling.  Generators resample (bounded attempts)
when the drawn weights collide exactly, keeping instances generic: exact
ties between unrelated statistics create spurious equivalences that no
perturbation of the construction would show.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from ctxcheck.bridge import measurement_name, outcome_id
from ctxcheck.model import (
    EmpiricalTheory,
    Measurement,
    ModelError,
    OperationalTheory,
    RationalDistribution,
    State,
    SystemType,
    system_type,
    validate_system_type,
    validate_theory,
)
from ctxcheck.ontology import OntologicalRepresentation, validate_representation
from ctxcheck.sheaf import global_outcome_tuples, marginal_weights

MAX_ATTEMPTS = 50


class GeneratorError(ModelError):
    pass


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------


def _random_cover(
    rng: random.Random, labels: tuple[str, ...]
) -> tuple[tuple[str, ...], ...]:
    """A random antichain cover of the labels: a partition into blocks,
    optionally joined by one context crossing several blocks."""
    order = list(labels)
    rng.shuffle(order)
    blocks: list[tuple[str, ...]] = []
    i = 0
    while i < len(order):
        size = rng.randint(1, min(3, len(order) - i))
        blocks.append(tuple(order[i : i + size]))
        i += size
    cover = list(blocks)
    big = [b for b in blocks if len(b) >= 2]
    if len(big) >= 2 and rng.random() < 0.5:
        chosen = rng.sample(big, rng.randint(2, min(3, len(big))))
        cover.append(tuple(rng.choice(b) for b in chosen))
    return tuple(cover)


def random_system(
    rng: random.Random, min_labels: int = 2, max_labels: int = 4
) -> SystemType:
    """A small random scenario; one third of draws are binary cycles."""
    for _ in range(MAX_ATTEMPTS):
        if rng.random() < Fraction(1, 3):
            n = rng.randint(3, 5)
            names = tuple(f"x{i}" for i in range(n))
            outcomes = {m: ("0", "1") for m in names}
            cover = tuple(
                (names[i], names[(i + 1) % n]) for i in range(n)
            )
        else:
            n = rng.randint(min_labels, max_labels)
            names = tuple(f"x{i}" for i in range(n))
            outcomes = {
                m: tuple(str(v) for v in range(rng.randint(2, 3))) for m in names
            }
            cover = _random_cover(rng, names)
        system = system_type(outcomes, cover)
        if not validate_system_type(system):
            return system
    raise GeneratorError("could not draw a valid scenario")


def random_sections(
    rng: random.Random, system: SystemType, state_names: tuple[str, ...]
) -> dict[str, RationalDistribution]:
    """Strictly positive rational weights over all full assignments."""
    assignments = list(global_outcome_tuples(system))
    out: dict[str, RationalDistribution] = {}
    for name in state_names:
        raw = [rng.randint(1, 9) for _ in assignments]
        total = sum(raw)
        out[name] = RationalDistribution(
            domain=system.labels,
            weights={
                g: Fraction(w, total) for g, w in zip(assignments, raw)
            },
        )
    return out


def theory_from_sections(
    system: SystemType,
    sections: dict[str, RationalDistribution],
    convex=(),
) -> EmpiricalTheory:
    """The empirical theory whose tables are the section marginals."""
    states = {}
    for name, dist in sections.items():
        table = {
            ctx: RationalDistribution(
                domain=ctx, weights=marginal_weights(dist, ctx)
            )
            for ctx in system.cover
        }
        states[name] = State(name=name, table=table)
    theory = EmpiricalTheory(system=system, states=states, convex=convex)
    problems = validate_theory(theory)
    if problems:
        raise GeneratorError("; ".join(problems))
    return theory


def _sub_contexts(ctx: tuple[str, ...]):
    for r in range(1, len(ctx) + 1):
        yield from itertools.combinations(ctx, r)


def _statistics_generic(theory: EmpiricalTheory) -> bool:
    """No exact collisions between unrelated statistics.

    Requires distinct full tables per state and, across all sub-context
    outcome events, distinct per-state weight vectors; ties would merge
    classes that differ structurally.
    """
    system = theory.system
    names = tuple(theory.states)
    tables = [
        tuple(
            tuple(theory.states[s].table[ctx].items()) for ctx in system.cover
        )
        for s in names
    ]
    if len(set(tables)) != len(tables):
        return False
    host = {}
    for ctx in system.cover:
        for sub in _sub_contexts(ctx):
            host.setdefault(sub, ctx)
    vectors: dict[tuple, tuple] = {}
    for sub, ctx in host.items():
        events: dict[tuple[str, ...], list[Fraction]] = {}
        for s in names:
            weights = marginal_weights(theory.states[s].table[ctx], sub)
            for values, w in weights.items():
                events.setdefault(values, [Fraction(0)] * len(names))
            for values in events:
                events[values][names.index(s)] = weights.get(values, Fraction(0))
        for values, vec in events.items():
            key = tuple(vec)
            if key in vectors and vectors[key] != (sub, values):
                return False
            vectors[key] = (sub, values)
    return True


def random_feasible_theory(
    rng: random.Random, min_states: int = 2, max_states: int = 3
) -> tuple[EmpiricalTheory, dict[str, RationalDistribution]]:
    """A generic theory together with the sections it was built from."""
    for _ in range(MAX_ATTEMPTS):
        system = random_system(rng)
        names = tuple(f"s{i}" for i in range(rng.randint(min_states, max_states)))
        sections = random_sections(rng, system, names)
        theory = theory_from_sections(system, sections)
        if _statistics_generic(theory):
            return theory, sections
    raise GeneratorError("could not draw a generic theory")


# ---------------------------------------------------------------------------
# Maybe-contextual variants
# ---------------------------------------------------------------------------


def _bump_table(
    rng: random.Random, dist: RationalDistribution
) -> RationalDistribution | None:
    """Shift weight between the parity classes of a binary pair table.

    Both single-label marginals are preserved, so the bump never creates
    signalling; the pair correlation moves by up to the smallest cell.
    """
    a, b = dist.domain
    cells = {
        (va, vb): dist.weight((va, vb))
        for va in ("0", "1")
        for vb in ("0", "1")
    }
    sign = rng.choice((1, -1))
    for s in (sign, -sign):
        shrinking = [
            key for key in cells if ((key[0] != key[1]) if s > 0 else (key[0] == key[1]))
        ]
        limit = min(cells[key] for key in shrinking)
        if limit == 0:
            continue
        eps = limit * Fraction(rng.randint(1, 4), 4)
        delta = {
            key: (s * eps if key[0] == key[1] else -s * eps) for key in cells
        }
        return RationalDistribution(
            domain=dist.domain,
            weights={key: w + delta[key] for key, w in cells.items()},
        )
    return None


def parity_bump(
    rng: random.Random, theory: EmpiricalTheory
) -> EmpiricalTheory | None:
    """Perturb one two-label binary context; None when no context is eligible."""
    system = theory.system
    eligible = [
        ctx
        for ctx in system.cover
        if len(ctx) == 2
        and all(system.outcomes_of(m).labels == ("0", "1") for m in ctx)
    ]
    if not eligible:
        return None
    ctx = rng.choice(eligible)
    chosen = [s for s in theory.states if rng.random() < 0.5]
    if not chosen:
        chosen = [rng.choice(tuple(theory.states))]
    states = {}
    changed = False
    for name, state in theory.states.items():
        table = dict(state.table)
        if name in chosen:
            bumped = _bump_table(rng, table[ctx])
            if bumped is not None:
                table[ctx] = bumped
                changed = True
        states[name] = State(name=name, table=table)
    if not changed:
        return None
    return EmpiricalTheory(system=system, states=states, convex=theory.convex)


def random_frustrated_cycle(rng: random.Random) -> EmpiricalTheory:
    """A binary ring with an odd number of anti-correlated edges.

    Marginals are uniform everywhere, so the tables never signal; with
    little enough noise no assignment can satisfy every edge parity and
    the theory is contextual.
    """
    n = rng.randint(3, 5)
    names = tuple(f"x{i}" for i in range(n))
    outcomes = {m: ("0", "1") for m in names}
    cover = tuple((names[i], names[(i + 1) % n]) for i in range(n))
    system = system_type(outcomes, cover)
    signs = [rng.choice((1, -1)) for _ in range(n)]
    if signs.count(-1) % 2 == 0:
        signs[rng.randrange(n)] *= -1
    ring = {frozenset(ctx): signs[i] for i, ctx in enumerate(cover)}
    states = {}
    for name in tuple(f"s{i}" for i in range(rng.randint(1, 2))):
        table = {}
        for ctx in system.cover:
            noise = Fraction(rng.randint(0, 2), 20)
            matching = (1 - noise) / 2 if ring[frozenset(ctx)] > 0 else noise / 2
            differing = Fraction(1, 2) - matching
            table[ctx] = RationalDistribution(
                domain=ctx,
                weights={
                    ("0", "0"): matching,
                    ("1", "1"): matching,
                    ("0", "1"): differing,
                    ("1", "0"): differing,
                },
            )
        states[name] = State(name=name, table=table)
    theory = EmpiricalTheory(system=system, states=states)
    problems = validate_theory(theory)
    if problems:
        raise GeneratorError("; ".join(problems))
    return theory


def random_instance(rng: random.Random) -> EmpiricalTheory:
    """A random theory: frustrated cycles mixed with (maybe bumped) generic ones."""
    if rng.random() < Fraction(1, 3):
        return random_frustrated_cycle(rng)
    theory, _ = random_feasible_theory(rng)
    if rng.random() < 0.5:
        bumped = parity_bump(rng, theory)
        if bumped is not None:
            return bumped
    return theory


def duplicated_label_theory(
    rng: random.Random, theory: EmpiricalTheory
) -> EmpiricalTheory:
    """Clone one label into a statistically identical twin.

    The twin lives in a copy of one host context with the original label
    swapped out, so the two never co-occur and quotienting merges them:
    a guaranteed nontrivial quotient.
    """
    system = theory.system
    label = rng.choice(system.labels)
    host = rng.choice([ctx for ctx in system.cover if label in ctx])
    twin = f"{label}_dup"
    outcomes = {m: system.outcomes_of(m).labels for m in system.labels}
    outcomes[twin] = system.outcomes_of(label).labels
    new_ctx = tuple(m for m in host if m != label) + (twin,)
    new_system = system_type(outcomes, system.cover + (new_ctx,))
    new_ctx = new_system.cover[-1]
    states = {}
    for name, state in theory.states.items():
        table = {ctx: state.table[ctx] for ctx in system.cover}
        weights = {}
        for values, w in state.table[host].items():
            by_label = dict(zip(host, values))
            by_label[twin] = by_label.pop(label)
            weights[tuple(by_label[m] for m in new_ctx)] = w
        table[new_ctx] = RationalDistribution(domain=new_ctx, weights=weights)
        states[name] = State(name=name, table=table)
    out = EmpiricalTheory(system=new_system, states=states, convex=theory.convex)
    problems = validate_theory(out)
    if problems:
        raise GeneratorError("; ".join(problems))
    return out


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------


def _positive_distribution(
    rng: random.Random, keys: tuple[str, ...]
) -> dict[str, Fraction]:
    raw = [rng.randint(1, 9) for _ in keys]
    total = sum(raw)
    return {k: Fraction(w, total) for k, w in zip(keys, raw)}


def random_factorizable_representation(
    rng: random.Random,
) -> OntologicalRepresentation:
    """A noncontextual factorizable representation with generic weights.

    Elementary responses are deterministic and joints are their products,
    so factorizability holds by construction; realized statistics become
    the target theory.  Resamples when weight collisions would put
    structurally different preparations or outcome events in one class.
    """
    for _ in range(MAX_ATTEMPTS):
        ontic = tuple(f"l{i}" for i in range(rng.randint(1, 6)))
        preps = tuple(f"p{i}" for i in range(rng.randint(1, 3)))
        labels = tuple(f"e{i}" for i in range(rng.randint(2, 3)))
        out_sets = {
            m: tuple(str(v) for v in range(rng.randint(2, 3))) for m in labels
        }
        cover = _random_cover(rng, labels)
        system = system_type(out_sets, cover)
        if validate_system_type(system):
            continue
        mu = {p: _positive_distribution(rng, ontic) for p in preps}
        elementary = {
            m: {lam: rng.choice(out_sets[m]) for lam in ontic} for m in labels
        }
        measurements: dict[str, Measurement] = {}
        xi: dict[str, dict[str, dict[str, Fraction]]] = {}
        for ctx in system.cover:
            for sub in _sub_contexts(ctx):
                name = measurement_name(sub)
                if name in measurements:
                    continue
                ids = [
                    (outcome_id(values), values)
                    for values in itertools.product(*(out_sets[m] for m in sub))
                ]
                measurements[name] = Measurement(
                    name=name,
                    labels=sub,
                    outcomes=tuple(o for o, _ in ids),
                    outcome_values=tuple(ids),
                )
                xi[name] = {
                    lam: {
                        outcome_id(tuple(elementary[m][lam] for m in sub)): Fraction(1)
                    }
                    for lam in ontic
                }
        statistics: dict[tuple[str, str], dict[str, Fraction]] = {}
        for p in preps:
            for name in measurements:
                weights: dict[str, Fraction] = {}
                for lam in ontic:
                    for k, w in xi[name][lam].items():
                        weights[k] = weights.get(k, Fraction(0)) + mu[p][lam] * w
                statistics[(p, name)] = {
                    k: w for k, w in weights.items() if w != 0
                }
        stats_of = {
            p: tuple(
                tuple(sorted(statistics[(p, name)].items()))
                for name in measurements
            )
            for p in preps
        }
        by_stats: dict[tuple, list[str]] = {}
        for p in preps:
            by_stats.setdefault(stats_of[p], []).append(p)
        if any(
            mu[group[0]] != mu[q] for group in by_stats.values() for q in group
        ):
            continue
        by_vector: dict[tuple, tuple] = {}
        collision = False
        for name in measurements:
            for k in measurements[name].outcomes:
                vector = tuple(statistics[(p, name)].get(k, Fraction(0)) for p in preps)
                column = tuple(
                    xi[name][lam].get(k, Fraction(0)) for lam in ontic
                )
                if vector in by_vector and by_vector[vector] != column:
                    collision = True
                    break
                by_vector[vector] = column
            if collision:
                break
        if collision:
            continue
        target = OperationalTheory(
            preparations=preps,
            measurements=measurements,
            statistics=statistics,
            convex=(),
        )
        rep = OntologicalRepresentation(ontic=ontic, mu=mu, xi=xi, target=target)
        problems = validate_representation(rep)
        if problems:
            raise GeneratorError("; ".join(problems))
        return rep
    raise GeneratorError("could not draw a generic representation")
