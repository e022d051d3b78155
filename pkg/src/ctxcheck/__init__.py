"""Exact-arithmetic contextuality analysis for empirical theories."""

from ctxcheck.bridge import (
    EmpiricalMorphism,
    OperationalMorphism,
    RepresentationMorphism,
    apply_operational_morphism,
    apply_representation_morphism,
    check_iso_diagram,
    compose_empirical,
    compose_operational,
    empirical_theories_statistically_equal,
    forget_statistics,
    identity_morphism,
    operational_theories_statistically_equal,
    to_empirical,
    to_operational,
    validate_empirical_morphism,
    validate_operational_morphism,
    validate_representation_morphism,
)
from ctxcheck.equivalence import (
    EquivalenceClasses,
    MinimalizeMap,
    QuotientMap,
    SplitMap,
    equivalence_classes,
    minimalize,
    observable_split,
    quotient_theory,
    theories_equal,
    transport_sections_from_minimal,
    transport_sections_to_minimal,
)
from ctxcheck.generate import (
    GeneratorError,
    duplicated_label_theory,
    parity_bump,
    random_factorizable_representation,
    random_feasible_theory,
    random_frustrated_cycle,
    random_instance,
    random_sections,
    random_system,
    theory_from_sections,
)
from ctxcheck.kernels import BACKEND
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
from ctxcheck.model import (
    ConvexComponent,
    ConvexDeclaration,
    EmpiricalTheory,
    InvalidSystemError,
    Measurement,
    ModelError,
    OperationalTheory,
    OutcomeSet,
    RationalDistribution,
    Section,
    State,
    SystemType,
    elementary_measurement,
    format_rational,
    parse_rational,
    system_type,
    validate_operational_theory,
    validate_system_type,
    validate_theory,
)
from ctxcheck.ontology import (
    OntologicalRepresentation,
    RepresentationError,
    RepresentationReport,
    SharpnessReport,
    analyze_representation,
    canonical_representation,
    check_sharpness_forces_determinism,
    induced_theory,
    outcome_pair_classes,
    preparation_classes,
    realized_weight,
    sharpness_report,
    trivial_representation,
    validate_representation,
    verify_realization,
)
from ctxcheck.quantum import (
    BUILTIN_NAMES,
    BuiltinExample,
    QuantumInputError,
    QuantumLabel,
    QuantumScenario,
    as_density,
    binary_projective_label,
    born_scenario,
    builtin_example,
    projector_onto,
    without_declarations,
)
from ctxcheck.serialize import (
    DocumentError,
    dump_document,
    load_document,
    representation_from_document,
    representation_to_document,
    scenario_from_document,
    sections_from_document,
    sections_to_document,
    theory_from_document,
    theory_to_document,
)
from ctxcheck.sheaf import (
    ContextualityVerdict,
    SignallingError,
    check_contextuality,
    find_global_section,
    global_section_system,
    marginal_weights,
    require_no_signalling,
    signalling_violations,
    verify_global_section,
)

__version__ = "0.1.0"
