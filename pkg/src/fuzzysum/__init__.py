"""Hierarchical linguistic summaries of fuzzy relational tables.

Pipeline: parse an FSQL schema and expert label definitions, encode
records into a numeric code matrix, run fuzzy c-means per attribute,
alpha-cut the memberships and organize the resulting fuzzy concepts into
a leveled hierarchy.
"""

from .clustering import (
    AttributePartition,
    FcmConfig,
    MembershipMatrix,
    alpha_cut,
    fcm,
    joint_partition,
    label_clusters,
    per_attribute_partitions,
)
from .encoder import (
    CodeBook,
    CodeMatrix,
    LabelCode,
    Record,
    assign_codes,
    build_intermediate_matrix,
    normalize_matrix,
    read_records,
)
from .export import hierarchy_from_json, hierarchy_to_dot, hierarchy_to_json, nested_to_dot
from .fuzzy_domain import (
    FuzzyValue,
    SimilarityRelation,
    TrapezoidLabel,
    ValueKind,
    approximate_distribution,
    similarity_degree,
    trapezoid_membership,
)
from .lattice import (
    ConceptSummary,
    FuzzyContext,
    SummaryHierarchy,
    brute_force_concepts,
    build_fuzzy_context,
    build_hierarchy,
    cardinality,
    cover_relation,
    enumerate_concepts,
    extent_of,
    intent_closure,
    nested_diagram,
    query_level,
)
from .pipeline import PipelineConfig, run_pipeline
from .schema import (
    SchemaCatalog,
    load_label_definitions,
    parse_fsql_schema,
    serialize_catalog,
    validate_catalog,
)

__version__ = "0.1.0"
