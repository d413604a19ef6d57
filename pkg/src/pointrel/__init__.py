"""Temporal relations as point order questions.

The pipeline: a relation schema compiles to boolean expressions over
eight order questions (two per cross-event point pair); a small
trainable head answers the questions from pair features; decoders turn
binary answers or probabilities back into schema relations; metrics
and data tooling round out batch experiments.
"""

from .errors import (
    CheckpointError,
    DimensionMismatch,
    DomainError,
    DuplicateId,
    DuplicateRelationName,
    EmptyDataset,
    EmptySchema,
    ImproperInterval,
    LengthMismatch,
    MissingPlaceholder,
    ParseError,
    PointrelError,
    SplitViolation,
    TransportError,
    UnknownRelation,
    ValidationError,
)
from .points import (
    PAIR_ORDER,
    RELATION_ORDER,
    PointConfiguration,
    PointPair,
    PointRelation,
    QuestionAnswers,
    QuestionProbabilities,
    answers_to_relation,
    configuration_from_intervals,
    enumerate_consistent_configurations,
    invert,
    is_consistent,
    relation_to_answers,
    swap_events,
)
from .logic import (
    ATOM_ORDER,
    NUM_ATOMS,
    And,
    Atom,
    Const,
    Not,
    Or,
    and_,
    assignment_to_qvector,
    config_to_qvector,
    eval_hard,
    eval_prob_sum,
    eval_soft,
    expand_minterms,
    grad_soft,
    not_,
    or_,
    parse_expr,
    to_text,
)
from .schema import (
    BUILTIN_NAMES,
    PointPredicate,
    RelationDef,
    RelationSchema,
    ValidationReport,
    builtin_schemas,
    compile_schema,
    get_builtin,
    load_schema,
    parse_schema,
    project,
    resolve_schema,
    save_schema,
    validate,
)
from .inference import (
    BUILTIN_MAPPINGS,
    MAPPING1,
    MAPPING2,
    ConversionResult,
    LabelMapping,
    RelationDistribution,
    aggregate_llm_answers,
    convert,
    llm_pair_relation,
    llm_point_relation,
    map_labels,
    predict,
    soft_distribution,
    transfer_decode,
)
from .sorter import (
    LabeledPair,
    SorterParams,
    TrainConfig,
    backward,
    forward,
    hard_answers,
    init_params,
    load_checkpoint,
    loss,
    predict_batch,
    save_checkpoint,
    synth_generate,
    train,
)
from .metrics import (
    EvalReport,
    error_breakdown,
    evaluate,
    macro_f1,
    micro_f1_excluding_vague,
    per_relation_f1,
)
from .dataio import (
    PairRecord,
    read_pairs,
    read_predictions,
    split_sample,
    symmetric_label_map,
    symmetry_augment,
    write_pairs,
    write_predictions,
)

__version__ = "0.1.0"
