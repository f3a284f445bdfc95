"""proclens: reconstruct, segment, and review programming processes.

The pipeline runs left to right: edit logs become sessions (`events`),
sessions replay into document states (`replay`), pauses split those states
into numbered snapshots (`segmentation`), snapshots render into prompts
(`prompts`), prompts run against models (`harness`), and responses get
rated (`evaluation`).  `cli` and `service` wrap the pipeline for people.
"""

from .events import (
    ColumnMapping,
    EditEvent,
    EventKind,
    FieldRule,
    ParseError,
    Session,
    SessionKey,
    ValidationReport,
    deidentify_timing,
    ingest_csv,
    parse_jsonl,
    serialize_jsonl,
    split_sessions,
    validate,
)
from .replay import (
    CodeState,
    DeleteMismatch,
    Document,
    OffsetOutOfBounds,
    ReplayError,
    Replayer,
    apply,
    invert,
    reconstruct_at,
    states_at,
)
from .segmentation import (
    DEFAULT_THRESHOLD_MS,
    GapInfo,
    ProcessMetrics,
    Snapshot,
    SnapshotReason,
    SnapshotSequence,
    extract_snapshots,
    gaps,
    process_metrics,
    slice_steps,
)
from .prompts import (
    FitReport,
    PromptBundle,
    TaskKind,
    build_prompt,
    check_context_fit,
    estimate_tokens,
    render_steps,
)
from .harness import (
    BatchPlan,
    CacheTransport,
    GenerationRecord,
    GenerationStatus,
    HttpTransport,
    MockTransport,
    ModelConfig,
    PlanItem,
    RecordStore,
    StatsTable,
    TransportError,
    complete,
    generation_stats,
    prompt_hash,
    record_id_for,
    run_batch,
)
from .evaluation import (
    AgreementStats,
    AutoCheckReport,
    Codebook,
    DEFAULT_CODEBOOK,
    EvaluationRecord,
    EvaluationStore,
    RejectReason,
    Rubric,
    acceptability_agreement,
    auto_checks,
    check_step_refs,
    extract_step_refs,
    theme_frequencies,
)

__version__ = "0.1.0"
