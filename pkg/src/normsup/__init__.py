"""normsup: conditional-norm monitoring, revision classification and
runtime norm supervision over finite transition systems."""

from .errors import (
    BudgetExceeded,
    NormsupError,
    NotTotal,
    UnknownAtom,
    VocabularyMismatch,
    VocabularyTooLarge,
)
from .formula import (
    And,
    Atom,
    FALSE,
    Formula,
    Not,
    Or,
    Strictness,
    TRUE,
    atoms_of,
    evaluate,
    implies_valid,
    strictness,
    strictness_valid,
)
from .model import (
    Path,
    TransitionSystem,
    complete_total,
    enumerate_paths,
    is_total,
    reachable_states,
    sample_lasso,
    sample_path,
    validate,
)
from .norms import (
    EventKind,
    Lifecycle,
    MonitorEvent,
    MonitorMode,
    Norm,
    NormKind,
    NormMonitor,
    NormSet,
    SanctionLedger,
    Tiebreak,
    ground_norm,
    ground_normset,
    monitor_init,
    run_trace,
    violates_any,
    violates_path,
)
from .revision import (
    CandidatePool,
    EditDirection,
    Relation,
    RevisionVerdict,
    SanctionChange,
    SyntacticCase,
    SyntacticDirection,
    SyntacticVerdict,
    classify_revision,
    compare_sanctions,
    generate_candidates,
    oracle_compare,
    syntactic_classify,
    viol_contains,
)
from .supervision import (
    AgentSpec,
    Enforcement,
    Objective,
    ObjectiveKind,
    RunLog,
    Scenario,
    SupervisionResult,
    agent_choose,
    evaluate_objective,
    run_episode,
    supervise,
)

__version__ = "0.1.0"
