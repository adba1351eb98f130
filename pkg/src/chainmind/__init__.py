"""Token memory bank with chain association activation, memory/forgetting
plasticity, innate need presets and a seek-benefit-avoid-harm decision engine."""
from .activation import (
    ActivationReport,
    EdgeKind,
    PropagationEdge,
    PropagationLimitError,
    StaleReportError,
    chain_activate,
    decay_activations,
    proximity_coefficient,
    seed_activation,
    similarity_coefficient,
)
from .bank import (
    BankError,
    BankFormatError,
    DimensionError,
    MemoryBank,
    OrderingError,
    TokenKind,
    TokenPayload,
    TokenRecord,
    merge,
)
from .config import Config, load_config, parse_config
from .decision import Action, ActionKind, GoalNode, ValenceTally, decide, expand_goal, extract_paths, segmented_imitate, tally
from .harness import ScenarioScript, load_script, parse_script, run_scenario
from .innate import GestureSpec, InnateRegistry, NeedSpec, install, monitor_vitals
from .plasticity import forget, memory_increment, reinforce
from .tokenizer import InputEvent, tokenize_event, tokenize_text

__version__ = "0.1.0"
