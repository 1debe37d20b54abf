from .config import ExperimentConfig, load_config
from .corpus import CorpusItem, parse_function, sparse_corpus, standard_corpus
from .report import write_result
from .runners import (
    RunResult,
    run_aploc,
    run_cz_oscillation,
    run_equivalence,
    run_maximal_comparison,
    run_modular_failure,
    run_norm,
    run_sparse_check,
    run_vector_valued,
)
