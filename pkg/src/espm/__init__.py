"""Efficient supervised pattern mining over an FP-Tree."""
from .dataset import BinningSpec, Dataset, ItemCatalog, bin_numeric, label_counts, load_csv
from .errors import (
    BinningError,
    ConfigError,
    DatasetError,
    EmptyInputError,
    EspmError,
    OracleCapExceeded,
    ParseError,
    SchemaError,
    StatisticError,
)
from .miner import CandidateRecord, MineResult, MiningConfig, mine
from .postprocess import (
    InformativePatternSet,
    MinedPattern,
    bonferroni_thresholds,
    extract_attribute_values,
    finalize,
)

__version__ = "0.1.0"


def run(dataset, config, threads=1):
    """Mine and post-process ``dataset``; returns ``(MineResult, InformativePatternSet)``."""
    result = mine(dataset, config, threads=threads)
    return result, finalize(result)
