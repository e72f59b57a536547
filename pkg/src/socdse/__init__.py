"""Importance-guided multi-objective design-space exploration for
accelerator SoCs: discrete design spaces, pluggable evaluators, inter-
cluster-distance importance analysis with pruning, transductive
experimental-design initialization, per-objective Gaussian-process
surrogates, information-gain acquisition, and the exploration loop."""

from .acquisition import (FrontSample, acquisition_value,
                          acquisition_values, imoo_select,
                          sample_front_maxima)
from .evaluators import (AnalyticSocEvaluator, BenchmarkEvaluator,
                         DatasetError, EvaluationError, Evaluator,
                         EvaluatorDescriptor, TabularEvaluator,
                         UnknownPointError, load_tabular,
                         make_benchmark_space, write_dataset_csv)
from .importance import (IcdSpace, icd, icd_from_trials, medium_index,
                         normalize_importance, prune, transform)
from .init_sampling import (SimilarityMatrix, build_similarity,
                            median_bandwidth, soc_init, ted_select)
from .pareto import (ParetoArchive, adrs, dominates, nondominated_mask,
                     pareto_extract, write_adrs_csv, write_archive_csv)
from .space import (DesignPoint, DesignSpace, ParameterDef, SpaceError,
                    decode, encode, encode_many, load_space,
                    load_space_file, reindex_point, sample_uniform,
                    table1_space)
from .surrogate import (KernelParams, SurrogateState, fit,
                        log_marginal_likelihood, posterior,
                        sample_posterior)
from .tuner import RunAborted, RunConfig, RunJournal, run, run_random_baseline

__version__ = "0.1.0"

__all__ = [
    "AnalyticSocEvaluator", "BenchmarkEvaluator", "DatasetError",
    "DesignPoint", "DesignSpace", "EvaluationError", "Evaluator",
    "EvaluatorDescriptor", "FrontSample", "IcdSpace", "KernelParams",
    "ParameterDef", "ParetoArchive", "RunAborted", "RunConfig", "RunJournal",
    "SimilarityMatrix", "SpaceError", "SurrogateState", "TabularEvaluator",
    "UnknownPointError", "acquisition_value", "acquisition_values", "adrs",
    "build_similarity", "decode", "dominates", "encode", "encode_many",
    "fit", "icd", "icd_from_trials", "imoo_select", "load_space",
    "load_space_file", "load_tabular", "log_marginal_likelihood",
    "make_benchmark_space", "median_bandwidth", "medium_index",
    "nondominated_mask", "normalize_importance", "pareto_extract",
    "posterior", "prune", "reindex_point", "run", "run_random_baseline",
    "sample_front_maxima", "sample_posterior", "sample_uniform", "soc_init",
    "table1_space", "ted_select", "transform", "write_adrs_csv",
    "write_archive_csv", "write_dataset_csv",
]
