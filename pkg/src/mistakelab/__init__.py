"""mistakelab: a simulation lab for the randomness of prediction mistakes.

Markov learners of varying order predict bits of Markov-generated test
sequences.  The lab measures the randomness signature of their mistake
subsequences (compression-estimated complexity, divergence from a memoryless
coin) together with the information density of each learner's decision rule,
sweeps the learner parameters, and renders the resulting surfaces.
"""

from .compressors import (
    ComplexityEstimate,
    CompressorKind,
    entropy_bound,
    estimate_complexity,
    lz_compress,
    lz_decompress,
    sys_ratio,
)
from .harness import (
    KAggregate,
    RunConfig,
    RunRecord,
    SurfaceGrid,
    aggregate_by_k,
    build_surface,
    read_records_csv,
    regress_quadratic,
    run_once,
    sweep,
    write_records_csv,
)
from .markov import (
    DecisionVector,
    PredictionOutcome,
    TrainedModel,
    TransitionTable,
    bayes_predictor,
    generate,
    half_split_source,
    predict,
    train,
)
from .metrics import (
    WordDistribution,
    bernoulli_word_dist,
    empirical_word_dist,
    frequency_deviation,
    kl_divergence,
    pearson,
    skewness_kurtosis,
)
from .ppm import PpmDecodeError, ppm_compress, ppm_decompress
from .sequences import encode_ascii, decode_ascii, random_bernoulli

__version__ = "0.1.0"
