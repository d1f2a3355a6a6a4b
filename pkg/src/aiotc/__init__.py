"""aiotc: arithmetic-coding compression for grayscale image data.

Four pipelines over one coder: lossless standard coding, PCA score coding,
intensity-cardinality reduction, and probability rounding/sorting/grouping.
Artifacts serialize to the bit-exact .aiot container; the bench harness
reproduces compression ratio, timing, iteration, RMSE, CPU and memory
measurements.
"""

from .coder import (
    BACKEND_EXACT,
    BACKEND_RENORM64,
    Codeword,
    decode,
    encode,
    encode_step,
    finish_state,
    initial_state,
    select_codeword,
)
from .container import CompressedArtifact, deserialize, serialize
from .errors import AiotcError
from .images import (
    GrayImage,
    SymbolSequence,
    flatten,
    load_pgm,
    serialize_pgm,
    to_grayscale,
    unflatten,
)
from .metrics import RunMetrics, compression_ratio, format_ratio, rmse, timed
from .models import (
    GroupedModel,
    ProbabilityModel,
    QuantizerSpec,
    build_model,
    cumulative_of,
    dequantize,
    group_similar,
    quantize,
    round_probabilities,
    sort_descending,
)
from .pca import fit_project, quantize_scores, reconstruct
from .pipelines import (
    IterationTrace,
    PipelineConfig,
    check_stop,
    decompress,
    run,
    run_cardinality,
    run_optimized,
    run_pca,
    run_standard,
)

__version__ = "0.1.0"

__all__ = [
    "AiotcError",
    "BACKEND_EXACT",
    "BACKEND_RENORM64",
    "Codeword",
    "CompressedArtifact",
    "GrayImage",
    "GroupedModel",
    "IterationTrace",
    "PipelineConfig",
    "ProbabilityModel",
    "QuantizerSpec",
    "RunMetrics",
    "SymbolSequence",
    "build_model",
    "check_stop",
    "compression_ratio",
    "cumulative_of",
    "decode",
    "decompress",
    "dequantize",
    "deserialize",
    "encode",
    "encode_step",
    "finish_state",
    "fit_project",
    "flatten",
    "format_ratio",
    "group_similar",
    "initial_state",
    "load_pgm",
    "quantize",
    "quantize_scores",
    "reconstruct",
    "rmse",
    "round_probabilities",
    "run",
    "run_cardinality",
    "run_optimized",
    "run_pca",
    "run_standard",
    "select_codeword",
    "serialize",
    "serialize_pgm",
    "sort_descending",
    "timed",
    "to_grayscale",
    "unflatten",
    "__version__",
]
