"""Black-box backdoor scanner built on decision-boundary maps.

A scan probes a hard-label classifier on the 2D plane spanned by each of N
sample triplets, rasterizes the predicted labels into an S x S map, and
averages two area statistics over the maps: the order-alpha entropy of the
per-class area distribution and the plane fraction still owned by the
triplet's own labels. Backdoored models concentrate area on the attack
target, so low values flag compromise; verdicts compare the mean metric
against a calibrated threshold.

Typical use::

    from boundaryscan import ScanParams, load_oracle, scan
    from boundaryscan.mxt import load_pool

    oracle = load_oracle({"kind": "synthetic-backdoor", "seed": 7,
                          "n_classes": 10, "d": 3072,
                          "target": 3, "strength": 0.8})
    report = scan(oracle, load_pool("pool_dir"), ScanParams(),
                  threshold_re=0.873)
    print(report.verdict_re, report.target_label)

The ``boundaryscan`` console script exposes the same pipeline as the
scan/calibrate/evaluate/synth subcommands.
"""

from .boundary import (
    BoundaryMap,
    default_palette,
    label_distribution,
    plot_boundary,
    plot_filename,
    render_image,
)
from .detector import (
    CalibrationResult,
    DetectionReport,
    ScanParams,
    auroc,
    calibrate_threshold,
    evaluate_zoo,
    identify_target,
    sample_triplets,
    scan,
    verdict,
)
from .errors import (
    BackendUnavailable,
    ConfigError,
    DegenerateTriplet,
    EmptyInput,
    InconsistentParams,
    InsufficientSamples,
    InvalidAlpha,
    InvalidDensity,
    InvalidEta,
    InvalidParams,
    InvalidT,
    ManifestError,
    PaletteTooSmall,
    ScanError,
    ShapeMismatch,
    SingleClassInput,
    TransportError,
)
from .geometry import (
    PlaneBasis,
    PlotBounds,
    ProbeGrid,
    SampleTriplet,
    embed_point,
    embed_points,
    make_bounds,
    make_grid,
    span_plane,
)
from .metrics import (
    AggregateMetrics,
    PlotMetrics,
    aggregate,
    ats,
    plot_metrics,
    renyi_entropy,
)
from .mxt import load_pool, read_tensor, save_pool, write_tensor
from .oracle import (
    CachedOracle,
    Oracle,
    RemoteOracle,
    SerializedOracle,
    TabulatedOracle,
    content_hash64,
    load_oracle,
    predict_batch,
)
from .synthlab import (
    BackdoorOracle,
    BackdoorSpec,
    CentroidModel,
    CentroidOracle,
    SamplePool,
    gen_backdoor_oracle,
    gen_clean_oracle,
    gen_pool,
    gen_zoo,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateMetrics",
    "BackdoorOracle",
    "BackdoorSpec",
    "BackendUnavailable",
    "BoundaryMap",
    "CachedOracle",
    "CalibrationResult",
    "CentroidModel",
    "CentroidOracle",
    "ConfigError",
    "DegenerateTriplet",
    "DetectionReport",
    "EmptyInput",
    "InconsistentParams",
    "InsufficientSamples",
    "InvalidAlpha",
    "InvalidDensity",
    "InvalidEta",
    "InvalidParams",
    "InvalidT",
    "ManifestError",
    "Oracle",
    "PaletteTooSmall",
    "PlaneBasis",
    "PlotBounds",
    "PlotMetrics",
    "ProbeGrid",
    "RemoteOracle",
    "SamplePool",
    "SampleTriplet",
    "ScanError",
    "ScanParams",
    "SerializedOracle",
    "ShapeMismatch",
    "SingleClassInput",
    "TabulatedOracle",
    "TransportError",
    "aggregate",
    "ats",
    "auroc",
    "calibrate_threshold",
    "content_hash64",
    "default_palette",
    "embed_point",
    "embed_points",
    "evaluate_zoo",
    "gen_backdoor_oracle",
    "gen_clean_oracle",
    "gen_pool",
    "gen_zoo",
    "identify_target",
    "label_distribution",
    "load_oracle",
    "load_pool",
    "make_bounds",
    "make_grid",
    "plot_boundary",
    "plot_filename",
    "plot_metrics",
    "predict_batch",
    "read_tensor",
    "render_image",
    "renyi_entropy",
    "sample_triplets",
    "save_pool",
    "scan",
    "span_plane",
    "verdict",
    "write_tensor",
]
