"""Scene-content bias characterization for local image feature detectors.

Generates transformed image databases, measures detector repeatability per
scene and transformation step, ranks scenes, and computes trait indices
quantifying detector bias toward outdoor / human-made / simple scenes.
"""

from .core import (
    DatasetManifest,
    ImageEntry,
    Keypoint,
    RepeatabilityRecord,
    SceneLabels,
    TransformSpec,
    identity_homography,
    validate_manifest,
)
from .detectors import (
    DetectorConfig,
    detect_fast_segment,
    detect_harris,
    detect_hessian_blob,
    format_keypoint_file,
    parse_keypoint_file,
    run_detector,
)
from .pipeline import detect_all, evaluate
from .ranking import (
    RateSet,
    Ranking,
    TraitIndexVector,
    build_rankings,
    collect_rate_set,
    compute_trait_indices,
    expected_record_count,
    label_balance,
    trait_index_table,
)
from .records import load_records, save_records
from .repeatability import (
    MatchParams,
    common_part,
    compute_repeatability,
    match_keypoints,
)
from .report import RadarSeries, emit_radar_svg, emit_report, emit_trait_tables
from .transforms import (
    BlurParams,
    JpegParams,
    LightParams,
    apply_gaussian_blur,
    apply_jpeg_roundtrip,
    apply_light_reduction,
    build_schedule,
    default_schedules,
    generate_database,
)

__version__ = "0.1.0"
