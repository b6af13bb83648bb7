"""Oriented derivative-of-stick (ODoS) enhancement toolkit.

Curvilinear-structure enhancement built on three-stick oriented templates,
plus the surrounding pipeline: orientation vector fields, multi-channel
input stacks for segmentation networks, seeded patch datasets, and
segmentation metrics.
"""

from .image import (
    CHANNEL_POLICIES,
    ImageFormatError,
    as_gray,
    as_mask,
    load_image,
    load_mask,
    normalize_minmax,
    save_image,
)
from .sticks import (
    StickKernel,
    build_kernel,
    kernel_table,
    middle_stick,
    orientation_angle,
    orientation_count,
    perpendicular_offset,
)
from .filtering import (
    ABSENT,
    FilterConfig,
    OrientationSweepResult,
    StickStats,
    cascade,
    multi_step,
    response_pair,
    stick_stats,
    sweep,
)
from .vector_field import (
    ThetaMap,
    render_vector_overlay,
    symbol_encode,
    theta_map,
    vector_components,
)
from .channels import (
    ABLATION_MODES,
    VECTOR_MODES,
    ChannelConfig,
    ablation_channel_count,
    ablation_channels,
    build_channels,
)
from .dataset import (
    PATCH_SIZE,
    AugmentParams,
    DatasetFormatError,
    PatchRecord,
    PatchSource,
    Provenance,
    augment_pair,
    draw_params,
    extract_patches,
    prepare_dataset,
    read_channels_odst,
    read_dataset,
    warp,
    write_channels_odst,
    write_dataset,
)
from .metrics import (
    ConfusionCounts,
    DatasetEvaluation,
    MetricsRecord,
    confusion,
    evaluate_dataset,
    score,
    to_csv,
    to_table,
)

__version__ = "0.1.0"
