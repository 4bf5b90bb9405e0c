"""rfmap: synthetic 2D multipath radio simulation and map reconstruction."""

from .geometry import (
    Point2,
    PolygonSet,
    Ray,
    Segment,
    SimplePolygon,
    axis_aligned_rectangle,
    ray_ray_intersection,
    reflect_point_across_line,
    segment_intersects_polygon_interior,
)
from .grids import BinaryMap, GridSpec
from .scene import GenParams, Scene, generate_scene, rasterize_scene, validate_scene
from .raytracer import (
    C_LIGHT,
    PathDescriptor,
    PathTruth,
    RadioLink,
    TraceConfig,
    trace_pair,
    trace_scene,
)
from .encoder import (
    ChannelLabel,
    RayImageTensor,
    combine_max_per_bs,
    encode_link_features,
    encode_pair,
    encode_scene_pair_tensor,
    encode_scene_tensor,
    mask_channels,
    rasterize_path_ray,
    subsample_links,
)
from .reconstructor import (
    EvidencePoint,
    ReconConfig,
    ReconInputs,
    classify_los,
    estimate_single_bounce,
    recon_inputs,
    reconstruct,
)
from .metrics import (
    BoundaryPointSet,
    EvalReport,
    chamfer,
    evaluate_maps,
    extract_boundary,
    hausdorff,
    iou,
    precision_recall,
    render_overlay,
)
from .dataset import DatasetManifest, build_dataset, load_manifest, load_scene_bundle

__version__ = "0.1.0"
