__all__ = [
    'BOX_MIN',
    'BOX_MAX',
    'look_at',
    'Camera',
    'Ray',
    'RayBatch',
    'box_intersect',
    'generate_rays',
    'rays_from_poses',
    'OccupancyGrid',
    'update_occupancy',
    'sample_distances',
    'sample_deltas',
    'sample_points',
    'sample_along',
    'keep_mask',
    'SampleSet',
    'composite',
    'composite_rays',
    'compositing_weights',
    'RenderResult',
    'render_rays',
    'render_image',
    'write_png',
    'read_png',
    'write_raw',
    'read_raw',
    'to_uint8'
]


from src.renderer.rays import (
    BOX_MIN,
    BOX_MAX,
    look_at,
    Camera,
    Ray,
    RayBatch,
    box_intersect,
    generate_rays,
    rays_from_poses
)
from src.renderer.occupancy import OccupancyGrid, update_occupancy
from src.renderer.sampling import (
    sample_distances,
    sample_deltas,
    sample_points,
    sample_along,
    keep_mask
)
from src.renderer.composite import (
    SampleSet,
    composite,
    composite_rays,
    compositing_weights
)
from src.renderer.render import RenderResult, render_rays, render_image
from src.renderer.images import (
    write_png,
    read_png,
    write_raw,
    read_raw,
    to_uint8
)
