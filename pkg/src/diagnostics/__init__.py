__all__ = [
    'RayProbeReport',
    'PointProbeReport',
    'probe_ray',
    'probe_points',
    'read_probe_csv',
    'attention_columns',
    'row_normalized',
    'run_suite',
    'end_to_end_check',
    'composite_check',
    'tiny_model_config'
]


from src.diagnostics.probes import (
    RayProbeReport,
    PointProbeReport,
    probe_ray,
    probe_points,
    read_probe_csv,
    attention_columns,
    row_normalized
)
from src.diagnostics.gradients import (
    run_suite,
    end_to_end_check,
    composite_check,
    tiny_model_config
)
