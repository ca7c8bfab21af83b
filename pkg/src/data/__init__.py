__all__ = [
    'DynamicDataset',
    'Frame',
    'SceneNormalization',
    'SPLITS',
    'load_dnerf',
    'write_dnerf',
    'composite_rgba',
    'estimate_normalization',
    'Primitive',
    'SyntheticSceneSpec',
    'SyntheticScene',
    'PRESETS',
    'get_preset',
    'closed_form_colors',
    'render_synthetic',
    'make_synthetic_dataset',
    'psnr',
    'psnr_float',
    'psnr_from_mse',
    'ssim',
    'ms_ssim',
    'ms_ssim_min_size'
]


from src.data.dataset import (
    DynamicDataset,
    Frame,
    SceneNormalization,
    SPLITS,
    load_dnerf,
    write_dnerf,
    composite_rgba,
    estimate_normalization
)
from src.data.synthetic import (
    Primitive,
    SyntheticSceneSpec,
    SyntheticScene,
    PRESETS,
    get_preset,
    closed_form_colors,
    render_synthetic,
    make_synthetic_dataset
)
from src.data.metrics import (
    psnr,
    psnr_float,
    psnr_from_mse,
    ssim,
    ms_ssim,
    ms_ssim_min_size
)
