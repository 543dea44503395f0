"""Compositional image degradation: simulation, estimation, restoration."""

from .attrs import constant_map, decode_attrs, encode_spec, image_to_map, map_rmse, map_to_image
from .degrade import DegradationSpec, apply_awgn, apply_blur, apply_jpeg, degrade, gaussian_kernel, quantize_8bit
from .evaluation import blind_restore, eval_estimator_grid, eval_restoration_grid, psnr
from .networks import (
    NetworkWeights,
    estimation_arch,
    forward_estimate,
    forward_restore,
    init_network,
    load_weights,
    restoration_arch,
    save_weights,
)
from .training import TrainingConfig, load_dataset, train

__version__ = "0.1.0"
