from .model_iface import DifferentiableModel, TorchModel
from .methods import (
    CAM_METHODS,
    Heatmap,
    compute_cam,
    gradcam,
    gradcam_pp,
    scorecam,
)
from .overlay import explain_grid, overlay, save_grid

__all__ = [
    "CAM_METHODS",
    "DifferentiableModel",
    "Heatmap",
    "TorchModel",
    "compute_cam",
    "explain_grid",
    "gradcam",
    "gradcam_pp",
    "overlay",
    "save_grid",
    "scorecam",
]
