"""Haar-wavelet and selective-scan fusion of RGB/infrared feature maps."""

from .analysis import compare_strategies, entropy_report, normalized_entropy
from .errors import ConfigError, DataError, ShapeError, WaveFuseError
from .fusion import FusedLevel, WmfbWeights, channel_swap, dfm, dfm_directional, hfe, init_wmfb_weights, sfm, wmfb
from .pipeline import PipelineConfig, backbone_forward, head_forward, init_wave_weights, plan_pipeline, wave_forward
from .ssm import ScanParams, VssWeights, selective_scan, ss2d, vss_block
from .wavelet import Details, SubBands, dwt2_haar, dwt2_multilevel, feature_map, idwt2_haar, idwt2_multilevel

__version__ = "0.1.0"
