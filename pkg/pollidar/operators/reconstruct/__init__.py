"""
重建操作符

飞行时间测距、SfP、点云PCA与逐像素模型拟合，以及特征张量导出。
"""

from pollidar.operators.reconstruct.maps import DistanceEstimate, NormalEstimate, ReconMaps
from pollidar.operators.reconstruct.tof import tof_distance, parabolic_offset, ToFOperator
from pollidar.operators.reconstruct.sfp import sfp_dop_normals, invert_dop, SfPOperator
from pollidar.operators.reconstruct.pca import (
    PointCloud, unproject, pca_normals, pca_from_distance, PCAOperator,
)
from pollidar.operators.reconstruct.modelfit import (
    ModelFitSettings, NormalMaterialFit, modelfit_normals, ModelFitOperator,
)
from pollidar.operators.reconstruct.features import FEATURE_MODES, export_features, feature_channels

__all__ = [
    'DistanceEstimate',
    'NormalEstimate',
    'ReconMaps',
    'tof_distance',
    'parabolic_offset',
    'ToFOperator',
    'sfp_dop_normals',
    'invert_dop',
    'SfPOperator',
    'PointCloud',
    'unproject',
    'pca_normals',
    'pca_from_distance',
    'PCAOperator',
    'ModelFitSettings',
    'NormalMaterialFit',
    'modelfit_normals',
    'ModelFitOperator',
    'FEATURE_MODES',
    'export_features',
    'feature_channels',
]
