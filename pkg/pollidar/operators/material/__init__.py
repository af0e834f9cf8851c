"""
材质估计操作符
"""

from pollidar.operators.material.fit import (
    MaterialFitConfig, MaterialMaps, FixedNormalFit, estimate_materials, measured_diffuse_dop,
    specular_gain, perturb_normals, normal_noise_sweep, MaterialFitOperator,
)

__all__ = [
    'MaterialFitConfig',
    'MaterialMaps',
    'FixedNormalFit',
    'estimate_materials',
    'measured_diffuse_dop',
    'specular_gain',
    'perturb_normals',
    'normal_noise_sweep',
    'MaterialFitOperator',
]
