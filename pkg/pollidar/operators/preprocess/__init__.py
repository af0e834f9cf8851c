"""
预处理操作符

峰值分割与椭偏反演。
"""

from pollidar.operators.preprocess.slicing import SlicedCube, slice_peaks, SlicePeaksOperator
from pollidar.operators.preprocess.ellipsometry import (
    MuellerMovie, EllipsometricInverter, invert_ellipsometry, EllipsometryOperator, polarization_diagnostics,
)

__all__ = [
    'SlicedCube',
    'slice_peaks',
    'SlicePeaksOperator',
    'MuellerMovie',
    'EllipsometricInverter',
    'invert_ellipsometry',
    'EllipsometryOperator',
    'polarization_diagnostics',
]
