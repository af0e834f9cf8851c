"""
光学模块

Stokes–Mueller代数、材质与时间-偏振反射模型。
"""

from pollidar.optics.materials import Material, MaterialDB
from pollidar.optics.pbrdf import SurfaceInteraction, TemporalMueller, reflectance

__all__ = [
    'Material',
    'MaterialDB',
    'SurfaceInteraction',
    'TemporalMueller',
    'reflectance',
]
