"""
PolLidar IO组件

场景JSON、波前立方体（PWF1）、Mueller电影（PMM1）、特征张量（PFX1）与PFM栅格的读写。
"""

from pollidar.io.loader import (
    load_scene, load_cube, load_mueller, load_features, load_raster, load_scene_maps, load_recon, read_json,
)
from pollidar.io.saver import (
    save_cube, create_cube_file, finish_cube_file, save_mueller, save_features, save_raster,
    save_scene_maps, save_recon, save_material_maps, save_metrics, save_scene, write_json,
)

__all__ = [
    'load_scene',
    'load_cube',
    'load_mueller',
    'load_features',
    'load_raster',
    'load_scene_maps',
    'load_recon',
    'read_json',
    'save_cube',
    'create_cube_file',
    'finish_cube_file',
    'save_mueller',
    'save_features',
    'save_raster',
    'save_scene_maps',
    'save_recon',
    'save_material_maps',
    'save_metrics',
    'save_scene',
    'write_json',
]
