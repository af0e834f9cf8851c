"""
操作符模块

按处理阶段组织：simulate（渲染与噪声）、preprocess（分割与椭偏反演）、
reconstruct（几何恢复）、material（材质估计）、evaluate（评估）。
"""

from pollidar.operators import simulate, preprocess, reconstruct, material, evaluate

__all__ = ['simulate', 'preprocess', 'reconstruct', 'material', 'evaluate']
