#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
PolLidar安装脚本
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="pollidar",
    version="0.1.0",
    author="PolLidar Contributors",
    description="Polarimetric wavefront lidar simulation and reconstruction toolkit",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    package_data={
        "pollidar.optics": ["data/*.json"],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.20",
        "scipy>=1.7",
    ],
    extras_require={
        "dev": [
            "pytest>=6.0",
            "black",
            "flake8",
            "pytest-cov",
        ],
    },
    entry_points={
        "console_scripts": [
            "pollidar=pollidar.cli:main",
        ],
    },
)
