"""
Setup script for the nlflux toolkit.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read README for long description
readme_file = Path(__file__).parent / 'README.md'
long_description = readme_file.read_text(encoding='utf-8') if readme_file.exists() else ''

setup(
    name='nlflux',
    version='1.0.0',
    description='Solvers and verification tools for the 1-D nonlocal flux equation with fractional diffusion',
    long_description=long_description,
    long_description_content_type='text/markdown',
    author='Exergy ∞ LLC',
    author_email='',
    packages=find_packages(exclude=['nlflux.tests', 'nlflux.tests.*']),
    python_requires='>=3.10',
    install_requires=[
        'click>=8.1.0',          # CLI framework
        'ruamel.yaml>=0.18.0',   # Config parsing with line numbers
        'rich>=13.0.0',          # Terminal output and log handler
        'pyyaml>=6.0.2',         # Reading metadata sidecars back
        'numpy>=1.26.0',         # Grids, FFTs, particle noise
        'scipy>=1.13.0',         # Root finding, quadrature, convolution
        'jsonschema>=4.0.0',     # Config schema validation
    ],
    extras_require={
        'test': ['pytest>=8.0.0'],
    },
    entry_points={
        'console_scripts': [
            'nlflux=nlflux.__main__:cli',
        ],
    },
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Programming Language :: Python :: 3.13',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Scientific/Engineering :: Physics',
    ],
    keywords='pde fractional-diffusion spectral-methods hilbert-transform dyson-brownian-motion',
)
