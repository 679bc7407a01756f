"""
Setup script for the revival_gravimetry package.
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="revival-gravimetry",
    version="1.0.0",
    description="Quantum Fisher information and sensitivity of a qubit-nanomechanical gravimeter",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"revival_gravimetry": ["configs/*.toml"]},
    install_requires=[
        "numpy>=1.21",
        "scipy>=1.8",
        "qutip>=4.7",
        "tomli>=1.1; python_version < '3.11'",
    ],
    extras_require={
        "test": ["hypothesis>=6.0"],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.9",
    entry_points={
        "console_scripts": [
            "revival-gravimetry=revival_gravimetry.cli:main",
        ],
    },
)
