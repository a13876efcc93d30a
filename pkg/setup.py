"""
Setup script for the polymerdyn package.
"""

from setuptools import find_packages, setup

setup(
    name="polymerdyn",
    version="0.1.0",
    description=(
        "Polymer dynamics sampling and approximate counting for the "
        "low-temperature ferromagnetic Potts model on expanders"
    ),
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    author="polymerdyn developers",
    author_email="user@example.com",
    packages=find_packages(exclude=["tests", "examples*"]),
    install_requires=[
        "numpy>=1.22.0",
        "scipy>=1.8.0",
        "loguru>=0.7.0",
        "pydantic>=2.0.0",
        "typing-extensions>=4.0.0",
    ],
    extras_require={
        "dev": ["pytest>=7.0.0", "networkx>=2.8", "black>=23.0.0", "isort>=5.0.0"],
    },
    entry_points={
        "console_scripts": [
            "polymerdyn=polymerdyn.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
)
