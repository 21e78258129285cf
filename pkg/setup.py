#!/usr/bin/env python3

from setuptools import setup

setup(
    name="compcell",
    version="0.1.0",
    description="CoMP-cell selection and OFDMA resource allocation for C-RAN.",
    long_description=open("README.md", "r").read(),
    long_description_content_type="text/markdown",
    packages=["compcell", "compcell.tests"],
    package_data={"compcell.tests": ["data/*.cnf"]},
    install_requires=["numpy", "pandas", "parsimonious"],
    entry_points={"console_scripts": ["compcell = compcell.cli:main"]},
    python_requires=">=3.8",
    platforms="any",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "License :: OSI Approved :: Apache Software License",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
    ],
    zip_safe=False,
)
