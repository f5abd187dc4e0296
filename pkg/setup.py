# Always prefer setuptools over distutils
# To use a consistent encoding
from codecs import open
from os import path

from setuptools import find_packages, setup

here = path.abspath(path.dirname(__file__))

# Get the long description from the README file
with open(path.join(here, "README.md"), encoding="utf-8") as f:
    long_description = f.read()

extras = {
    "tests": [
        "black>=22.3.0",
        "flake8>=5.0.0",
        "hypothesis>=6.0.0",
        "isort>=5.10.1",
        "mypy>=0.782",
        "pycln>=2.1.6",
        "pydocstyle>=6.3.0",
        "pytest>=6.0.2",
        "pytest-cov>=2.10.1",
        "pytest-xdist>=2.1.0",
    ],
    "docs": ["sphinx", "sphinx-markdown-builder"],
}

extras["all"] = extras["tests"] + extras["docs"]

setup(
    name="latticeqm",
    # Versions should comply with PEP440.  For a discussion on single-sourcing
    # the version across setup.py and the project code, see
    # https://packaging.python.org/en/latest/single_source_version.html
    version="0.1.0",
    description="Lattice amplitude simulator and consistency verification suite",
    long_description=long_description,
    long_description_content_type="text/markdown",
    # Choose your license
    license="MIT",
    # See https://pypi.python.org/pypi?%3Aaction=list_classifiers
    classifiers=[
        # How mature is this project? Common values are
        #   3 - Alpha
        #   4 - Beta
        #   5 - Production/Stable
        "Development Status :: 3 - Alpha",
        # Indicate who your project is intended for
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        # Pick your license as you wish (should match "license" above)
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    # What does your project relate to?
    keywords="quantum amplitudes lattice path integral born rule functional equations",
    # You can just specify the packages manually here if your project is
    # simple. Or you can use find_packages().
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.9",
    # List run-time dependencies here.  These will be installed by pip when
    # your project is installed. For an analysis of "install_requires" vs pip's
    # requirements files see:
    # https://packaging.python.org/en/latest/requirements.html
    install_requires=[
        "numpy>=1.22.4",
        "pandas>= 1.0.3",
        "polars>=0.18.0",
        "tqdm>=4.50.0",
        "pyarrow>=8.0.0",
        "scipy>=1.12.0",
        "attrs>=22.2.0",
    ],
    # List additional groups of dependencies here (e.g. development
    # dependencies). You can install these using the following syntax,
    # for example:
    # $ pip install -e .[dev,test]
    extras_require=extras,
    include_package_data=True,
    # To provide executable scripts, use entry points in preference to the
    # "scripts" keyword. Entry points provide cross-platform support and allow
    # pip to create the appropriate form of executable for the target platform.
    entry_points={
        "console_scripts": [
            "latticeqm=latticeqm.cli:main",
        ],
    },
)
