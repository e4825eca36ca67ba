__author__ = "dpsurv developers"
__copyright__ = "Copyright 2024, dpsurv developers"
__credits__ = []
__license__ = ""
__version__ = "0.1.0"
__api_version__ = "1"
__maintainer__ = "dpsurv developers"
__email__ = ""
__status__ = "Dev"

from pathlib import Path

from setuptools import find_packages, setup


def _requirements(name):
    lines = (Path(__file__).parent / "requirements" / name).read_text().splitlines()
    return [line for line in lines if line and not line.startswith(("-r", "#"))]


setup(
    name="dpsurv",
    version=__version__,
    description="Differentially private Cox regression: perturbation and utility",
    packages=find_packages(exclude=("tests", "tests.*")),
    python_requires=">=3.8",
    install_requires=_requirements("base.txt"),
    entry_points={"console_scripts": ["dpsurv=dpsurv.cli:main"]},
)
