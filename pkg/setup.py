import pathlib
from setuptools import setup, find_packages

here = pathlib.Path(__file__).parent.resolve()

# Get the long description from the README file
long_description = (here / "README.md").read_text(encoding="utf-8")

# Get the version without importing the package
version = {}
exec((here / "ssmseg" / "_version.py").read_text(encoding="utf-8"), version)

setup(
    name="ssmseg",
    version=version["__version__"],
    description="Two-pass BIC self-similarity segmentation of broadcast news audio",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="Apache-2.0",
    packages=find_packages(exclude=["examples", "examples.*"]),
    install_requires=["numpy>=1.21", "scipy>=1.7", "cloudpickle"],
    extras_require={
        # can be installed by pip install ssmseg[test]
        "test": ["pytest"],
    },
    entry_points={"console_scripts": ["ssmseg=ssmseg.cli:main"]},
    python_requires=">=3.8",
)
