from setuptools import setup, find_packages
from os import path, getcwd

setup(
    name="lexclass",
    version="0.1.0",
    license_files="LICENSE.txt",
    description="Multi-label classification of Spanish legal judgements with explainable tree ensembles.",
    long_description=open(path.join(getcwd(), "README.md")).read(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["test", "test.*"]),
    package_data={"lexclass": ["lexica/*.txt", "lexica/*.tsv"]},
    entry_points={"console_scripts": ["lexclass = lexclass.cli:cli"]},
    python_requires=">=3.8",
    install_requires=[
        "numpy >= 1.22",
        "scipy >= 1.8",
        "scikit-learn >= 1.1",
        "joblib >= 1.1",
        "jellyfish >= 0.11",
        "graphviz >= 0.20",
        "PyYAML >= 6.0",
    ],
    extras_require={
        "test": [
            "pytest >= 7.1.2",
            "hypothesis >= 6.0",
            "termcolor >= 2.0",
        ],
    },
)
