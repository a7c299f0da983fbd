from setuptools import find_packages, setup

setup(
    name="eos-lab",
    version="0.1.0",
    description="Multi-channel electro-optic sampling statistics, post-measurement states and reconstruction",
    packages=find_packages(include=["app", "app.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.22.4,<2.0.0",
        "scipy>=1.10.0,<2.0.0",
        "pandas>=2.0.0,<3.0.0",
        "matplotlib>=3.5.0",
        "seaborn>=0.12.0",
        "pydantic>=2.0,<3.0",
        "PyYAML>=6.0",
        "python-dotenv>=1.0.0",
        "python-json-logger>=2.0.7",
        "click>=8.1",
        "tqdm>=4.60",
        "cachetools>=5.3.1",
    ],
    extras_require={"dev": ["pytest>=8.0", "pytest-cov>=4.1.0", "black>=23.3.0", "isort>=5.12.0", "mypy>=1.4.1"]},
    entry_points={"console_scripts": ["eos-lab=app.cli.main:main"]},
)
