from setuptools import find_packages, setup

setup(
    name="thadc",
    version="0.1.0",
    description="Static checker and ghost-code annotator for temporal HAL-API dependencies",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    py_modules=["config", "errors"],
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Developers",
        "Topic :: Software Development :: Quality Assurance",
        "Programming Language :: Python :: 3.10",
    ],
    python_requires=">=3.10",
    install_requires=[
        "pandas>=2.1.0",
        "numpy>=1.24.3",
        "pycparser>=2.21",
        "networkx>=3.1",
        "jsonschema>=4.19.0",
        "joblib>=1.3.2",
        "matplotlib>=3.7.2",
        "seaborn>=0.12.2",
    ],
    entry_points={"console_scripts": ["thadc=cli.main:main"]},
)
