from setuptools import setup, find_packages

setup(
    name="tompTracker",
    packages=find_packages(include=["tompTracker", "tompTracker.*"]),
    install_requires=[
        "torch>=2.0",
        "numpy",
        "opencv-python",
        "matplotlib",
        "PyYAML",
        "tqdm",
    ],
    extras_require={
        "tests": [
            "pytest>=7.0",
            "pytest-cov>=4.0",
            "pytest-mock",
            "flake8>=6.0",
            "coveralls>=3.0",
        ],
    },
    entry_points={
        "console_scripts": ["tomp-tracker=tompTracker.main:main"],
    },
    tests_require=["pytest"],
)
