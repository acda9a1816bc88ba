"""
Run `pip3 install .` in the borel_claims directory to install this project as a
module and the `borel-claims` script.
"""

from setuptools import find_packages, setup

setup(
    name="borel_claims",
    description="Compound claim-number laws with Borel summands: tables, Panjer "
    "recursions, sampling and brute-force verification",
    version="0.0.1",
    packages=find_packages(exclude=["examples", "examples.*"]),
    package_data={"borel_claims": ["parameters/*.cfg"]},
    setup_requires=["setuptools>40"],
    install_requires=["absl-py", "numpy>=1.17", "scipy>=1.4"],
    extras_require={"test": ["hypothesis", "pytest"]},
    entry_points={
        "console_scripts": ["borel-claims=borel_claims.scripts.run_borel_claims:run"]
    },
)
