from setuptools import setup

setup(setup_requires=["pbr"], pbr=True, python_requires=">=3.10")
