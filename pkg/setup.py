import os
from setuptools import setup, find_packages


cwd = os.path.dirname(os.path.abspath(__file__))

with open(os.path.join(cwd, 'requirements.txt')) as f:
    reqs = [r for r in f.read().splitlines() if r and not r.startswith('pytest')]

setup(
    name='posbasis',
    version='0.1.0',
    py_modules=[
        'api',
        'basis_io',
        'construct',
        'cosine',
        'exceptions',
        'main',
        'matkernel',
        'spanning',
        'utils',
    ],
    packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    include_package_data=True,
    install_requires=reqs,
    extras_require={'test': ['pytest']},
    data_files=[('configs', ['configs/config.json'])],
    entry_points={
        'console_scripts': ['posbasis=main:cli'],
    },
)
