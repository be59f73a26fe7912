import re

import setuptools

with open('edgect/__init__.py', 'r') as f:
    version = re.search(r"^version = '(.*)'", f.read(), re.M).group(1)
version = version.rsplit(' ', maxsplit=1)[-1]

with open('requirements.txt', 'r') as f:
    requirements = f.read().splitlines()

setuptools.setup(
    name='edgect',
    version=version,
    scripts=['edgect_run'],
    python_requires='>=3.8',
    install_requires=requirements,
    extras_require={
        'uvloop': ['uvloop>=0.17'],
    },
    packages=setuptools.find_packages(include=('edgect*',)),
    description='Edge-masked l2 CT reconstruction',
    license='MIT Licence',
    long_description='Sparse-view CT reconstruction with edge-masked l2 '
    'regularization, with filtered back projection and TV Split Bregman '
    'baselines',
    classifiers=[
        'Development Status :: 4 - Beta',
        'Framework :: AsyncIO',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        "Programming Language :: Python :: 3.8",
        'Topic :: Scientific/Engineering :: Image Processing',
        'Topic :: Scientific/Engineering :: Medical Science Apps.',
    ],
)
