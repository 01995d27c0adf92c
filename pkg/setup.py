import os
import pathlib

from setuptools import find_packages, setup

here = pathlib.Path(os.path.dirname(os.path.abspath(__file__)))

with open(str(here / 'README.rst'), 'r') as f:
    readme = f.read()

install_requires = [
    'typing_extensions',
    'cryptography>=3.4',
    'structlog>=21.1',
    'click>=8.0,<9',
    'jsonschema>=4.0,<5',
]

setup(
    name='clearance',
    use_scm_version=dict(write_to="src/clearance/_internal/scm_version.py"),
    description='Enrollment and ticket authorization for strangers and incognito users.',
    long_description=readme,
    packages=find_packages('src'),
    package_dir={'': 'src'},
    package_data={"clearance": ["py.typed"],
                  "clearance.simnet": ["scenario.schema.json"]},
    include_dirs=["src"],
    python_requires='>=3.7,<4',
    install_requires=install_requires,
    entry_points={
        'console_scripts': ['clearance=clearance.cli:main'],
    },
    license='MIT',
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Developers',
        'Natural Language :: English',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: Implementation :: CPython',
        'Topic :: Security :: Cryptography',
    ],
    keywords='authorization capability ticket privacy',
    zip_safe=False,
)
