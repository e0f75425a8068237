#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""The setup script."""

from setuptools import setup, find_packages

with open('README.rst') as readme_file:
    readme = readme_file.read()

with open('HISTORY.rst') as history_file:
    history = history_file.read()

requirements = ['Click>=8.1.6', 'click_log>=0.4.0', 'pycryptodome>=3.18.0', 'numpy>=1.20', 'scipy>=1.7']
setup_requirements = []
test_requirements = ['pytest', 'tox', 'python-coveralls', 'flake8']

PROJECT_URLS = {
    "Bug Reports": "https://github.com/sarusani/pymaui/issues/",
}

setup(
    author="Sarusani",
    author_email='sarusani@gmail.com',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Topic :: Scientific/Engineering :: Information Analysis'
    ],
    description="Misattribution fairness and centroid geometry for "
                "embed-and-rank authorship attribution.",
    entry_points={
        'console_scripts': [
            'pymaui=pymaui.cli:cli',
        ],
    },
    install_requires=requirements,
    license="MIT license",
    long_description=readme + '\n\n' + history,
    include_package_data=True,
    keywords='pymaui, authorship attribution, fairness, embeddings',
    name='pymaui',
    packages=find_packages(include=['pymaui']),
    python_requires='>=3.8',
    setup_requires=setup_requirements,
    test_suite='tests',
    tests_require=test_requirements,
    url='https://github.com/sarusani/pymaui',
    project_urls=PROJECT_URLS,
    version='0.1.0',
    zip_safe=False,
)
