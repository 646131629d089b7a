from setuptools import setup, find_packages

cmdclass = {}

try:
    from sphinx.setup_command import BuildDoc
    cmdclass['build_sphinx'] = BuildDoc
except ImportError:
    pass

def readme():
    with open('README.rst') as f:
        return f.read()

version = "0.1.0"

setup(
    name="smoothstep",
    version=version,
    description="parameter-free step sizes for projected SGD with smooth losses",
    long_description=readme(),
    author="The smoothstep authors",
    license="Apache 2",
    packages=find_packages(),
    include_package_data=True,
    cmdclass=cmdclass,
    zip_safe=False,
    python_requires='>=3.6',
    install_requires=['numpy>=1.17', 'scipy'],
    tests_require=['nose'],
    command_options={
        'build_sphinx': {
            'version': ('setup.py', version),
            'release': ('setup.py', version),
        },
    },

    entry_points={
        "console_scripts": [
            "smoothstep = smoothstep.cli:main"
        ]
    },
    classifiers=[
          'Programming Language :: Python :: 3.6',
          'Programming Language :: Python :: 3.7',
          'Programming Language :: Python :: 3.8',
    ]
)
