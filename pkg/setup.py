from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "normsup._kernels",
                ["src/normsup/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Without Cython the package still installs; normsup.engine falls back
    # to the pure-Python kernels at import time.
    extensions = []

setup(ext_modules=extensions)
