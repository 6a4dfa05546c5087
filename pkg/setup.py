"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (numpy fallback); a failed
compile should not block installation, so the extension build is
best-effort.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "damageseg._kernels._ckernels",
                ["src/damageseg/_kernels/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # backends promise bit-identical floats: no fused multiply-add
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
