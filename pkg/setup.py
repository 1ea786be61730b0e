from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "dyckmoments._kernels._core",
                ["src/dyckmoments/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

# The compiled kernels are optional: the package falls back to the
# numpy implementation when the extension is missing.
for ext in extensions:
    ext.optional = True

setup(ext_modules=extensions)
