from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off keeps the compiled kernel bitwise identical to the
# pure-Python mirror (no fused multiply-add).  -fno-builtin-sin/-cos stop
# gcc from fusing sin/cos pairs into glibc sincos, which rounds differently
# by one ulp for some inputs.  Do not add -ffast-math or -march=native for
# the same reason.
extensions = [
    Extension(
        "safeblend._fastcore",
        ["src/safeblend/_fastcore.pyx"],
        extra_compile_args=[
            "-O3",
            "-ffp-contract=off",
            "-fno-builtin-sin",
            "-fno-builtin-cos",
        ],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
