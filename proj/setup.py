# Builds the extension straight from the C++ sources so a wheel needs only a
# compiler and pybind11; the cmake tree builds the same module for ctest.
from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "meanrev._meanrev",
    sources=[
        "bindings/module.cpp",
        "src/dist.cpp",
        "src/calibrate.cpp",
        "src/simulate.cpp",
        "src/backtest.cpp",
        "src/io.cpp",
        "src/cli.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
