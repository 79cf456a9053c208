"""Poisson kernel of a half-space for hyperbolic Brownian motion on H^n."""

from .kernel import (
    KernelQuery,
    KernelValue,
    fourier_transform,
    kernel_euclidean,
    kernel_hn,
    poisson_kernel,
    poisson_kernel_closed,
    poisson_kernel_hankel,
    poisson_kernel_rep,
)
from .wfun import Geometry, WEvaluator, f_lambda, w, w_evaluator, w_moment
from .zeros import ZeroSet, find_zeros, zero_count

__all__ = [
    "Geometry",
    "KernelQuery",
    "KernelValue",
    "WEvaluator",
    "ZeroSet",
    "f_lambda",
    "find_zeros",
    "fourier_transform",
    "kernel_euclidean",
    "kernel_hn",
    "poisson_kernel",
    "poisson_kernel_closed",
    "poisson_kernel_hankel",
    "poisson_kernel_rep",
    "w",
    "w_evaluator",
    "w_moment",
    "zero_count",
]

__version__ = "0.1.0"
