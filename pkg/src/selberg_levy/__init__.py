"""Infinitely divisible laws attached to Selberg-class L-functions."""

from .levy import LevyTriplet, build_triplet, char_fn, classify, g_eval, instance_triplet
from .lfunc import INSTANCE_NAMES, SelbergData, get_instance, product, xi_eval
from .zeros import ZeroList, central_multiplicity, find_zeros, instance_zeros

__all__ = [
    "INSTANCE_NAMES",
    "LevyTriplet",
    "SelbergData",
    "ZeroList",
    "build_triplet",
    "central_multiplicity",
    "char_fn",
    "classify",
    "find_zeros",
    "g_eval",
    "get_instance",
    "instance_triplet",
    "instance_zeros",
    "product",
    "xi_eval",
]
