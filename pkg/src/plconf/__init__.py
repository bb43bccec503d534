"""Exact arithmetic for Thompson-like groups F_n and their confining subsets."""
from importlib import metadata as _metadata

from .confining import Budget, Verdict, axiom_check, compare, largest_element_witness
from .families import format_family, member, parse_family
from .lamplighter import lamp_axiom_check, lamp_compare, lamp_member, parse_lamp_family
from .plmap import PLMap, chi0, chi1, compose, evaluate, fixed_set, identity, invert, standard_generators
from .treesim import busemann_estimate, isometry_type, tree_distance

try:
    __version__ = _metadata.version("artifact")
except _metadata.PackageNotFoundError:
    __version__ = "0+unknown"

__all__ = [
    "Budget", "PLMap", "Verdict", "axiom_check", "busemann_estimate", "chi0", "chi1", "compare",
    "compose", "evaluate", "fixed_set", "format_family", "identity", "invert", "isometry_type",
    "lamp_axiom_check", "lamp_compare", "lamp_member", "largest_element_witness", "member",
    "parse_family", "parse_lamp_family", "standard_generators", "tree_distance",
]
