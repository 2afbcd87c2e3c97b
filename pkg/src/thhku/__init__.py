"""Exact-arithmetic Bockstein spectral sequences for THH of connective K-theory.

The package computes, entirely over ``Z`` localized at an odd prime, the
chain of Bockstein-style spectral sequences that assemble the topological
Hochschild homology of the p-local connective complex K-theory spectrum from
its mod-(p, v1) input: named E^1 pages with their differential rule families,
closed-form presentations of the target homotopy groups, a small filtered
chain-complex engine with truncation and gathering functors, periodic
resolution homology for the Tor-algebra inputs, and a CLI that renders the
torsion diagrams.
"""

from .bockstein_thh import (
    PAGE_IDS,
    SUPPORTED_PRIMES,
    build_e1,
    differential_graph,
    presentation_thh_ku,
    presentation_thh_ku_modv1,
    presentation_thh_l,
    run_named,
    torsion_block,
    verify_consistency,
)
from .graded_core import GradedGroup, GroupInvariants
from .resolutions import periodic_resolution_homology, resolution_spec, tor_closed_form
from .ss_engine import (
    FilteredComplex,
    einfty_oracle,
    gather,
    ss_pages,
    transfer_check,
    truncate,
)

__all__ = [
    "PAGE_IDS",
    "SUPPORTED_PRIMES",
    "build_e1",
    "run_named",
    "differential_graph",
    "torsion_block",
    "verify_consistency",
    "presentation_thh_l",
    "presentation_thh_ku_modv1",
    "presentation_thh_ku",
    "GradedGroup",
    "GroupInvariants",
    "FilteredComplex",
    "ss_pages",
    "einfty_oracle",
    "truncate",
    "gather",
    "transfer_check",
    "resolution_spec",
    "periodic_resolution_homology",
    "tor_closed_form",
]

__version__ = "0.1.0"
