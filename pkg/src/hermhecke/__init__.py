"""Exact Hecke theory for the Hermitian modular group over imaginary-quadratic fields."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    ConsistencyError,
    DomainError,
    EnumerationOverflow,
    HeckeError,
    HypothesisError,
    ScopeError,
    SearchExhausted,
)
from .field import QuadElt, QuadField, chi, classify_prime, make_field
from .hecke import (
    DoubleCosetKey,
    HeckeElement,
    RightCosetSet,
    canonical_form,
    enumerate_right_cosets,
    generators,
    hecke_product,
    phi_map,
    split_inert_rational,
)
from .ideals import IdealHNF, class_representatives, find_inert_prime, ideal_from_generators, reduced_forms
from .matrices import MatK, detdiv_chain, right_coset_equal, row_lattice_key, similitude_factor

__all__ = [
    "ConsistencyError", "DomainError", "EnumerationOverflow", "HeckeError", "HypothesisError",
    "ScopeError", "SearchExhausted", "QuadElt", "QuadField", "chi", "classify_prime", "make_field",
    "DoubleCosetKey", "HeckeElement", "RightCosetSet", "canonical_form", "enumerate_right_cosets",
    "generators", "hecke_product", "phi_map", "split_inert_rational", "IdealHNF",
    "class_representatives", "find_inert_prime", "ideal_from_generators", "reduced_forms", "MatK",
    "detdiv_chain", "right_coset_equal", "row_lattice_key", "similitude_factor",
]
