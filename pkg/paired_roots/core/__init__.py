# paired_roots.core 包初始化文件

from .catalogue import coxeter_matrix_for_type, standard_datum
from .datum import (
    CoxeterDatum, Embedding, asymmetric_datum, bond_order, coxeter_matrix_of, datum_to_file,
    from_coxeter_matrix, induced_datum, load_datum, validate,
)
from .dihedral import (
    DihedralParams, ProductKind, braid_check, classify_gamma, failure_index, max_closed_form_deviation,
    order_of_AB, p_closed_form, p_sequence, power_product, rank_two_matrices,
)
from .group import (
    Element, Reflection, element_from_word, enumerate_group, equals, exchange_check, identity, length,
    n_set, nbar, order_of_product, reduced_word, reflection_of, symmetric_difference_identity_check,
)
from .roots import (
    RootPair, SignClass, SignedRootSet, decomposition_check, generate_roots, pairing_value,
    reflect1, reflect2, reflect_by_root, reflect_pair_by_root, sign_of,
)
from .subgroup import (
    ReflectionSubgroup, SubgroupCaps, canonical_generators_bruteforce, canonical_roots, conjugate_delta_check,
    d34_report, dihedral_coeff_check, find_root, phi_of, span_check, sub_length, subgroup_from_reflections,
    subgroup_report, validate_canonical_set,
)

__all__ = [
    "coxeter_matrix_for_type", "standard_datum",
    "CoxeterDatum", "Embedding", "asymmetric_datum", "bond_order", "coxeter_matrix_of", "datum_to_file",
    "from_coxeter_matrix", "induced_datum", "load_datum", "validate",
    "DihedralParams", "ProductKind", "braid_check", "classify_gamma", "failure_index",
    "max_closed_form_deviation", "order_of_AB", "p_closed_form", "p_sequence", "power_product",
    "rank_two_matrices",
    "Element", "Reflection", "element_from_word", "enumerate_group", "equals", "exchange_check", "identity",
    "length", "n_set", "nbar", "order_of_product", "reduced_word", "reflection_of",
    "symmetric_difference_identity_check",
    "RootPair", "SignClass", "SignedRootSet", "decomposition_check", "generate_roots", "pairing_value",
    "reflect1", "reflect2", "reflect_by_root", "reflect_pair_by_root", "sign_of",
    "ReflectionSubgroup", "SubgroupCaps", "canonical_generators_bruteforce", "canonical_roots",
    "conjugate_delta_check", "d34_report", "dihedral_coeff_check", "find_root", "phi_of", "span_check",
    "sub_length", "subgroup_from_reflections", "subgroup_report", "validate_canonical_set",
]
