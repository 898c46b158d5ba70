import math

import numpy as np
import pytest

from conftest import FINITE_TYPES, random_valid_datum
from paired_roots.core.catalogue import standard_datum
from paired_roots.core.datum import coxeter_matrix_of
from paired_roots.core.group import (
    Element, conjugate_root_classes, element_from_word, element_record, enumerate_group, equals, exchange_check,
    identity, length, n_set, nbar, order_of_product, reduced_word, reflection_of, symmetric_difference_identity_check,
)
from paired_roots.core.roots import generate_roots, simple_pair
from paired_roots.models import OrderKind
from paired_roots.utils.exceptions import CapExceededError, DatumError, ErrorCode


class TestElements:
    def test_lengths_in_a2(self, a2):
        assert length(a2, element_from_word(a2, "s1 s2 s1")) == 3
        assert length(a2, element_from_word(a2, "s1 s2 s1 s2")) == 2
        assert length(a2, element_from_word(a2, ["s1", "s1"])) == 0
        assert length(a2, identity(a2)) == 0

    def test_braid_relation_in_a2(self, a2):
        assert equals(element_from_word(a2, "s1 s2 s1"), element_from_word(a2, "s2 s1 s2"))
        assert not equals(element_from_word(a2, "s1 s2"), element_from_word(a2, "s2 s1"))

    def test_equality_is_symmetric(self, a2):
        small = Element(a2, (), np.diag([2.0, 1.0]), np.eye(2))
        large = Element(a2, (), np.diag([4.0, 1.0]), np.eye(2))
        assert equals(small, large, eps=0.5)
        assert equals(large, small, eps=0.5)
        assert not equals(small, large, eps=0.1)

    def test_reduced_word_rebuilds_element(self, b3):
        e = element_from_word(b3, [0, 1, 2, 1, 0, 1, 2, 2, 1])
        word = reduced_word(b3, e)
        assert len(word) == length(b3, e)
        assert equals(element_from_word(b3, word), e)

    def test_inverse(self, h3):
        e = element_from_word(h3, "s1 s2 s3 s2")
        assert (e * e.inverse()).is_identity()

    def test_unknown_generator(self, a2):
        with pytest.raises(DatumError) as info:
            element_from_word(a2, "s1 s7")
        assert info.value.error_code is ErrorCode.UNKNOWN_GENERATOR


class TestEnumeration:
    @pytest.mark.parametrize("name, _positives, order", [t for t in FINITE_TYPES if t[0] != "B4"])
    def test_group_orders(self, name, _positives, order):
        result = enumerate_group(standard_datum(name))
        assert result.complete
        assert len(result) == order

    @pytest.mark.slow
    def test_b4_order(self):
        assert len(enumerate_group(standard_datum("B4"))) == 384

    def test_bfs_distance_is_length(self, a3):
        for e in enumerate_group(a3):
            assert e.cached_length == len(reduced_word(a3, element_from_word(a3, e.word)))

    @pytest.mark.parametrize("name, positives", [("A3", 6), ("B3", 9), ("H3", 15), ("I2(7)", 7)])
    def test_conjugates_of_generators_give_every_root(self, name, positives):
        datum = standard_datum(name)
        assert len(conjugate_root_classes(datum, enumerate_group(datum).elements)) == positives

    def test_cap(self, a3):
        with pytest.raises(CapExceededError) as info:
            enumerate_group(a3, cap=10)
        assert len(info.value.partial) == 10
        assert not info.value.partial.complete

    def test_infinite_dihedral_is_truncated(self, ainf):
        result = enumerate_group(ainf, max_length=5)
        assert len(result) == 11
        assert not result.complete
        assert result.max_length == 5

    def test_parallel_enumeration(self, b3):
        serial = [e.word for e in enumerate_group(b3, threads=1)]
        parallel = [e.word for e in enumerate_group(b3, threads=3)]
        assert serial == parallel


class TestNSets:
    @pytest.mark.parametrize("name", ["A3", "B3"])
    def test_size_is_length(self, name):
        datum = standard_datum(name)
        roots = generate_roots(datum)
        for e in enumerate_group(datum):
            assert len(n_set(datum, e, 1, roots)) == e.cached_length
            assert len(n_set(datum, e, 2, roots)) == e.cached_length

    def test_without_precomputed_roots(self, a2):
        e = element_from_word(a2, "s1 s2")
        assert len(n_set(a2, e)) == 2

    def test_symmetric_difference_identity(self, b3, rng):
        roots = generate_roots(b3)
        elements = enumerate_group(b3).elements
        for _ in range(1000):
            i, j = rng.integers(len(elements), size=2)
            assert symmetric_difference_identity_check(b3, elements[i], elements[j], 1, roots)

    def test_symmetric_difference_identity_second_side(self, a3, rng):
        roots = generate_roots(a3)
        elements = enumerate_group(a3).elements
        for _ in range(100):
            i, j = rng.integers(len(elements), size=2)
            assert symmetric_difference_identity_check(a3, elements[i], elements[j], 2, roots)

    def test_exchange_condition(self, a3):
        roots = generate_roots(a3)
        for e in enumerate_group(a3):
            for pair in roots.positive_pairs():
                assert exchange_check(a3, e, pair)

    def test_nbar_of_simple_reflection(self, b3):
        for s in range(b3.n):
            reflections = nbar(b3, element_from_word(b3, (s,)))
            assert reflections == {reflection_of(b3, simple_pair(b3, s))}

    def test_nbar_size(self, h3):
        roots = generate_roots(h3)
        e = element_from_word(h3, "s1 s2 s3 s1 s2")
        assert len(nbar(h3, e, roots)) == length(h3, e)

    def test_reflections_are_involutions(self, h3):
        for pair in generate_roots(h3).positive_pairs():
            r = reflection_of(h3, pair).element
            assert (r * r).is_identity()
            np.testing.assert_allclose(r.act(pair.x), -pair.x, atol=1e-9)

    def test_element_record(self, a2):
        record = element_record(a2, element_from_word(a2, "s1 s2"))
        assert record.word == ["s1", "s2"]
        assert record.reduced_word == ["s1", "s2"]
        assert record.length == 2
        assert len(record.n_set) == 2


class TestOrders:
    @pytest.mark.parametrize("name", ["A4", "B3", "D4", "H3", "F4", "I2(8)", "~A2"])
    def test_orders_match_coxeter_matrix(self, name):
        datum = standard_datum(name)
        matrix = coxeter_matrix_of(datum)
        for s in range(datum.n):
            for t in range(s + 1, datum.n):
                result = order_of_product(datum, s, t)
                if math.isinf(matrix[s, t]):
                    assert result.kind is OrderKind.INFINITE
                else:
                    assert result.kind is OrderKind.FINITE and result.m == matrix[s, t]

    def test_orders_on_asymmetric_data(self, rng):
        for _ in range(10):
            datum = random_valid_datum(rng)
            matrix = coxeter_matrix_of(datum)
            for s in range(datum.n):
                for t in range(s + 1, datum.n):
                    result = order_of_product(datum, s, t, bound=200)
                    if math.isinf(matrix[s, t]):
                        assert result.kind is OrderKind.INFINITE
                    else:
                        assert result.m == matrix[s, t]

    def test_infinite_bond(self, ainf):
        result = order_of_product(ainf, "s1", "s2", bound=200)
        assert result.kind is OrderKind.INFINITE
        assert result.bound == 200
