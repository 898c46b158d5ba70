import math
from functools import reduce

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import FINITE_TYPES, random_valid_datum
from paired_roots.core.catalogue import standard_datum
from paired_roots.core.datum import CoxeterDatum, validate
from paired_roots.core.dihedral import failure_index
from paired_roots.core.roots import (
    SignClass, cone_membership, decomposition_check, generate_roots, pairing_value, reflect1, reflect2, reflect_by_root,
    reflect_pair_by_root, root_class, sign_of, simple_pair, zero_in_cone,
)
from paired_roots.utils.exceptions import CapExceededError, DatumError, ErrorCode, RootSystemError


def _rebuild(datum, pair, side):
    """由见证字重建根：ρ(w[0])···ρ(w[-1])·(α 或 β)_seed"""
    rho = datum.rho1 if side == 1 else datum.rho2
    start = (datum.alpha if side == 1 else datum.beta)[pair.seed]
    return reduce(lambda v, s: rho(s) @ v, reversed(pair.witness), np.array(start))


class TestReflections:
    def test_reflect1_formula(self, a2):
        assert_allclose(reflect1(a2, "s1", [0, 1]), [1, 1])
        assert_allclose(reflect1(a2, 0, [1, 0]), [-1, 0])

    def test_reflect2_formula(self, a2):
        assert_allclose(reflect2(a2, "s2", [1, 0]), [1, 1])

    def test_reflection_by_simple_root_matches_generator(self, b3, rng):
        v = rng.normal(size=3)
        for s in range(3):
            assert_allclose(reflect_by_root(b3, simple_pair(b3, s), v), reflect1(b3, s, v), atol=1e-12)

    def test_root_reflects_itself_to_negative(self, h3):
        for pair in generate_roots(h3).pairs[:10]:
            x, y = reflect_pair_by_root(h3, pair, pair.x, pair.y)
            assert_allclose(x, -pair.x, atol=1e-12)
            assert_allclose(y, -pair.y, atol=1e-12)

    def test_pairing_value(self, a2, h3):
        assert pairing_value(a2, [1, 0], [0, 1]) == pytest.approx(-0.5)
        for pair in generate_roots(h3).pairs:
            assert pairing_value(h3, pair.x, pair.y) == pytest.approx(1.0)

    def test_dimension_checked(self, a2):
        with pytest.raises(DatumError) as info:
            reflect1(a2, 0, [1, 0, 0])
        assert info.value.error_code is ErrorCode.DIMENSION_MISMATCH


class TestSignsAndCones:
    @pytest.mark.parametrize("v, expected", [
        ([1, 2, 0], SignClass.POSITIVE),
        ([0, -1, -3], SignClass.NEGATIVE),
        ([1, -1, 0], SignClass.MIXED),
    ])
    def test_standard_signs(self, a3, v, expected):
        assert sign_of(a3, v) is expected

    def test_zero_vector_has_no_sign(self, a3):
        with pytest.raises(RootSystemError) as info:
            sign_of(a3, [0, 0, 0])
        assert info.value.error_code is ErrorCode.ZERO_VECTOR

    def test_cone_membership(self):
        assert cone_membership(np.eye(2), [1, 2])
        assert not cone_membership(np.eye(2), [1, -1])
        assert cone_membership([[1, 1], [1, -1]], [2, 0])

    def test_zero_in_cone(self):
        assert zero_in_cone([[1, 0], [-1, 0]])
        assert not zero_in_cone(np.eye(3))

    def test_empty_cone_rejected(self):
        with pytest.raises(RootSystemError):
            cone_membership(np.zeros((0, 2)), [1, 0])

    def test_root_class(self):
        v = np.array([0.0, 2.0, -1.0])
        assert root_class(v) == root_class(-3 * v)
        assert root_class(v) != root_class([0.0, 1.0, 1.0])
        assert root_class(v).orientation == 1
        assert root_class(-v).orientation == -1
        with pytest.raises(RootSystemError):
            root_class([0.0, 0.0])


class TestGenerateRoots:
    def test_a2(self, a2):
        roots = generate_roots(a2, max_depth=10)
        assert len(roots) == 6
        assert roots.complete
        assert len(roots.positives) == 3 and len(roots.negatives) == 3
        assert not roots.mixed

    def test_h3_has_thirty_roots(self, h3):
        roots = generate_roots(h3, max_depth=20)
        assert len(roots) == 30
        assert roots.complete

    def test_infinite_dihedral_is_truncated(self, ainf):
        roots = generate_roots(ainf, max_depth=4)
        assert not roots.complete
        assert roots.depth_reached == 4
        assert not roots.mixed

    @pytest.mark.slow
    @pytest.mark.parametrize("name, positives, _order", FINITE_TYPES)
    def test_positive_root_counts(self, name, positives, _order):
        roots = generate_roots(standard_datum(name))
        assert roots.complete
        assert len(roots.positives) == positives
        assert len(roots.negatives) == positives

    def test_witness_words_rebuild_both_sides(self, b3):
        for pair in generate_roots(b3).pairs:
            assert_allclose(_rebuild(b3, pair, 1), pair.x, atol=1e-9)
            assert_allclose(_rebuild(b3, pair, 2), pair.y, atol=1e-9)
            assert len(pair.witness) == pair.depth

    def test_asymmetric_partners_differ(self, rng):
        datum = random_valid_datum(rng)
        roots = generate_roots(datum, max_depth=6)
        for pair in roots.pairs:
            assert datum.pair(pair.x, pair.y) == pytest.approx(1.0, abs=1e-8)

    def test_parallel_layers_are_deterministic(self, b3):
        serial = generate_roots(b3, threads=1)
        parallel = generate_roots(b3, threads=4)
        assert [r.model_dump() for r in serial.records()] == [r.model_dump() for r in parallel.records()]

    def test_cap(self, a3):
        with pytest.raises(CapExceededError) as info:
            generate_roots(a3, cap=5)
        partial = info.value.partial
        assert len(partial) == 5
        assert partial.cap_exceeded
        assert partial.summary().cap_exceeded

    def test_invalid_datum_needs_force(self):
        datum = CoxeterDatum(["s", "t"], [[1, 0.5], [0.5, 1]])
        with pytest.raises(DatumError) as info:
            generate_roots(datum)
        assert info.value.error_code is ErrorCode.INVALID_DATUM
        assert generate_roots(datum, max_depth=3, force=True).mixed

    def test_records_and_summary(self, a2):
        roots = generate_roots(a2)
        records = roots.records()
        assert records[0].side1 == [1.0, 0.0]
        assert records[0].witness == [] and records[0].seed == "s1"
        summary = roots.summary()
        assert summary.count == 6 and summary.positives == 3 and summary.complete


class TestInvariance:
    @pytest.mark.parametrize("name", ["A3", "H3"])
    def test_pairing_is_invariant(self, name):
        datum = standard_datum(name)
        pairs = generate_roots(datum).pairs
        for s in range(datum.n):
            for p in pairs:
                for r in pairs:
                    before = datum.pair(p.x, r.y)
                    after = datum.pair(datum.rho1(s) @ p.x, datum.rho2(s) @ r.y)
                    assert after == pytest.approx(before, abs=1e-8)

    @pytest.mark.parametrize("name", ["A3", "H3"])
    def test_zero_pairing_is_symmetric(self, name):
        datum = standard_datum(name)
        pairs = generate_roots(datum).pairs
        for p in pairs:
            assert datum.pair(p.x, p.y) == pytest.approx(1.0, abs=1e-8)
            for r in pairs:
                assert (abs(datum.pair(p.x, r.y)) <= 1e-8) == (abs(datum.pair(r.x, p.y)) <= 1e-8)

    def test_asymmetric_zero_pairing_is_symmetric(self, rng):
        datum = random_valid_datum(rng)
        pairs = generate_roots(datum, max_depth=5).pairs
        for p in pairs:
            for r in pairs:
                assert (abs(datum.pair(p.x, r.y)) <= 1e-8) == (abs(datum.pair(r.x, p.y)) <= 1e-8)


class TestDecomposition:
    @pytest.mark.slow
    @pytest.mark.parametrize("name", [t[0] for t in FINITE_TYPES[:8]] + ["I2(5)"])
    def test_standard_data_hold(self, name):
        result = decomposition_check(standard_datum(name), max_depth=20)
        assert result.holds and result.complete

    @pytest.mark.slow
    def test_random_asymmetric_data_hold(self, rng):
        checked = 0
        while checked < 10:
            datum = random_valid_datum(rng)
            if not validate(datum).passed:
                continue
            result = decomposition_check(datum, max_depth=12)
            assert result.holds, datum.pairing
            checked += 1

    def test_infinite_dihedral_holds_incomplete(self, ainf):
        result = decomposition_check(ainf, max_depth=6)
        assert result.holds
        assert not result.complete

    @pytest.mark.parametrize("pairing", [
        [[1, 0.5], [0.5, 1]],                   # D3
        [[1, 0.0], [-0.5, 1]],                  # D4
        [[1, -0.3], [-0.3, 1]],                 # D5
        [[1, 0.0, -0.5], [-1.0, 1, 0], [-0.5, 0, 1]],  # D4，秩 3
    ])
    def test_violations_give_counterexamples(self, pairing):
        datum = CoxeterDatum([f"s{i + 1}" for i in range(len(pairing))], pairing)
        assert not validate(datum).passed
        result = decomposition_check(datum, max_depth=40)
        assert not result.holds
        pair = result.counterexample
        side_vector = pair.x if result.side == 1 else pair.y
        assert sign_of(datum, side_vector, result.side) is SignClass.MIXED
        assert_allclose(_rebuild(datum, pair, 1), pair.x, atol=1e-9)

    @pytest.mark.slow
    def test_bond_violations_from_failure_index(self, rng):
        checked = 0
        while checked < 10:
            gamma = float(rng.uniform(0.2, 0.98))
            if any(abs(gamma - math.cos(math.pi / m)) < 1e-3 for m in range(2, 40)):
                continue
            n = failure_index(gamma ** 2)
            if n is None or n > 20:
                continue
            scale = float(rng.uniform(0.5, 2.0))
            datum = CoxeterDatum(["s", "t"], [[1, -gamma * scale], [-gamma / scale, 1]])
            assert validate(datum).failed_conditions() == ["D5"]
            result = decomposition_check(datum, max_depth=40)
            assert not result.holds
            assert result.counterexample.depth <= n + 1
            checked += 1
