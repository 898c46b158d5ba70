import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from paired_roots.core.catalogue import coxeter_matrix_for_type, standard_datum
from paired_roots.core.datum import (
    CoxeterDatum, Embedding, asymmetric_datum, bond_order, coxeter_matrix_of, coxeter_matrix_to_file,
    datum_to_file, from_coxeter_matrix, induced_datum, load_datum, validate,
)
from paired_roots.core.roots import simple_pair
from paired_roots.models import BondKind, VerdictStatus
from paired_roots.utils.exceptions import DatumError, ErrorCode, InputError


class TestFromCoxeterMatrix:
    def test_bond_three(self):
        datum = from_coxeter_matrix([[1, 3], [3, 1]])
        assert_allclose(datum.pairing, [[1, -0.5], [-0.5, 1]], atol=1e-15)
        assert datum.labels == ["s1", "s2"]
        assert datum.is_standard

    def test_infinite_bond(self):
        datum = from_coxeter_matrix([[1, math.inf], [math.inf, 1]])
        assert datum.pairing.tolist() == [[1, -1], [-1, 1]]

    def test_commuting_bond_is_exact_zero(self):
        datum = from_coxeter_matrix([[1, 2], [2, 1]])
        assert datum.pairing.tolist() == [[1, 0], [0, 1]]

    @pytest.mark.parametrize("matrix, code", [
        ([[1, 3], [4, 1]], ErrorCode.NON_SYMMETRIC),
        ([[2, 3], [3, 1]], ErrorCode.BAD_DIAGONAL),
        ([[1, 1], [1, 1]], ErrorCode.ENTRY_OUT_OF_RANGE),
        ([[1, 2.5], [2.5, 1]], ErrorCode.ENTRY_OUT_OF_RANGE),
    ])
    def test_rejects_bad_matrices(self, matrix, code):
        with pytest.raises(DatumError) as info:
            from_coxeter_matrix(matrix)
        assert info.value.error_code is code

    @pytest.mark.parametrize("name", ["A3", "B3", "D4", "H3", "F4", "I2(7)", "Ainf", "~A2"])
    def test_catalogue_data_validate(self, name):
        assert validate(standard_datum(name)).passed


class TestBondOrder:
    def test_finite(self):
        bond = bond_order(-0.5, -0.5)
        assert bond.kind is BondKind.FINITE and bond.m == 3
        assert str(bond) == "Finite(3)"

    def test_asymmetric_split_keeps_order(self):
        c = math.cos(math.pi / 5)
        assert bond_order(-2 * c, -c / 2).m == 5

    def test_zero_is_m_two(self):
        assert bond_order(0.0, 0.0).m == 2

    @pytest.mark.parametrize("c_st, c_ts", [(-1.0, -1.0), (-1.1, -1.0), (-3.0, -0.5)])
    def test_infinite(self, c_st, c_ts):
        assert bond_order(c_st, c_ts).kind is BondKind.INFINITE

    def test_invalid(self):
        bond = bond_order(-0.3, -1.0)
        assert not bond.is_valid
        assert bond.product == pytest.approx(0.3)

    def test_negative_product_raises(self):
        with pytest.raises(DatumError) as info:
            bond_order(0.5, -0.5)
        assert info.value.error_code is ErrorCode.NEGATIVE_PRODUCT


class TestValidate:
    def test_standard_mode_assumes_cone_conditions(self, a3):
        report = validate(a3)
        assert report.passed
        assert report.d2_i.status is VerdictStatus.ASSUMED
        assert report.d2_ii.status is VerdictStatus.ASSUMED
        assert report.d3.status is VerdictStatus.PASS

    def test_positive_off_diagonal(self):
        # 两个非对角元都非零，D4 成立；失败的是 D3 与 D5（乘积为负）
        datum = CoxeterDatum(["s", "t"], [[1, 0.5], [-0.5, 1]])
        report = validate(datum)
        assert not report.passed
        assert report.d3.status is VerdictStatus.FAIL
        assert report.d3.pair == ("s", "t")
        assert report.d3.value == pytest.approx(0.5)
        assert report.d4.status is VerdictStatus.PASS
        assert report.failed_conditions() == ["D3", "D5"]

    def test_one_sided_zero(self):
        datum = CoxeterDatum(["s", "t"], [[1, 0], [-0.5, 1]])
        report = validate(datum)
        assert report.failed_conditions() == ["D4"]
        assert report.d4.pair == ("s", "t")

    def test_product_not_a_cosine_square(self):
        datum = CoxeterDatum(["s", "t"], [[1, -0.3], [-1.0, 1]])
        report = validate(datum)
        assert report.failed_conditions() == ["D5"]
        assert report.d5.value == pytest.approx(0.3)

    def test_diagonal(self):
        datum = CoxeterDatum(["s", "t"], [[2, -0.5], [-0.5, 1]])
        report = validate(datum)
        assert "D1" in report.failed_conditions()
        assert report.d1.pair == ("s", "s")

    def test_embedded_independent_roots_pass(self, a2):
        embedded = CoxeterDatum(a2.labels, a2.pairing, Embedding(np.eye(2), np.eye(2), np.array(a2.pairing)))
        report = validate(embedded)
        assert not embedded.is_standard
        assert report.passed
        assert report.d2_i.status is VerdictStatus.PASS
        assert report.d2_ii.status is VerdictStatus.PASS

    def test_embedded_zero_in_cone(self):
        alpha = np.array([[1.0, 0.0], [-1.0, 0.0]])
        datum = CoxeterDatum(["s", "t"], [[1, -1], [-1, 1]], Embedding(alpha, alpha, np.eye(2)))
        report = validate(datum)
        assert report.d2_i.status is VerdictStatus.FAIL
        assert report.d2_ii.status is VerdictStatus.PASS

    def test_embedding_must_match_pairing(self):
        with pytest.raises(DatumError) as info:
            CoxeterDatum(["s", "t"], [[1, -0.5], [-0.5, 1]], Embedding(np.eye(2), np.eye(2), np.eye(2)))
        assert info.value.error_code is ErrorCode.EMBEDDING_MISMATCH


class TestDatum:
    def test_index_accepts_labels_and_integers(self, a3):
        assert a3.index("s2") == 1
        assert a3.index(2) == 2
        with pytest.raises(DatumError) as info:
            a3.index("u")
        assert info.value.error_code is ErrorCode.UNKNOWN_GENERATOR

    def test_generator_matrices_are_involutions(self, h3):
        for s in range(h3.n):
            assert_allclose(h3.rho1(s) @ h3.rho1(s), np.eye(3), atol=1e-12)
            assert_allclose(h3.rho2(s) @ h3.rho2(s), np.eye(3), atol=1e-12)

    def test_pair_dimension_mismatch(self, a2):
        with pytest.raises(DatumError) as info:
            a2.pair([1, 0, 0], [1, 0])
        assert info.value.error_code is ErrorCode.DIMENSION_MISMATCH

    def test_coxeter_matrix_of(self, a3):
        assert coxeter_matrix_of(a3).tolist() == [[1, 3, 2], [3, 1, 3], [2, 3, 1]]

    def test_coxeter_matrix_of_infinite(self, ainf):
        matrix = coxeter_matrix_of(ainf)
        assert math.isinf(matrix[0, 1])
        assert coxeter_matrix_to_file(matrix) == [[1, 0], [0, 1]]

    def test_coxeter_matrix_of_rejects_invalid(self):
        with pytest.raises(DatumError) as info:
            coxeter_matrix_of(CoxeterDatum(["s", "t"], [[1, -0.3], [-1.0, 1]]))
        assert info.value.error_code is ErrorCode.INVALID_DATUM

    def test_asymmetric_datum_keeps_products(self, rng):
        matrix = coxeter_matrix_for_type("B3")
        scales = rng.uniform(0.5, 2.0, size=(3, 3))
        datum = asymmetric_datum(matrix, scales)
        base = standard_datum("B3")
        assert_allclose(datum.pairing * datum.pairing.T, base.pairing * base.pairing.T, atol=1e-12)
        assert not np.allclose(datum.pairing, datum.pairing.T)
        assert coxeter_matrix_of(datum).tolist() == coxeter_matrix_of(base).tolist()

    def test_asymmetric_datum_rejects_non_positive_scale(self):
        with pytest.raises(DatumError):
            asymmetric_datum([[1, 3], [3, 1]], [[1, -1], [1, 1]])


class TestInducedDatum:
    def test_simple_roots_reproduce_parent(self, a2):
        induced = induced_datum(a2, [simple_pair(a2, 0), simple_pair(a2, 1)])
        assert induced.labels == ["r1", "r2"]
        assert_allclose(induced.pairing, a2.pairing, atol=1e-12)
        assert validate(induced).passed

    def test_duplicate_reflection(self, a2):
        x = simple_pair(a2, 0)
        with pytest.raises(DatumError) as info:
            induced_datum(a2, [x, x.negated()])
        assert info.value.error_code is ErrorCode.DUPLICATE_REFLECTION


class TestLoadDatum:
    def test_datum_file(self, write_json):
        path = write_json("a2.json", {"generators": ["s", "t"], "pairing": [[1, -0.5], [-0.5, 1]]})
        datum = load_datum(path)
        assert datum.labels == ["s", "t"]
        assert validate(datum).passed

    def test_coxeter_matrix_file_zero_is_infinity(self, write_json):
        path = write_json("ainf.json", {"coxeter_matrix": [[1, 0], [0, 1]]})
        datum = load_datum(path)
        assert datum.pairing.tolist() == [[1, -1], [-1, 1]]

    def test_tolerance_override(self, write_json):
        path = write_json("a2.json", {"generators": ["s", "t"], "pairing": [[1, -0.5], [-0.5, 1]], "tolerance": 1e-6})
        assert load_datum(path).tolerance == 1e-6
        assert load_datum(path, tolerance=1e-4).tolerance == 1e-4

    def test_embedded_file(self, write_json):
        payload = {
            "generators": ["s", "t"],
            "pairing": [[1, -1], [-1, 1]],
            "embedding": {"alpha": [[1, 0], [-1, 0]], "beta": [[1, 0], [-1, 0]], "form": [[1, 0], [0, 1]]},
        }
        datum = load_datum(write_json("dep.json", payload))
        assert not datum.is_standard
        assert datum.dims == (2, 2)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError) as info:
            load_datum(tmp_path / "absent.json")
        assert info.value.error_code is ErrorCode.FILE_NOT_FOUND

    @pytest.mark.parametrize("payload", [
        '{"generators": ["s", "t"], "pairing": [[1, -0.5]',
        '[1, 2, 3]',
        json.dumps({"generators": ["s", "t"], "pairing": [[1, -0.5, 0], [-0.5, 1, 0]]}),
        json.dumps({"generators": ["s", "s"], "pairing": [[1, 0], [0, 1]]}),
        json.dumps({"coxeter_matrix": [[1, 3], [4, 1]]}),
    ])
    def test_malformed_files(self, write_json, payload):
        with pytest.raises(InputError) as info:
            load_datum(write_json("bad.json", payload))
        assert info.value.error_code is ErrorCode.INVALID_FILE_FORMAT

    def test_serialisation_matches_loader(self, write_json, b3):
        path = write_json("b3.json", datum_to_file(b3).model_dump(exclude_none=True))
        assert_allclose(load_datum(path).pairing, b3.pairing)
