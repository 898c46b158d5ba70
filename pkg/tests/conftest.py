import json
import math

import numpy as np
import pytest

from paired_roots.core.catalogue import standard_datum
from paired_roots.core.datum import CoxeterDatum, default_labels

# 有限型的 (类型名, |Φ⁺|, |W|)
FINITE_TYPES = [
    ("A2", 3, 6),
    ("A3", 6, 24),
    ("A4", 10, 120),
    ("B2", 4, 8),
    ("B3", 9, 48),
    ("B4", 16, 384),
    ("D4", 12, 192),
    ("H3", 15, 120),
] + [(f"I2({m})", m, 2 * m) for m in range(3, 9)]

# 随机非对称数据的乘积取值：cos²(π/m)（m ≤ 8）以及 1、1.2
PRODUCTS = [math.cos(math.pi / m) ** 2 for m in range(2, 9)] + [1.0, 1.2]


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def a2():
    return standard_datum("A2")


@pytest.fixture
def a3():
    return standard_datum("A3")


@pytest.fixture
def b3():
    return standard_datum("B3")


@pytest.fixture
def h3():
    return standard_datum("H3")


@pytest.fixture
def ainf():
    return standard_datum("Ainf")


def random_valid_datum(rng: np.random.Generator, n: int = 3) -> CoxeterDatum:
    """乘积取自 PRODUCTS、两侧按随机比例拆分的非对称数据"""
    pairing = np.eye(n)
    for s in range(n):
        for t in range(s + 1, n):
            product = PRODUCTS[rng.integers(len(PRODUCTS))]
            scale = rng.uniform(0.5, 2.0)
            pairing[s, t] = -math.sqrt(product) * scale
            pairing[t, s] = -math.sqrt(product) / scale
    return CoxeterDatum(default_labels(n), pairing)


@pytest.fixture
def write_json(tmp_path):
    """把对象写成 JSON 文件并返回路径"""

    def _write(name: str, payload) -> str:
        path = tmp_path / name
        if isinstance(payload, str):
            path.write_text(payload, encoding="utf-8")
        else:
            path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    return _write
