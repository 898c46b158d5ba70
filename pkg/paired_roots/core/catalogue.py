"""标准 Coxeter 矩阵目录

按类型名给出 Coxeter 矩阵，∞ 用 math.inf 表示。
"""

import math
import re
from typing import Dict, List, Tuple

from paired_roots.core.datum import CoxeterDatum, from_coxeter_matrix
from paired_roots.utils.config import DEFAULT_TOLERANCE
from paired_roots.utils.exceptions import ErrorCode, InputError

_TYPE_PATTERN = re.compile(r"^(~?)([A-Za-z])(\d*)(?:\((\d+|inf)\))?$")

# 例外型的边 (i, j, m)，下标从 0 开始，按 Bourbaki 编号
_EXCEPTIONAL_EDGES: Dict[str, Tuple[int, List[Tuple[int, int, int]]]] = {
    "E6": (6, [(0, 2, 3), (1, 3, 3), (2, 3, 3), (3, 4, 3), (4, 5, 3)]),
    "E7": (7, [(0, 2, 3), (1, 3, 3), (2, 3, 3), (3, 4, 3), (4, 5, 3), (5, 6, 3)]),
    "E8": (8, [(0, 2, 3), (1, 3, 3), (2, 3, 3), (3, 4, 3), (4, 5, 3), (5, 6, 3), (6, 7, 3)]),
    "F4": (4, [(0, 1, 3), (1, 2, 4), (2, 3, 3)]),
    "G2": (2, [(0, 1, 6)]),
    "H3": (3, [(0, 1, 5), (1, 2, 3)]),
    "H4": (4, [(0, 1, 5), (1, 2, 3), (2, 3, 3)]),
}


def _from_edges(n: int, edges) -> List[List[float]]:
    matrix = [[1.0 if i == j else 2.0 for j in range(n)] for i in range(n)]
    for i, j, m in edges:
        matrix[i][j] = matrix[j][i] = float(m)
    return matrix


def _path(n: int, last: float = 3) -> List[List[float]]:
    edges = [(i, i + 1, 3) for i in range(n - 1)]
    if n >= 2:
        edges[-1] = (n - 2, n - 1, last)
    return _from_edges(n, edges)


def _unknown(name: str, reason: str = "未知类型") -> InputError:
    return InputError(f"{reason}: {name}", ErrorCode.INVALID_PARAMETER, {"type": name})


def coxeter_matrix_for_type(name: str) -> List[List[float]]:
    """按类型名返回 Coxeter 矩阵

    支持 A<n>、B<n>/C<n>、D<n>、E6-E8、F4、G2、H3、H4、I2(<m>)、Ainf、~A<n>。

    Raises:
        InputError: 未知类型名
    """
    key = name.strip()
    if key in ("Ainf", "~A1", "I2(inf)"):
        return [[1.0, math.inf], [math.inf, 1.0]]
    if key.upper() in _EXCEPTIONAL_EDGES:
        n, edges = _EXCEPTIONAL_EDGES[key.upper()]
        return _from_edges(n, edges)

    match = _TYPE_PATTERN.match(key)
    if not match:
        raise _unknown(name)
    affine, letter, rank, label = match.groups()
    letter = letter.upper()

    if letter == "I" and rank == "2" and label and not affine:
        m = int(label)
        if m < 2:
            raise _unknown(name, "I2(m) 要求 m ≥ 2")
        return _from_edges(2, [(0, 1, m)])
    if not rank or label:
        raise _unknown(name)

    n = int(rank)
    if affine:
        if letter != "A" or n < 2:
            raise _unknown(name, "仅支持 ~A<n> (n ≥ 2)")
        edges = [(i, (i + 1) % (n + 1), 3) for i in range(n + 1)]
        return _from_edges(n + 1, edges)
    if letter == "A" and n >= 1:
        return _path(n)
    if letter in ("B", "C") and n >= 2:
        return _path(n, last=4)
    if letter == "D" and n >= 4:
        edges = [(i, i + 1, 3) for i in range(n - 2)] + [(n - 3, n - 1, 3)]
        return _from_edges(n, edges)
    raise _unknown(name)


def standard_datum(name: str, tolerance: float = DEFAULT_TOLERANCE) -> CoxeterDatum:
    """类型名对应的标准数据，生成元标签为 s1..sn"""
    return from_coxeter_matrix(coxeter_matrix_for_type(name), tolerance=tolerance)
