"""Coxeter 数据模块

定义、加载和校验 Coxeter 数据；计算键阶 m_st；构造标准数据与诱导数据。

所有坐标约定为列向量。标准模式下 Π₁、Π₂ 取单位坐标向量，alpha = beta = I，
form 即配对矩阵 C，于是任何模式下都有 ⟨x, y⟩ = xᵀ·form·y。
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, List, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError

from paired_roots.models import (
    BondLabel, ConditionVerdict, CoxeterMatrixFile, DatumEmbedding, DatumFile,
    ValidationReport, VerdictStatus, Violation,
)
from paired_roots.utils.config import DEFAULT_M_MAX, DEFAULT_TOLERANCE
from paired_roots.utils.exceptions import DatumError, ErrorCode, InputError
from paired_roots.utils.logging_config import get_logger

if TYPE_CHECKING:
    from paired_roots.core.roots import RootPair

logger = get_logger(__name__)

Generator = Union[int, str]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


def default_labels(n: int) -> List[str]:
    return [f"s{i + 1}" for i in range(n)]


@dataclass(frozen=True)
class Embedding:
    """单根在环境空间中的坐标"""
    alpha: np.ndarray  # n×d₁
    beta: np.ndarray   # n×d₂
    form: np.ndarray   # d₁×d₂


class CoxeterDatum:
    """Coxeter 数据：生成元标签、配对矩阵 C[s][t] = ⟨α_s, β_t⟩ 与可选嵌入

    构造后不可变；生成元反射矩阵 ρ₁(s)、ρ₂(s) 在构造时一次算好。
    """

    def __init__(
            self,
            labels: Sequence[str],
            pairing,
            embedding: Optional[Embedding] = None,
            tolerance: float = DEFAULT_TOLERANCE,
    ):
        """初始化 Coxeter 数据

        Args:
            labels: 生成元标签（指标集 S）
            pairing: n×n 配对矩阵
            embedding: 可选嵌入；为空时使用标准模式
            tolerance: 数值容差 ε

        Raises:
            DatumError: 形状不一致或嵌入与配对矩阵不符
        """
        pairing = np.asarray(pairing, dtype=float)
        n = len(labels)
        if pairing.shape != (n, n):
            raise DatumError(
                f"配对矩阵形状 {pairing.shape} 与生成元个数 {n} 不符",
                ErrorCode.DIMENSION_MISMATCH,
                {"shape": list(pairing.shape), "generators": n},
            )
        if len(set(labels)) != n:
            raise DatumError("生成元标签不能重复", ErrorCode.INVALID_DATUM, {"labels": list(labels)})
        if tolerance <= 0:
            raise DatumError("容差必须为正数", ErrorCode.INVALID_DATUM, {"tolerance": tolerance})

        self.labels: List[str] = list(labels)
        self.pairing = _frozen(pairing)
        self.tolerance = float(tolerance)
        self.embedding = embedding
        self._index = {label: i for i, label in enumerate(self.labels)}

        if embedding is None:
            self.alpha = _frozen(np.eye(n))
            self.beta = _frozen(np.eye(n))
            self.form = self.pairing
        else:
            self.alpha = _frozen(embedding.alpha)
            self.beta = _frozen(embedding.beta)
            self.form = _frozen(embedding.form)
            self._check_embedding()

        # ρ₁(s) = I − 2·α_s (form·β_s)ᵀ，ρ₂(s) = I − 2·β_s (formᵀ·α_s)ᵀ
        d1, d2 = self.form.shape
        self._rho1 = _frozen(np.stack([
            np.eye(d1) - 2.0 * np.outer(self.alpha[i], self.form @ self.beta[i]) for i in range(n)
        ]))
        self._rho2 = _frozen(np.stack([
            np.eye(d2) - 2.0 * np.outer(self.beta[i], self.form.T @ self.alpha[i]) for i in range(n)
        ]))

    def _check_embedding(self) -> None:
        n = self.n
        d1, d2 = self.form.shape
        if self.alpha.shape != (n, d1) or self.beta.shape != (n, d2):
            raise DatumError(
                "嵌入坐标的形状与配对形式不符",
                ErrorCode.DIMENSION_MISMATCH,
                {"alpha": list(self.alpha.shape), "beta": list(self.beta.shape), "form": [d1, d2]},
            )
        induced = self.alpha @ self.form @ self.beta.T
        deviation = float(np.max(np.abs(induced - self.pairing)))
        if deviation > self.tolerance:
            raise DatumError(
                f"嵌入诱导的配对与配对矩阵相差 {deviation:.3g}",
                ErrorCode.EMBEDDING_MISMATCH,
                {"deviation": deviation},
            )

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def is_standard(self) -> bool:
        return self.embedding is None

    @property
    def dims(self) -> tuple:
        """(d₁, d₂)"""
        return self.form.shape

    def index(self, s: Generator) -> int:
        """生成元的下标，接受标签或整数下标"""
        if isinstance(s, (int, np.integer)) and not isinstance(s, bool):
            if 0 <= s < self.n:
                return int(s)
        elif s in self._index:
            return self._index[s]
        raise DatumError(f"未知生成元: {s!r}", ErrorCode.UNKNOWN_GENERATOR, {"generator": str(s)})

    def rho1(self, s: Generator) -> np.ndarray:
        return self._rho1[self.index(s)]

    def rho2(self, s: Generator) -> np.ndarray:
        return self._rho2[self.index(s)]

    def pair(self, x, y) -> float:
        """⟨x, y⟩，x 为 V₁ 坐标、y 为 V₂ 坐标"""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d1, d2 = self.dims
        if x.shape != (d1,) or y.shape != (d2,):
            raise DatumError(
                f"向量维数 {x.shape}/{y.shape} 与空间维数 ({d1}, {d2}) 不符",
                ErrorCode.DIMENSION_MISMATCH,
            )
        return float(x @ self.form @ y)

    def __repr__(self) -> str:
        mode = "standard" if self.is_standard else f"embedded{self.dims}"
        return f"CoxeterDatum(labels={self.labels}, mode={mode}, eps={self.tolerance:g})"


# ---------------------------------------------------------------------------
# 构造
# ---------------------------------------------------------------------------

def _coxeter_array(matrix) -> np.ndarray:
    rows = [[math.inf if entry is None or entry == math.inf else float(entry) for entry in row] for row in matrix]
    return np.array(rows, dtype=float)


def from_coxeter_matrix(
        matrix,
        labels: Optional[Sequence[str]] = None,
        tolerance: float = DEFAULT_TOLERANCE,
) -> CoxeterDatum:
    """由 Coxeter 矩阵构造标准数据 C[s][t] = −cos(π/m_st)，∞ 对应 −1

    Raises:
        DatumError: NON_SYMMETRIC、BAD_DIAGONAL 或 ENTRY_OUT_OF_RANGE
    """
    m = _coxeter_array(matrix)
    n = m.shape[0]
    if m.ndim != 2 or m.shape != (n, n) or n == 0:
        raise DatumError("Coxeter 矩阵必须是非空方阵", ErrorCode.DIMENSION_MISMATCH)

    pairing = np.eye(n)
    for s in range(n):
        if m[s, s] != 1:
            raise DatumError(
                f"对角元 M[{s}][{s}] = {m[s, s]:g}，应为 1",
                ErrorCode.BAD_DIAGONAL,
                {"index": s, "value": m[s, s]},
            )
        for t in range(s + 1, n):
            if m[s, t] != m[t, s]:
                raise DatumError(
                    f"Coxeter 矩阵不对称: M[{s}][{t}] ≠ M[{t}][{s}]",
                    ErrorCode.NON_SYMMETRIC,
                    {"pair": [s, t], "values": [m[s, t], m[t, s]]},
                )
            entry = m[s, t]
            if math.isinf(entry):
                value = -1.0
            elif entry >= 2 and entry == int(entry):
                value = 0.0 if entry == 2 else -math.cos(math.pi / entry)
            else:
                raise DatumError(
                    f"非对角元 M[{s}][{t}] = {entry:g} 必须是 ≥ 2 的整数或 ∞",
                    ErrorCode.ENTRY_OUT_OF_RANGE,
                    {"pair": [s, t], "value": entry},
                )
            pairing[s, t] = pairing[t, s] = value

    return CoxeterDatum(labels or default_labels(n), pairing, tolerance=tolerance)


def asymmetric_datum(
        matrix,
        scales,
        labels: Optional[Sequence[str]] = None,
        tolerance: float = DEFAULT_TOLERANCE,
) -> CoxeterDatum:
    """按比例因子打破标准数据的对称性，保持每个乘积 c_st·c_ts 不变

    Args:
        matrix: Coxeter 矩阵
        scales: n×n 数组，取上三角 λ_st (s<t)，须为正
    """
    base = from_coxeter_matrix(matrix, labels, tolerance)
    scales = np.asarray(scales, dtype=float)
    pairing = np.array(base.pairing)
    n = base.n
    for s in range(n):
        for t in range(s + 1, n):
            factor = scales[s, t]
            if factor <= 0:
                raise DatumError(
                    "比例因子必须为正",
                    ErrorCode.INVALID_DATUM,
                    {"pair": [s, t], "value": float(factor)},
                )
            pairing[s, t] *= factor
            pairing[t, s] /= factor
    return CoxeterDatum(base.labels, pairing, tolerance=tolerance)


# ---------------------------------------------------------------------------
# 键阶与校验
# ---------------------------------------------------------------------------

def bond_order(c_st: float, c_ts: float, eps: float = DEFAULT_TOLERANCE, m_max: int = DEFAULT_M_MAX) -> BondLabel:
    """由乘积 c_st·c_ts 判定键阶

    返回满足 |c_st·c_ts − cos²(π/m)| ≤ ε 的最小 m ∈ [2, m_max]；
    乘积 ≥ 1−ε 时为 Infinite；否则 Invalid。

    Raises:
        DatumError: 乘积 < −ε（NEGATIVE_PRODUCT）
    """
    product = float(c_st) * float(c_ts)
    if product < -eps:
        raise DatumError(
            f"配对乘积为负: {product:.6g}",
            ErrorCode.NEGATIVE_PRODUCT,
            {"product": product},
        )
    ms = np.arange(2, m_max + 1)
    hits = np.flatnonzero(np.abs(product - np.cos(np.pi / ms) ** 2) <= eps)
    if hits.size:
        return BondLabel.finite(int(ms[hits[0]]), product)
    if product >= 1 - eps:
        return BondLabel.infinite(product)
    return BondLabel.invalid(product)


def _verdict(condition: str, violations: List[Violation], note: Optional[str] = None) -> ConditionVerdict:
    status = VerdictStatus.FAIL if violations else VerdictStatus.PASS
    return ConditionVerdict(condition=condition, status=status, violations=violations, note=note)


def _check_cone_conditions(datum: CoxeterDatum) -> tuple:
    from paired_roots.core.roots import cone_membership, zero_in_cone

    eps = datum.tolerance
    labels = datum.labels

    d2_i = []
    for side, rows in (("Π₁", datum.alpha), ("Π₂", datum.beta)):
        if zero_in_cone(rows, eps):
            d2_i.append(Violation(pair=(side,)))

    d2_ii = []
    for side, rows in ((1, datum.alpha), (2, datum.beta)):
        for s in range(datum.n):
            others = np.delete(rows, s, axis=0)
            if others.shape[0] and cone_membership(others, rows[s], eps):
                d2_ii.append(Violation(pair=(labels[s], f"side{side}")))

    return _verdict("D2(i)", d2_i), _verdict("D2(ii)", d2_ii)


def validate(datum: CoxeterDatum, m_max: int = DEFAULT_M_MAX) -> ValidationReport:
    """逐项检查条件 (D1)-(D5)

    标准模式下 (D2) 记为 Assumed；所有失败都写入报告，不抛出异常。
    """
    c = datum.pairing
    eps = datum.tolerance
    labels = datum.labels
    n = datum.n

    d1 = [Violation(pair=(labels[s], labels[s]), value=float(c[s, s]))
          for s in range(n) if abs(c[s, s] - 1.0) > eps]

    if datum.is_standard:
        note = "标准模式下单根为坐标向量，(D2) 自动成立"
        d2_i = ConditionVerdict(condition="D2(i)", status=VerdictStatus.ASSUMED, note=note)
        d2_ii = ConditionVerdict(condition="D2(ii)", status=VerdictStatus.ASSUMED, note=note)
    else:
        d2_i, d2_ii = _check_cone_conditions(datum)

    d3, d4, d5 = [], [], []
    for s in range(n):
        for t in range(n):
            if s != t and c[s, t] > eps:
                d3.append(Violation(pair=(labels[s], labels[t]), value=float(c[s, t])))
        for t in range(s + 1, n):
            if (abs(c[s, t]) <= eps) != (abs(c[t, s]) <= eps):
                d4.append(Violation(pair=(labels[s], labels[t]), value=float(c[s, t] * c[t, s])))
            try:
                bond = bond_order(c[s, t], c[t, s], eps, m_max)
                if not bond.is_valid:
                    d5.append(Violation(pair=(labels[s], labels[t]), value=bond.product))
            except DatumError as e:
                d5.append(Violation(pair=(labels[s], labels[t]), value=e.details.get("product")))

    report = ValidationReport(
        d1=_verdict("D1", d1),
        d2_i=d2_i,
        d2_ii=d2_ii,
        d3=_verdict("D3", d3),
        d4=_verdict("D4", d4),
        d5=_verdict("D5", d5),
    )
    if report.passed:
        logger.debug("数据校验通过", extra={"generators": n})
    else:
        logger.info(f"数据校验失败: {', '.join(report.failed_conditions())}", extra={"generators": n})
    return report


def coxeter_matrix_of(datum: CoxeterDatum, m_max: int = DEFAULT_M_MAX) -> np.ndarray:
    """数据对应的 Coxeter 矩阵，∞ 记为 np.inf

    Raises:
        DatumError: 数据未通过校验（INVALID_DATUM）
    """
    report = validate(datum, m_max)
    if not report.passed:
        raise DatumError(
            f"数据未通过校验: {', '.join(report.failed_conditions())}",
            ErrorCode.INVALID_DATUM,
            {"failed": report.failed_conditions()},
        )
    c = datum.pairing
    result = np.ones((datum.n, datum.n))
    for s in range(datum.n):
        for t in range(s + 1, datum.n):
            result[s, t] = result[t, s] = bond_order(c[s, t], c[t, s], datum.tolerance, m_max).order
    return result


def coxeter_matrix_to_file(matrix: np.ndarray) -> List[List[int]]:
    """Coxeter 矩阵的文件编码，∞ 写作 0"""
    return [[0 if math.isinf(entry) else int(entry) for entry in row] for row in np.asarray(matrix)]


def induced_datum(parent: CoxeterDatum, delta1: Sequence["RootPair"]) -> CoxeterDatum:
    """由正根集 Δ′₁（及其伙伴 Δ′₂）诱导的数据

    标签按 delta1 的顺序编号为 r1..rk，配对 C′[i][j] = ⟨x_i, φ(x_j)⟩，
    嵌入记录每个 x、φ(x) 在父空间中的坐标。

    Raises:
        DatumError: 两个根互为倍数（DUPLICATE_REFLECTION）
    """
    from paired_roots.core.roots import root_class

    if not delta1:
        raise DatumError("诱导数据至少需要一个根", ErrorCode.INVALID_DATUM)

    seen = {}
    for i, pair in enumerate(delta1):
        key = root_class(pair.x, parent.tolerance)
        if key in seen:
            raise DatumError(
                f"第 {seen[key]} 与第 {i} 个根给出同一个反射",
                ErrorCode.DUPLICATE_REFLECTION,
                {"indices": [seen[key], i]},
            )
        seen[key] = i

    alpha = np.array([pair.x for pair in delta1], dtype=float)
    beta = np.array([pair.y for pair in delta1], dtype=float)
    pairing = alpha @ parent.form @ beta.T
    labels = [f"r{i + 1}" for i in range(len(delta1))]
    return CoxeterDatum(labels, pairing, Embedding(alpha, beta, parent.form), parent.tolerance)


# ---------------------------------------------------------------------------
# 文件读写
# ---------------------------------------------------------------------------

def load_datum(path: Union[str, Path], tolerance: Optional[float] = None) -> CoxeterDatum:
    """从 JSON 文件加载数据，支持数据文件与 Coxeter 矩阵文件两种格式

    Args:
        path: 文件路径
        tolerance: 覆盖文件中的容差

    Raises:
        InputError: 文件不存在或格式无效
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise InputError(f"文件未找到: {path}", ErrorCode.FILE_NOT_FOUND, {"path": str(path)}, e)
    except OSError as e:
        raise InputError(f"文件读取失败: {path}", ErrorCode.FILE_NOT_FOUND, {"path": str(path)}, e)
    except json.JSONDecodeError as e:
        raise InputError(f"JSON 解析失败: {e}", ErrorCode.INVALID_FILE_FORMAT, {"path": str(path)}, e)

    if not isinstance(raw, dict):
        raise InputError("数据文件顶层必须是对象", ErrorCode.INVALID_FILE_FORMAT, {"path": str(path)})

    try:
        if "coxeter_matrix" in raw:
            parsed = CoxeterMatrixFile.model_validate(raw)
            matrix = [[math.inf if entry == 0 else entry for entry in row] for row in parsed.coxeter_matrix]
            datum = from_coxeter_matrix(matrix, parsed.generators, tolerance or DEFAULT_TOLERANCE)
        else:
            parsed = DatumFile.model_validate(raw)
            embedding = None
            if parsed.embedding is not None:
                embedding = Embedding(
                    np.array(parsed.embedding.alpha, dtype=float),
                    np.array(parsed.embedding.beta, dtype=float),
                    np.array(parsed.embedding.form, dtype=float),
                )
            eps = tolerance or parsed.tolerance or DEFAULT_TOLERANCE
            datum = CoxeterDatum(parsed.generators, parsed.pairing, embedding, eps)
    except ValidationError as e:
        raise InputError(
            f"数据文件格式无效: {e.error_count()} 处错误",
            ErrorCode.INVALID_FILE_FORMAT,
            {"path": str(path), "errors": [err["msg"] for err in e.errors()]},
            e,
        )
    except DatumError as e:
        raise InputError(f"数据文件内容无效: {e.message}", ErrorCode.INVALID_FILE_FORMAT, e.details, e)

    logger.info(f"已加载数据 {path.name}", extra={"generators": datum.n, "standard": datum.is_standard})
    return datum


def datum_to_file(datum: CoxeterDatum) -> DatumFile:
    embedding = None
    if not datum.is_standard:
        embedding = DatumEmbedding(
            alpha=datum.alpha.tolist(),
            beta=datum.beta.tolist(),
            form=datum.form.tolist(),
        )
    return DatumFile(
        generators=datum.labels,
        pairing=datum.pairing.tolist(),
        embedding=embedding,
        tolerance=datum.tolerance,
    )
