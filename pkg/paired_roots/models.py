import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from paired_roots.utils.config import SCHEMA_VERSION


# ---------------------------------------------------------------------------
# 输入文件格式
# ---------------------------------------------------------------------------

class DatumEmbedding(BaseModel):
    """单根在环境空间 V₁/V₂ 中的坐标及配对矩阵"""
    alpha: List[List[float]]  # n×d₁，每行是 α_s 的坐标
    beta: List[List[float]]   # n×d₂，每行是 β_s 的坐标
    form: List[List[float]]   # d₁×d₂，环境基上的配对

    @model_validator(mode="after")
    def _check_shapes(self) -> "DatumEmbedding":
        d1 = len(self.form)
        d2 = len(self.form[0]) if self.form else 0
        if any(len(row) != d2 for row in self.form):
            raise ValueError("form 必须是矩形矩阵")
        if len(self.alpha) != len(self.beta):
            raise ValueError("alpha 与 beta 的行数必须相同")
        if any(len(row) != d1 for row in self.alpha):
            raise ValueError("alpha 的列数必须等于 form 的行数")
        if any(len(row) != d2 for row in self.beta):
            raise ValueError("beta 的列数必须等于 form 的列数")
        return self


class DatumFile(BaseModel):
    """Coxeter 数据文件"""
    generators: List[str]
    pairing: List[List[float]]
    embedding: Optional[DatumEmbedding] = None
    tolerance: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _check_shapes(self) -> "DatumFile":
        n = len(self.generators)
        if n == 0:
            raise ValueError("generators 不能为空")
        if len(set(self.generators)) != n:
            raise ValueError("generators 不能重复")
        if len(self.pairing) != n or any(len(row) != n for row in self.pairing):
            raise ValueError(f"pairing 必须是 {n}×{n} 矩阵")
        if self.embedding is not None and len(self.embedding.alpha) != n:
            raise ValueError(f"embedding 必须恰有 {n} 个单根")
        return self


class CoxeterMatrixFile(BaseModel):
    """Coxeter 矩阵文件，0 表示 ∞"""
    coxeter_matrix: List[List[int]]
    generators: Optional[List[str]] = None

    @model_validator(mode="after")
    def _check_shapes(self) -> "CoxeterMatrixFile":
        n = len(self.coxeter_matrix)
        if n == 0 or any(len(row) != n for row in self.coxeter_matrix):
            raise ValueError("coxeter_matrix 必须是非空方阵")
        if self.generators is not None and len(self.generators) != n:
            raise ValueError(f"generators 必须恰有 {n} 项")
        return self


# ---------------------------------------------------------------------------
# 分类结果
# ---------------------------------------------------------------------------

class BondKind(str, Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    INVALID = "invalid"


class BondLabel(BaseModel):
    """键阶 m_st：Finite(m) | Infinite | Invalid(product)"""
    model_config = ConfigDict(frozen=True)

    kind: BondKind
    m: Optional[int] = None
    product: Optional[float] = None

    @classmethod
    def finite(cls, m: int, product: Optional[float] = None) -> "BondLabel":
        return cls(kind=BondKind.FINITE, m=m, product=product)

    @classmethod
    def infinite(cls, product: Optional[float] = None) -> "BondLabel":
        return cls(kind=BondKind.INFINITE, product=product)

    @classmethod
    def invalid(cls, product: float) -> "BondLabel":
        return cls(kind=BondKind.INVALID, product=product)

    @property
    def is_valid(self) -> bool:
        return self.kind is not BondKind.INVALID

    @property
    def order(self) -> float:
        """作为 Coxeter 矩阵元素的值（∞ 用 math.inf）"""
        if self.kind is BondKind.FINITE:
            return self.m
        if self.kind is BondKind.INFINITE:
            return math.inf
        raise ValueError(f"无效键阶没有对应的阶: {self}")

    def __str__(self) -> str:
        if self.kind is BondKind.FINITE:
            return f"Finite({self.m})"
        if self.kind is BondKind.INFINITE:
            return "Infinite"
        return f"Invalid({self.product:g})"


class OrderKind(str, Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    INCONCLUSIVE = "inconclusive"


class OrderResult(BaseModel):
    """矩阵乘积的阶；Infinite 记录迭代上界"""
    model_config = ConfigDict(frozen=True)

    kind: OrderKind
    m: Optional[int] = None
    bound: Optional[int] = None

    @classmethod
    def finite(cls, m: int) -> "OrderResult":
        return cls(kind=OrderKind.FINITE, m=m)

    @classmethod
    def infinite(cls, bound: int) -> "OrderResult":
        return cls(kind=OrderKind.INFINITE, bound=bound)

    @classmethod
    def inconclusive(cls, bound: Optional[int] = None) -> "OrderResult":
        return cls(kind=OrderKind.INCONCLUSIVE, bound=bound)

    def agrees_with(self, bond: BondLabel) -> bool:
        """与键阶比较：Finite(m) 对应 Finite(m)，Infinite 对应 Infinite"""
        if self.kind is OrderKind.FINITE:
            return bond.kind is BondKind.FINITE and bond.m == self.m
        if self.kind is OrderKind.INFINITE:
            return bond.kind is BondKind.INFINITE
        return False

    def __str__(self) -> str:
        if self.kind is OrderKind.FINITE:
            return f"Finite({self.m})"
        if self.kind is OrderKind.INFINITE:
            return f"Infinite({self.bound})"
        return "Inconclusive"


class GammaKind(str, Enum):
    COS_PI_OVER_M = "cos_pi_over_m"
    AT_LEAST_ONE = "at_least_one"
    FAILS = "fails"


class GammaClass(BaseModel):
    """γ 的分类：CosPiOverM(m) | AtLeastOne | Fails(n)"""
    model_config = ConfigDict(frozen=True)

    kind: GammaKind
    m: Optional[int] = None
    n: Optional[int] = None

    def __str__(self) -> str:
        if self.kind is GammaKind.COS_PI_OVER_M:
            return f"CosPiOverM({self.m})"
        if self.kind is GammaKind.AT_LEAST_ONE:
            return "AtLeastOne"
        return f"Fails({self.n})"


# ---------------------------------------------------------------------------
# 校验报告
# ---------------------------------------------------------------------------

class VerdictStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    ASSUMED = "assumed"


class Violation(BaseModel):
    pair: Tuple[str, ...]
    value: Optional[float] = None


class ConditionVerdict(BaseModel):
    """单个条件 (D1)-(D5) 的判定"""
    condition: str
    status: VerdictStatus
    violations: List[Violation] = []
    note: Optional[str] = None

    @computed_field
    @property
    def pair(self) -> Optional[Tuple[str, ...]]:
        return self.violations[0].pair if self.violations else None

    @computed_field
    @property
    def value(self) -> Optional[float]:
        return self.violations[0].value if self.violations else None


class ValidationReport(BaseModel):
    """条件 (D1)、(D2)(i)、(D2)(ii)、(D3)、(D4)、(D5) 的逐项报告"""
    d1: ConditionVerdict
    d2_i: ConditionVerdict
    d2_ii: ConditionVerdict
    d3: ConditionVerdict
    d4: ConditionVerdict
    d5: ConditionVerdict

    def verdicts(self) -> List[ConditionVerdict]:
        return [self.d1, self.d2_i, self.d2_ii, self.d3, self.d4, self.d5]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(v.status is not VerdictStatus.FAIL for v in self.verdicts())

    def failed_conditions(self) -> List[str]:
        return [v.condition for v in self.verdicts() if v.status is VerdictStatus.FAIL]


# ---------------------------------------------------------------------------
# 输出记录
# ---------------------------------------------------------------------------

class RootRecord(BaseModel):
    """根对的 JSON 行记录"""
    side1: List[float]
    side2: List[float]
    depth: int
    sign: str
    sign2: str
    witness: List[str]
    seed: str


class RootSetSummary(BaseModel):
    count: int
    positives: int
    negatives: int
    mixed: int
    depth_reached: int
    complete: bool
    cap_exceeded: bool = False


class ElementRecord(BaseModel):
    """群元素：输入字、既约字、长度与 N₁ 集"""
    word: List[str]
    reduced_word: List[str]
    length: int
    n_set: List[List[float]]


class PairReport(BaseModel):
    """Δ 中一对根的配对值、乘积、键阶与矩阵阶"""
    pair: Tuple[int, int]
    pairing_xy: float
    pairing_yx: float
    product: float
    bond: BondLabel
    order: OrderResult
    flags: List[str] = []


class CanonicalReport(BaseModel):
    entries: List[PairReport] = []
    skipped: List[Tuple[int, int]] = []

    @computed_field
    @property
    def consistent(self) -> bool:
        return all(not entry.flags for entry in self.entries)


class SubgroupReport(BaseModel):
    generators: List[List[float]]
    order: Union[int, str]
    phi_class_count: int
    complete: bool
    delta: List[List[float]]
    delta_partners: List[List[float]]
    coxeter_matrix_of_delta: Optional[List[List[int]]] = None
    d34: Optional[CanonicalReport] = None
    oracle_agrees: Optional[bool] = None


class CommandOutcome(BaseModel):
    """命令结果：退出码 0 成功 / 1 性质不成立 / 2 输入错误"""
    exit_code: int
    payload: Dict[str, Any] = {}

    @model_validator(mode="after")
    def _stamp_schema(self) -> "CommandOutcome":
        self.payload.setdefault("schema", SCHEMA_VERSION)
        return self
