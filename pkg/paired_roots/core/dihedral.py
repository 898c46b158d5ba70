"""秩 2 引擎

p_n 递推及其闭式、矩阵 A/B 的乘积恒等式、γ 的分类以及 AB 的阶。
"""

import math
import sys
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from paired_roots.models import GammaClass, GammaKind, OrderResult
from paired_roots.utils.config import DEFAULT_M_MAX, DEFAULT_N_MAX, DEFAULT_TOLERANCE
from paired_roots.utils.exceptions import DihedralError, ErrorCode
from paired_roots.utils.logging_config import get_logger

logger = get_logger(__name__)

RELATIVE_TOLERANCE = 1e-8
# 矩阵幂的元素超过该值即视为无界
POWER_LIMIT = 1e100
_LOG_FLOAT_MAX = math.log(sys.float_info.max)


@dataclass(frozen=True)
class DihedralParams:
    """参数 γ、q、X；√q 取正根"""
    gamma: float
    q: float = 1.0
    X: float = 1.0

    def __post_init__(self):
        if not self.q > 0:
            raise DihedralError("q 必须为正", ErrorCode.INVALID_PARAMETERS, {"q": self.q})
        if self.X == 0:
            raise DihedralError("X 不能为 0", ErrorCode.INVALID_PARAMETERS, {"X": self.X})


class ProductKind(str, Enum):
    B_AB = "B(AB)^n"
    A_BA = "A(BA)^n"
    BA = "(BA)^n"
    AB = "(AB)^n"


def matrices_agree(computed: np.ndarray, predicted: np.ndarray, rel: float = RELATIVE_TOLERANCE) -> bool:
    """按预测矩阵的量级做相对比较"""
    scale = max(1.0, float(np.max(np.abs(predicted))))
    return float(np.max(np.abs(computed - predicted))) <= rel * scale


# ---------------------------------------------------------------------------
# p_n 递推
# ---------------------------------------------------------------------------

def p_sequence(gamma: float, n_max: int) -> np.ndarray:
    """p₋₁, p₀, …, p_{n_max}；下标 0 对应 p₋₁

    p₋₁ = −1，p₀ = 0，p_{n+1} = 2γ·p_n − p_{n−1}
    """
    if n_max < 0:
        raise DihedralError("n_max 不能为负", ErrorCode.INVALID_PARAMETERS, {"n_max": n_max})
    p = np.empty(n_max + 2)
    p[0], p[1] = -1.0, 0.0
    for i in range(2, n_max + 2):
        p[i] = 2.0 * gamma * p[i - 1] - p[i - 2]
    return p


def p_closed_form(gamma: float, n: int) -> float:
    """p_n 的闭式解（n ≥ −1）"""
    if n < -1:
        raise DihedralError("n 必须 ≥ −1", ErrorCode.INVALID_PARAMETERS, {"n": n})
    if n <= 0:
        return float(n)
    if gamma == 1.0:
        return float(n)
    if gamma == -1.0:
        return float((-1) ** (n + 1) * n)
    if abs(gamma) > 1.0:
        # sinh(nθ)/sinh θ = e^{(n−1)θ}·(1 − e^{−2nθ})/(1 − e^{−2θ})
        theta = math.acosh(abs(gamma))
        sign = 1.0 if gamma > 0 or n % 2 == 1 else -1.0
        log_value = (n - 1) * theta + math.log(math.expm1(-2 * n * theta) / math.expm1(-2 * theta))
        if log_value > _LOG_FLOAT_MAX:
            return sign * math.inf
        return sign * math.exp(log_value)
    theta = math.acos(gamma)
    return math.sin(n * theta) / math.sin(theta)


def _scaled_deviation(gamma: float, n_max: int) -> float:
    """|γ| > 1 时在 p_n·e^{−nθ} 上比较，θ = arcosh|γ|，数值保持有限"""
    theta = math.acosh(abs(gamma))
    decay = math.exp(-theta)
    scaled = np.empty(n_max + 2)
    scaled[0], scaled[1] = -math.exp(theta), 0.0
    for i in range(2, n_max + 2):
        scaled[i] = 2.0 * gamma * decay * scaled[i - 1] - decay * decay * scaled[i - 2]

    ns = np.arange(-1, n_max + 1)
    signs = np.ones(ns.size) if gamma > 0 else np.where(ns % 2 == 1, 1.0, -1.0)
    closed = signs * decay * np.expm1(-2.0 * ns * theta) / math.expm1(-2.0 * theta)
    # 原尺度下的 max(1, |p_n|) 对应 max(e^{−nθ}, |p_n·e^{−nθ}|)
    floor = np.maximum(np.exp(-ns * theta), np.abs(scaled))
    return float(np.max(np.abs(scaled - closed) / floor))


def max_closed_form_deviation(gamma: float, n_max: int) -> float:
    """递推与闭式在 n ≤ n_max 上的最大相对偏差"""
    if abs(gamma) > 1.0:
        return _scaled_deviation(gamma, n_max)
    p = p_sequence(gamma, n_max)
    deviation = 0.0
    for n in range(-1, n_max + 1):
        value = p[n + 1]
        deviation = max(deviation, abs(value - p_closed_form(gamma, n)) / max(1.0, abs(value)))
    return deviation


# ---------------------------------------------------------------------------
# γ 的分类
# ---------------------------------------------------------------------------

def classify_gamma(
        gamma: float,
        eps: float = DEFAULT_TOLERANCE,
        m_max: int = DEFAULT_M_MAX,
        n_max: int = DEFAULT_N_MAX,
) -> GammaClass:
    """CosPiOverM(m) | AtLeastOne | Fails(n)

    Raises:
        DihedralError: 参数越界（INVALID_PARAMETERS）或在界内无法判定（INCONCLUSIVE）
    """
    if m_max < 2 or n_max < m_max:
        raise DihedralError(
            "要求 m_max ≥ 2 且 n_max ≥ m_max",
            ErrorCode.INVALID_PARAMETERS,
            {"m_max": m_max, "n_max": n_max},
        )
    ms = np.arange(2, m_max + 1)
    hits = np.flatnonzero(np.abs(gamma - np.cos(np.pi / ms)) <= eps)
    if hits.size:
        return GammaClass(kind=GammaKind.COS_PI_OVER_M, m=int(ms[hits[0]]))
    if gamma >= 1 - eps:
        return GammaClass(kind=GammaKind.AT_LEAST_ONE)

    p = p_sequence(gamma, n_max + 1)
    # p[n + 1] = p_n
    products = p[2:n_max + 2] * p[3:n_max + 3]
    failures = np.flatnonzero(products < -eps)
    if failures.size:
        return GammaClass(kind=GammaKind.FAILS, n=int(failures[0]) + 1)

    raise DihedralError(
        f"γ = {gamma!r} 在界内无法分类",
        ErrorCode.INCONCLUSIVE,
        {"gamma": gamma, "m_max": m_max, "n_max": n_max},
    )


def failure_index(product: float) -> Optional[int]:
    """γ = √product 时第一个满足 p_n·p_{n+1} < 0 的 n

    γ = cos θ ∈ [0, 1) 时 p_n = sin(nθ)/sin θ，符号在 n = ⌊π/θ⌋ 之后首次翻转；
    γ = cos(π/m) 或 γ ≥ 1 时没有翻转，返回 None。
    """
    if product < 0:
        raise DihedralError("乘积不能为负", ErrorCode.INVALID_PARAMETERS, {"product": product})
    gamma = math.sqrt(product)
    if gamma >= 1.0:
        return None
    ratio = math.pi / math.acos(gamma)
    if abs(ratio - round(ratio)) <= 1e-9:
        return None
    return int(math.floor(ratio))


# ---------------------------------------------------------------------------
# 矩阵 A、B
# ---------------------------------------------------------------------------

def dihedral_matrices(params: DihedralParams) -> Tuple[np.ndarray, np.ndarray]:
    """A = [[−1, 2γ√q·X], [0, q]]，B = [[q, 0], [2γ√q·X⁻¹, −1]]"""
    g, q, x = params.gamma, params.q, params.X
    root_q = math.sqrt(q)
    a = np.array([[-1.0, 2 * g * root_q * x], [0.0, q]])
    b = np.array([[q, 0.0], [2 * g * root_q / x, -1.0]])
    return a, b


def rank_two_matrices(c_st: float, c_ts: float) -> Tuple[np.ndarray, np.ndarray]:
    """ρ₁(s)、ρ₁(t) 在基 (α_s, α_t) 下的矩阵

    乘积为正时等于 q = 1、γ = √(c_st·c_ts)、X = −c_ts/γ 时的 (A, B)。
    """
    if c_st * c_ts < 0:
        raise DihedralError(
            "配对乘积为负，无法化为 (A, B)",
            ErrorCode.INVALID_PARAMETERS,
            {"c_st": c_st, "c_ts": c_ts},
        )
    a = np.array([[-1.0, -2.0 * c_ts], [0.0, 1.0]])
    b = np.array([[1.0, 0.0], [-2.0 * c_st, -1.0]])
    return a, b


def _predicted(params: DihedralParams, kind: ProductKind, n: int) -> np.ndarray:
    q, x = params.q, params.X
    p = p_sequence(params.gamma, 2 * n + 2)

    def pn(k: int) -> float:
        return p[k + 1]

    if kind is ProductKind.B_AB:
        return np.array([
            [q ** (n + 1) * pn(2 * n + 1), -q ** (n + 0.5) * pn(2 * n) * x],
            [q ** (n + 0.5) * pn(2 * n + 2) / x, -q ** n * pn(2 * n + 1)],
        ])
    if kind is ProductKind.A_BA:
        return np.array([
            [-q ** n * pn(2 * n + 1), q ** (n + 0.5) * pn(2 * n + 2) * x],
            [-q ** (n + 0.5) * pn(2 * n) / x, q ** (n + 1) * pn(2 * n + 1)],
        ])
    if kind is ProductKind.BA:
        return np.array([
            [-q ** n * pn(2 * n - 1), q ** (n + 0.5) * pn(2 * n) * x],
            [-q ** (n - 0.5) * pn(2 * n) / x, q ** n * pn(2 * n + 1)],
        ])
    return np.array([
        [q ** n * pn(2 * n + 1), -q ** (n - 0.5) * pn(2 * n) * x],
        [q ** (n + 0.5) * pn(2 * n) / x, -q ** n * pn(2 * n - 1)],
    ])


def power_product(params: DihedralParams, kind: ProductKind, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """字面矩阵乘积与闭式预测

    Returns:
        (computed, predicted)
    """
    if n < 0:
        raise DihedralError("n 不能为负", ErrorCode.INVALID_PARAMETERS, {"n": n})
    kind = ProductKind(kind)
    a, b = dihedral_matrices(params)
    if kind in (ProductKind.B_AB, ProductKind.AB):
        power = np.linalg.matrix_power(a @ b, n)
    else:
        power = np.linalg.matrix_power(b @ a, n)
    if kind is ProductKind.B_AB:
        computed = b @ power
    elif kind is ProductKind.A_BA:
        computed = a @ power
    else:
        computed = power
    return computed, _predicted(params, kind, n)


def alternating_product(first: np.ndarray, second: np.ndarray, factors: int) -> np.ndarray:
    """first·second·first··· 共 factors 个因子"""
    result = np.eye(first.shape[0])
    for i in range(factors):
        result = result @ (first if i % 2 == 0 else second)
    return result


def braid_check(k: int, m: int, q: float = 1.0, X: float = 1.0, gamma: Optional[float] = None) -> bool:
    """γ = cos(kπ/m) 时 ABA··· = BAB···（各 m 个因子）

    Args:
        gamma: 覆盖 γ，用于构造反例
    """
    if not 0 < k < m:
        raise DihedralError("要求 0 < k < m", ErrorCode.INVALID_PARAMETERS, {"k": k, "m": m})
    g = math.cos(k * math.pi / m) if gamma is None else gamma
    a, b = dihedral_matrices(DihedralParams(g, q, X))
    return matrices_agree(alternating_product(a, b, m), alternating_product(b, a, m))


# ---------------------------------------------------------------------------
# 阶
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _coprime_angles(m_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """按 m 升序排列的 cos(kπ/m)，gcd(k, m) = 1"""
    values, orders = [], []
    for m in range(2, m_max + 1):
        ks = np.arange(1, m)
        ks = ks[np.gcd(ks, m) == 1]
        values.append(np.cos(ks * np.pi / m))
        orders.append(np.full(ks.size, m))
    return np.concatenate(values), np.concatenate(orders)


def literal_order(matrix: np.ndarray, bound: int, rel: float = RELATIVE_TOLERANCE) -> Optional[int]:
    """矩阵的最小正幂等于单位阵的指数；上界内没有则返回 None

    幂的元素超过 POWER_LIMIT 时提前返回 None。
    """
    identity = np.eye(matrix.shape[0])
    power = identity
    for n in range(1, bound + 1):
        power = power @ matrix
        if matrices_agree(power, identity, rel):
            return n
        if not float(np.max(np.abs(power))) <= POWER_LIMIT:
            logger.debug("矩阵幂无界，停止迭代", extra={"power": n})
            return None
    return None


def order_of_AB(
        gamma: float,
        eps: float = DEFAULT_TOLERANCE,
        m_max: int = DEFAULT_M_MAX,
        n_max: int = DEFAULT_N_MAX,
) -> OrderResult:
    """q = 1 时 AB 的阶

    γ = cos(kπ/m)（gcd(k, m) = 1）时为 Finite(m)；否则按字面幂检验到 n_max。
    """
    values, orders = _coprime_angles(m_max)
    hits = np.flatnonzero(np.abs(values - gamma) <= eps)
    if hits.size:
        return OrderResult.finite(int(orders[hits[0]]))

    a, b = dihedral_matrices(DihedralParams(gamma))
    found = literal_order(a @ b, n_max)
    if found is None:
        return OrderResult.infinite(n_max)
    logger.warning(
        f"γ = {gamma!r} 不在 cos(kπ/m) 表中，但 (AB)^{found} 接近单位阵",
        extra={"gamma": gamma, "power": found},
    )
    return OrderResult.inconclusive(n_max)
