"""根系模块

两侧空间上的反射作用、(x, φ(x)) 的联合轨道生成、符号分类、锥成员判定、
射影等价类以及正负分解检验。
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from paired_roots.models import RootRecord, RootSetSummary
from paired_roots.utils.config import (
    DEDUP_GRID, DEFAULT_DEPTH, DEFAULT_M_MAX, DEFAULT_ROOT_CAP, DEFAULT_THREADS, DEFAULT_TOLERANCE,
)
from paired_roots.utils.exceptions import CapExceededError, DatumError, ErrorCode, RootSystemError
from paired_roots.utils.logging_config import get_logger, performance_monitor
from paired_roots.utils.worker_pool import LayerWorkerPool

if TYPE_CHECKING:
    from paired_roots.core.datum import CoxeterDatum

logger = get_logger(__name__)

# 线性规划求解器自身的可行性精度
LP_TOLERANCE = 1e-7


class SignClass(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    MIXED = "mixed"


@dataclass(frozen=True, eq=False)
class RootPair:
    """根 x ∈ Φ₁ 与其伙伴 φ(x) ∈ Φ₂

    witness 为生成元下标序列 w，满足 x = ρ₁(w[0])···ρ₁(w[-1])·α_seed，y 同理。
    """
    x: np.ndarray
    y: np.ndarray
    depth: int = 0
    witness: Tuple[int, ...] = ()
    seed: int = 0

    def negated(self) -> "RootPair":
        return RootPair(-self.x, -self.y, self.depth, self.witness, self.seed)


@dataclass(frozen=True, eq=False)
class RootClass:
    """根在非零数乘下的等价类

    representative 的最大模分量为 ±1，且第一个非零分量为正；
    orientation 记录原向量相对 representative 的符号。
    """
    key: Tuple[int, ...]
    representative: np.ndarray = field(repr=False)
    orientation: int = 1

    def __eq__(self, other) -> bool:
        return isinstance(other, RootClass) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)


def _quantize(v: np.ndarray, grid: float = DEDUP_GRID) -> Tuple[int, ...]:
    return tuple(int(k) for k in np.rint(v / grid).astype(np.int64))


def _scale(v: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(v)))) if v.size else 1.0


def root_class(v, eps: float = DEFAULT_TOLERANCE, grid: float = DEDUP_GRID) -> RootClass:
    """向量所在的等价类

    Raises:
        RootSystemError: 零向量（ZERO_VECTOR）
    """
    v = np.asarray(v, dtype=float)
    peak = float(np.max(np.abs(v))) if v.size else 0.0
    if peak <= eps:
        raise RootSystemError("零向量没有等价类", ErrorCode.ZERO_VECTOR)
    rep = v / peak
    key = _quantize(rep, grid)
    orientation = 1
    for entry in key:
        if entry != 0:
            orientation = 1 if entry > 0 else -1
            break
    if orientation < 0:
        rep = -rep
        key = tuple(-entry for entry in key)
    return RootClass(key, rep, orientation)


# ---------------------------------------------------------------------------
# 配对与反射
# ---------------------------------------------------------------------------

def _as_vector(datum: "CoxeterDatum", v, side: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    dim = datum.dims[side - 1]
    if v.shape != (dim,):
        raise DatumError(
            f"向量维数 {v.shape} 与 V{side} 的维数 {dim} 不符",
            ErrorCode.DIMENSION_MISMATCH,
            {"side": side, "expected": dim},
        )
    return v


def pairing_value(datum: "CoxeterDatum", x, y) -> float:
    """⟨x, y⟩"""
    return datum.pair(x, y)


def reflect1(datum: "CoxeterDatum", s, x) -> np.ndarray:
    """ρ₁(s)(x) = x − 2⟨x, β_s⟩α_s"""
    return datum.rho1(s) @ _as_vector(datum, x, 1)


def reflect2(datum: "CoxeterDatum", s, y) -> np.ndarray:
    """ρ₂(s)(y) = y − 2⟨α_s, y⟩β_s"""
    return datum.rho2(s) @ _as_vector(datum, y, 2)


def reflect_by_root(datum: "CoxeterDatum", r: RootPair, x) -> np.ndarray:
    """r_x 作用在 V₁ 上：x ↦ x − 2⟨x, φ(r)⟩·r"""
    x = _as_vector(datum, x, 1)
    return x - 2.0 * datum.pair(x, r.y) * r.x


def reflect_pair_by_root(datum: "CoxeterDatum", r: RootPair, x, y) -> Tuple[np.ndarray, np.ndarray]:
    """r 同时作用在两侧"""
    x = _as_vector(datum, x, 1)
    y = _as_vector(datum, y, 2)
    return x - 2.0 * datum.pair(x, r.y) * r.x, y - 2.0 * datum.pair(r.x, y) * r.y


def root_reflection_matrices(datum: "CoxeterDatum", r: RootPair) -> Tuple[np.ndarray, np.ndarray]:
    """r 在两侧的矩阵 (M₁, M₂)"""
    d1, d2 = datum.dims
    m1 = np.eye(d1) - 2.0 * np.outer(r.x, datum.form @ r.y)
    m2 = np.eye(d2) - 2.0 * np.outer(r.y, datum.form.T @ r.x)
    return m1, m2


def simple_pair(datum: "CoxeterDatum", s) -> RootPair:
    i = datum.index(s)
    return RootPair(np.array(datum.alpha[i]), np.array(datum.beta[i]), 0, (), i)


# ---------------------------------------------------------------------------
# 锥与符号
# ---------------------------------------------------------------------------

def cone_membership(generators, v, eps: float = DEFAULT_TOLERANCE) -> bool:
    """v ∈ PLC(generators)：v = Σ c_a·a，c_a ≥ 0 且某个 c_a > 0

    以第一阶段线性规划求解：最小化 |G·c − v| 的松弛量。v ≈ 0 时附加 Σc = 1。
    """
    gens = np.atleast_2d(np.asarray(generators, dtype=float))
    v = np.asarray(v, dtype=float)
    k, d = gens.shape
    if k == 0:
        raise RootSystemError("锥的生成元不能为空", ErrorCode.INVALID_PARAMETER)

    # 变量顺序：c (k 个)，s⁺ (d 个)，s⁻ (d 个)
    a_eq = np.hstack([gens.T, np.eye(d), -np.eye(d)])
    b_eq = v.copy()
    if float(np.max(np.abs(v))) <= eps:
        a_eq = np.vstack([a_eq, np.concatenate([np.ones(k), np.zeros(2 * d)])])
        b_eq = np.append(b_eq, 1.0)
    objective = np.concatenate([np.zeros(k), np.ones(2 * d)])

    result = linprog(objective, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if result.status != 0:
        logger.debug(f"锥成员线性规划未收敛: {result.message}")
        return False
    return float(result.fun) <= max(eps, LP_TOLERANCE) * _scale(v)


def zero_in_cone(generators, eps: float = DEFAULT_TOLERANCE) -> bool:
    """0 ∈ PLC(generators)"""
    gens = np.atleast_2d(np.asarray(generators, dtype=float))
    return cone_membership(gens, np.zeros(gens.shape[1]), eps)


def _sign_standard(v: np.ndarray, eps: float) -> SignClass:
    thr = eps * _scale(v)
    if np.all(v >= -thr) and np.any(v > thr):
        return SignClass.POSITIVE
    if np.all(v <= thr) and np.any(v < -thr):
        return SignClass.NEGATIVE
    return SignClass.MIXED


def sign_of(datum: "CoxeterDatum", v, side: int = 1) -> SignClass:
    """Positive / Negative / Mixed

    Raises:
        RootSystemError: 零向量（ZERO_VECTOR）
    """
    v = _as_vector(datum, v, side)
    eps = datum.tolerance
    if float(np.max(np.abs(v))) <= eps:
        raise RootSystemError("零向量没有符号", ErrorCode.ZERO_VECTOR)
    if datum.is_standard:
        return _sign_standard(v, eps)
    gens = datum.alpha if side == 1 else datum.beta
    if cone_membership(gens, v, eps):
        return SignClass.POSITIVE
    if cone_membership(gens, -v, eps):
        return SignClass.NEGATIVE
    return SignClass.MIXED


def classify_rows(datum: "CoxeterDatum", rows: np.ndarray, side: int = 1) -> List[SignClass]:
    """逐行分类；标准模式下向量化"""
    rows = np.atleast_2d(rows)
    if not datum.is_standard:
        return [sign_of(datum, row, side) for row in rows]
    eps = datum.tolerance
    scales = np.maximum(1.0, np.max(np.abs(rows), axis=1, initial=0.0))
    if np.any(np.max(np.abs(rows), axis=1, initial=0.0) <= eps):
        raise RootSystemError("零向量没有符号", ErrorCode.ZERO_VECTOR)
    thr = (eps * scales)[:, None]
    positive = np.all(rows >= -thr, axis=1) & np.any(rows > thr, axis=1)
    negative = np.all(rows <= thr, axis=1) & np.any(rows < -thr, axis=1)
    return [
        SignClass.POSITIVE if p else SignClass.NEGATIVE if q else SignClass.MIXED
        for p, q in zip(positive, negative)
    ]


# ---------------------------------------------------------------------------
# 根集
# ---------------------------------------------------------------------------

class _RootIndex:
    """两级去重：量化键分桶，桶内按 ε 比较"""

    def __init__(self, eps: float, grid: float = DEDUP_GRID):
        self.eps = eps
        self.grid = grid
        self._buckets: Dict[Tuple[int, ...], List[int]] = {}
        self._vectors: List[np.ndarray] = []

    def find(self, x: np.ndarray) -> Optional[int]:
        for idx in self._buckets.get(_quantize(x, self.grid), ()):
            if float(np.max(np.abs(self._vectors[idx] - x))) <= self.eps * _scale(x):
                return idx
        return None

    def add(self, x: np.ndarray) -> int:
        idx = len(self._vectors)
        self._vectors.append(x)
        self._buckets.setdefault(_quantize(x, self.grid), []).append(idx)
        return idx


class SignedRootSet:
    """按深度截断、去重后的根对集合及其符号分类"""

    def __init__(self, datum: "CoxeterDatum"):
        self.datum = datum
        self.pairs: List[RootPair] = []
        self.signs: List[SignClass] = []
        self.signs2: List[SignClass] = []
        self.depth_reached = 0
        self.complete = False
        self.cap_exceeded = False
        self._index = _RootIndex(datum.tolerance)
        self._classes: Optional[Dict[RootClass, List[int]]] = None

    def __len__(self) -> int:
        return len(self.pairs)

    def _add(self, pair: RootPair, sign: SignClass, sign2: SignClass) -> int:
        self.pairs.append(pair)
        self.signs.append(sign)
        self.signs2.append(sign2)
        self._classes = None
        return self._index.add(pair.x)

    def find(self, x) -> Optional[int]:
        """x 在集合中的下标"""
        return self._index.find(np.asarray(x, dtype=float))

    def _where(self, sign: SignClass) -> List[int]:
        return [i for i, value in enumerate(self.signs) if value is sign]

    @property
    def positives(self) -> List[int]:
        return self._where(SignClass.POSITIVE)

    @property
    def negatives(self) -> List[int]:
        return self._where(SignClass.NEGATIVE)

    @property
    def mixed(self) -> List[int]:
        return [i for i in range(len(self.pairs))
                if self.signs[i] is SignClass.MIXED or self.signs2[i] is SignClass.MIXED]

    @property
    def classes(self) -> Dict[RootClass, List[int]]:
        """等价类到成员下标的表"""
        if self._classes is None:
            table: Dict[RootClass, List[int]] = {}
            for i, pair in enumerate(self.pairs):
                table.setdefault(root_class(pair.x, self.datum.tolerance), []).append(i)
            self._classes = table
        return self._classes

    def positive_pairs(self) -> List[RootPair]:
        return [self.pairs[i] for i in self.positives]

    def positive_matrix(self, side: int = 1) -> np.ndarray:
        """正根按行排成的矩阵"""
        pairs = self.positive_pairs()
        d = self.datum.dims[side - 1]
        if not pairs:
            return np.zeros((0, d))
        return np.array([p.x if side == 1 else p.y for p in pairs])

    def records(self) -> List[RootRecord]:
        labels = self.datum.labels
        return [
            RootRecord(
                side1=pair.x.tolist(),
                side2=pair.y.tolist(),
                depth=pair.depth,
                sign=self.signs[i].value,
                sign2=self.signs2[i].value,
                witness=[labels[s] for s in pair.witness],
                seed=labels[pair.seed],
            )
            for i, pair in enumerate(self.pairs)
        ]

    def summary(self) -> RootSetSummary:
        return RootSetSummary(
            count=len(self.pairs),
            positives=len(self.positives),
            negatives=len(self.negatives),
            mixed=len(self.mixed),
            depth_reached=self.depth_reached,
            complete=self.complete,
            cap_exceeded=self.cap_exceeded,
        )


def _expand_chunk(datum: "CoxeterDatum", chunk: Sequence[RootPair]) -> List[Tuple[RootPair, int, np.ndarray, np.ndarray]]:
    """一个分块在所有生成元下的像，保持 (pair, s) 的顺序"""
    xs = np.array([p.x for p in chunk])
    ys = np.array([p.y for p in chunk])
    images = []
    for s in range(datum.n):
        images.append((xs @ datum.rho1(s).T, ys @ datum.rho2(s).T))
    out = []
    for j, pair in enumerate(chunk):
        for s in range(datum.n):
            x_img, y_img = images[s]
            out.append((pair, s, x_img[j], y_img[j]))
    return out


def _chunks(items: Sequence, parts: int) -> List[Sequence]:
    if parts <= 1 or len(items) <= 1:
        return [items]
    size = math.ceil(len(items) / parts)
    return [items[i:i + size] for i in range(0, len(items), size)]


@performance_monitor("generate_roots")
def generate_roots(
        datum: "CoxeterDatum",
        max_depth: int = DEFAULT_DEPTH,
        cap: int = DEFAULT_ROOT_CAP,
        force: bool = False,
        threads: int = DEFAULT_THREADS,
        stop_on_mixed: bool = False,
        m_max: int = DEFAULT_M_MAX,
) -> SignedRootSet:
    """从单根对出发逐层 BFS 生成根对

    Args:
        datum: Coxeter 数据
        max_depth: 最大深度
        cap: 根对数上限
        force: 跳过校验（用于寻找反例）
        threads: 每层并行的线程数
        stop_on_mixed: 遇到第一个混合根即停止
        m_max: 校验键阶时识别的最大 m

    Raises:
        DatumError: 数据未通过校验且未指定 force
        CapExceededError: 达到上限；partial 为截断的结果
    """
    if not force:
        from paired_roots.core.datum import validate

        report = validate(datum, m_max)
        if not report.passed:
            raise DatumError(
                f"数据未通过校验: {', '.join(report.failed_conditions())}",
                ErrorCode.INVALID_DATUM,
                {"failed": report.failed_conditions()},
            )

    eps = datum.tolerance
    roots = SignedRootSet(datum)

    def accept(pair: RootPair) -> bool:
        """加入新根对；返回 False 表示应当停止"""
        if len(roots) >= cap:
            roots.cap_exceeded = True
            raise CapExceededError(
                f"根对数达到上限 {cap}",
                partial=roots,
                details={"cap": cap, "depth": pair.depth},
            )
        sign = sign_of(datum, pair.x, 1)
        sign2 = sign_of(datum, pair.y, 2)
        roots._add(pair, sign, sign2)
        return not (stop_on_mixed and SignClass.MIXED in (sign, sign2))

    frontier: List[RootPair] = []
    for s in range(datum.n):
        pair = simple_pair(datum, s)
        if roots.find(pair.x) is None:
            frontier.append(pair)
            if not accept(pair):
                return roots

    for depth in range(1, max_depth + 1):
        chunks = _chunks(frontier, threads)
        layer = LayerWorkerPool.map_layer(lambda chunk: _expand_chunk(datum, chunk), chunks, threads)
        new: List[RootPair] = []
        for candidates in layer:
            for parent, s, x, y in candidates:
                if float(np.max(np.abs(x))) <= eps:
                    logger.debug("反射得到零向量，已跳过", extra={"depth": depth, "generator": s})
                    continue
                if roots.find(x) is not None:
                    continue
                pair = RootPair(x, y, depth, (s,) + parent.witness, parent.seed)
                new.append(pair)
                if not accept(pair):
                    roots.depth_reached = depth
                    return roots
        if not new:
            roots.complete = True
            break
        roots.depth_reached = depth
        frontier = new

    logger.info(
        f"根系生成完成: {len(roots)} 个根对",
        extra={"roots": len(roots), "depth": roots.depth_reached, "complete": roots.complete},
    )
    return roots


# ---------------------------------------------------------------------------
# 分解检验
# ---------------------------------------------------------------------------

@dataclass
class DecompositionResult:
    """Holds(depth_reached, complete) 或 Counterexample(pair)"""
    holds: bool
    depth_reached: int
    complete: bool
    counterexample: Optional[RootPair] = None
    side: Optional[int] = None
    roots_checked: int = 0


def decomposition_check(
        datum: "CoxeterDatum",
        max_depth: int = DEFAULT_DEPTH,
        cap: int = DEFAULT_ROOT_CAP,
        threads: int = DEFAULT_THREADS,
) -> DecompositionResult:
    """检验 Φ_i = Φ⁺_i ⊎ Φ⁻_i（两侧同时检验，不要求数据有效）"""
    try:
        roots = generate_roots(datum, max_depth, cap, force=True, threads=threads, stop_on_mixed=True)
    except CapExceededError as e:
        roots = e.partial

    for i in roots.mixed:
        side = 1 if roots.signs[i] is SignClass.MIXED else 2
        pair = roots.pairs[i]
        logger.info(
            "找到混合根",
            extra={"depth": pair.depth, "side": side, "witness": list(pair.witness)},
        )
        return DecompositionResult(False, roots.depth_reached, False, pair, side, len(roots))

    return DecompositionResult(True, roots.depth_reached, roots.complete, roots_checked=len(roots))
