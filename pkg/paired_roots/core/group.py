"""群元素模块

群元素以字加上两侧矩阵作用表示；长度、N_i(w)、N̄(w)、Cayley 图枚举与二元乘积的阶。
"""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from paired_roots.core.dihedral import literal_order
from paired_roots.core.roots import (
    RootClass, RootPair, SignClass, SignedRootSet, _RootIndex, _chunks, classify_rows,
    generate_roots, root_class, sign_of,
)
from paired_roots.models import ElementRecord, OrderResult
from paired_roots.utils.config import DEFAULT_GROUP_CAP, DEFAULT_MAX_LENGTH, DEFAULT_ORDER_BOUND, DEFAULT_THREADS
from paired_roots.utils.exceptions import CapExceededError, ErrorCode, GroupError
from paired_roots.utils.logging_config import get_logger, performance_monitor
from paired_roots.utils.worker_pool import LayerWorkerPool

if TYPE_CHECKING:
    from paired_roots.core.datum import CoxeterDatum

logger = get_logger(__name__)

Word = Union[str, Sequence[Union[int, str]]]


class Element:
    """群元素：字 + V₁、V₂ 上的矩阵"""

    __slots__ = ("datum", "word", "act1", "act2", "_length")

    def __init__(self, datum: "CoxeterDatum", word: Tuple[int, ...], act1: np.ndarray, act2: np.ndarray,
                 length: Optional[int] = None):
        self.datum = datum
        self.word = tuple(word)
        self.act1 = act1
        self.act2 = act2
        self._length = length

    def __mul__(self, other: "Element") -> "Element":
        return Element(self.datum, self.word + other.word, self.act1 @ other.act1, self.act2 @ other.act2)

    def inverse(self) -> "Element":
        return element_from_word(self.datum, self.word[::-1])

    def act(self, v, side: int = 1) -> np.ndarray:
        return (self.act1 if side == 1 else self.act2) @ np.asarray(v, dtype=float)

    def is_identity(self, eps: Optional[float] = None) -> bool:
        eps = self.datum.tolerance if eps is None else eps
        scale = max(1.0, float(np.max(np.abs(self.act1))))
        return float(np.max(np.abs(self.act1 - np.eye(self.act1.shape[0])))) <= eps * scale

    @property
    def cached_length(self) -> Optional[int]:
        return self._length

    def labels(self) -> List[str]:
        return [self.datum.labels[s] for s in self.word]

    def __repr__(self) -> str:
        return f"Element({''.join(self.labels()) or 'e'})"


@dataclass(frozen=True, eq=False)
class Reflection:
    """r_x = w·r_seed·w⁻¹，其中 x = w·α_seed"""
    element: Element
    root_class: RootClass
    root_pair: RootPair

    def __eq__(self, other) -> bool:
        return isinstance(other, Reflection) and self.root_class == other.root_class

    def __hash__(self) -> int:
        return hash(self.root_class)


def _parse_word(datum: "CoxeterDatum", word: Word) -> Tuple[int, ...]:
    if isinstance(word, str):
        tokens = word.replace(",", " ").split()
        if len(tokens) == 1 and tokens[0] not in datum.labels and all(ch in datum.labels for ch in tokens[0]):
            tokens = list(tokens[0])
        word = tokens
    return tuple(datum.index(s) for s in word)


def element_from_word(datum: "CoxeterDatum", word: Word = ()) -> Element:
    """按字依次相乘生成元矩阵；空字为单位元

    Raises:
        DatumError: 未知生成元（UNKNOWN_GENERATOR）
    """
    indices = _parse_word(datum, word)
    d1, d2 = datum.dims
    act1, act2 = np.eye(d1), np.eye(d2)
    for s in indices:
        act1 = act1 @ datum.rho1(s)
        act2 = act2 @ datum.rho2(s)
    return Element(datum, indices, act1, act2)


def identity(datum: "CoxeterDatum") -> Element:
    return element_from_word(datum, ())


def equals(e1: Element, e2: Element, eps: Optional[float] = None) -> bool:
    """按 V₁ 上的矩阵判等"""
    eps = e1.datum.tolerance if eps is None else eps
    scale = max(1.0, float(np.max(np.abs(e1.act1))), float(np.max(np.abs(e2.act1))))
    return float(np.max(np.abs(e1.act1 - e2.act1))) <= eps * scale


# ---------------------------------------------------------------------------
# 长度与 N 集
# ---------------------------------------------------------------------------

def _descent(datum: "CoxeterDatum", e: Element) -> List[int]:
    current = e
    steps: List[int] = []
    while not current.is_identity():
        for s in range(datum.n):
            if sign_of(datum, current.act1 @ datum.alpha[s], 1) is SignClass.NEGATIVE:
                break
        else:
            raise GroupError(
                f"非单位元 {e!r} 没有下降生成元",
                ErrorCode.NO_DESCENT,
                {"word": list(e.word), "steps": len(steps)},
            )
        steps.append(s)
        current = current * element_from_word(datum, (s,))
        if len(steps) > len(e.word):
            raise GroupError(
                f"下降步数超过字长 {len(e.word)}",
                ErrorCode.NO_DESCENT,
                {"word": list(e.word)},
            )
    return steps


def length(datum: "CoxeterDatum", e: Element) -> int:
    """贪心下降：反复选下标最小的 s 使 e·α_s 为负根，令 e ← e·r_s

    Raises:
        GroupError: 非单位元找不到下降（NO_DESCENT）
    """
    if e.cached_length is None:
        e._length = len(_descent(datum, e))
    return e.cached_length


def reduced_word(datum: "CoxeterDatum", e: Element) -> List[str]:
    """下降过程给出的既约字"""
    steps = _descent(datum, e)
    e._length = len(steps)
    return [datum.labels[s] for s in reversed(steps)]


def _roots_to_depth(datum: "CoxeterDatum", depth: int) -> SignedRootSet:
    return generate_roots(datum, max_depth=depth, force=True)


def n_set(datum: "CoxeterDatum", e: Element, side: int = 1, roots: Optional[SignedRootSet] = None) -> Set[RootClass]:
    """N_i(w) = { ẑ : z ∈ Φ⁺_i，w·z ∈ Φ⁻_i }

    Args:
        roots: 已生成的根集；为空时枚举到深度 ℓ(w)
    """
    if roots is None:
        roots = _roots_to_depth(datum, length(datum, e))
    positives = roots.positive_matrix(side)
    if positives.shape[0] == 0:
        return set()
    images = positives @ (e.act1 if side == 1 else e.act2).T
    signs = classify_rows(datum, images, side)
    return {
        root_class(positives[i], datum.tolerance)
        for i, sign in enumerate(signs) if sign is SignClass.NEGATIVE
    }


def reflection_of(datum: "CoxeterDatum", pair: RootPair) -> Reflection:
    """由根对的见证字构造反射"""
    word = pair.witness + (pair.seed,) + pair.witness[::-1]
    return Reflection(element_from_word(datum, word), root_class(pair.x, datum.tolerance), pair)


def nbar(datum: "CoxeterDatum", e: Element, roots: Optional[SignedRootSet] = None) -> Set[Reflection]:
    """N̄(w) = { r_x : x̂ ∈ N₁(w) }"""
    if roots is None:
        roots = _roots_to_depth(datum, length(datum, e))
    result = set()
    for pair in roots.positive_pairs():
        if sign_of(datum, e.act1 @ pair.x, 1) is SignClass.NEGATIVE:
            result.add(reflection_of(datum, pair))
    return result


def apply_to_class(e: Element, cls: RootClass, side: int = 1) -> RootClass:
    """w·ẑ"""
    return root_class(e.act(cls.representative, side), e.datum.tolerance)


def symmetric_difference_identity_check(
        datum: "CoxeterDatum",
        e1: Element,
        e2: Element,
        side: int = 1,
        roots: Optional[SignedRootSet] = None,
) -> bool:
    """N(w₁w₂) = w₂⁻¹·N(w₁) ∆ N(w₂)"""
    product = e1 * e2
    if roots is None:
        roots = _roots_to_depth(datum, len(product.word))
    lhs = n_set(datum, product, side, roots)
    inverse = e2.inverse()
    moved = {apply_to_class(inverse, cls, side) for cls in n_set(datum, e1, side, roots)}
    rhs = moved ^ n_set(datum, e2, side, roots)
    return lhs == rhs


def exchange_check(datum: "CoxeterDatum", e: Element, pair: RootPair) -> bool:
    """对正根 x：ℓ(w·r_x) > ℓ(w) 当且仅当 w·x 为正根"""
    longer = length(datum, e * reflection_of(datum, pair).element) > length(datum, e)
    positive = sign_of(datum, e.act1 @ pair.x, 1) is SignClass.POSITIVE
    return longer == positive


# ---------------------------------------------------------------------------
# 枚举与阶
# ---------------------------------------------------------------------------

@dataclass
class GroupEnumeration:
    """Cayley 图 BFS 的结果；元素的 cached_length 为 BFS 距离"""
    elements: List[Element] = field(default_factory=list)
    complete: bool = False
    max_length: int = 0

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Element]:
        return iter(self.elements)


def _products(datum: "CoxeterDatum", chunk: Sequence[Element]) -> List[Element]:
    out = []
    for element in chunk:
        for s in range(datum.n):
            out.append(Element(
                datum, element.word + (s,), element.act1 @ datum.rho1(s), element.act2 @ datum.rho2(s),
            ))
    return out


@performance_monitor("enumerate_group")
def enumerate_group(
        datum: "CoxeterDatum",
        max_length: int = DEFAULT_MAX_LENGTH,
        cap: int = DEFAULT_GROUP_CAP,
        threads: int = DEFAULT_THREADS,
) -> GroupEnumeration:
    """Cayley 图上的逐层 BFS，按矩阵去重

    Raises:
        CapExceededError: 元素数达到上限；partial 为截断的结果
    """
    result = GroupEnumeration()
    index = _RootIndex(datum.tolerance)

    start = identity(datum)
    start._length = 0
    index.add(start.act1.ravel())
    result.elements.append(start)

    frontier = [start]
    for layer in range(1, max_length + 1):
        batches = LayerWorkerPool.map_layer(lambda chunk: _products(datum, chunk), _chunks(frontier, threads), threads)
        new: List[Element] = []
        for batch in batches:
            for element in batch:
                flat = element.act1.ravel()
                if index.find(flat) is not None:
                    continue
                if len(result.elements) >= cap:
                    raise CapExceededError(
                        f"群元素数达到上限 {cap}",
                        partial=result,
                        details={"cap": cap, "length": layer},
                    )
                element._length = layer
                index.add(flat)
                result.elements.append(element)
                new.append(element)
        if not new:
            result.complete = True
            break
        result.max_length = layer
        frontier = new

    logger.info(
        f"群枚举完成: {len(result)} 个元素",
        extra={"elements": len(result), "max_length": result.max_length, "complete": result.complete},
    )
    return result


def conjugate_root_classes(datum: "CoxeterDatum", elements: Sequence[Element]) -> Set[RootClass]:
    """{ w·α̂_s }：共轭生成元得到的全部反射类"""
    return {
        root_class(e.act1 @ datum.alpha[s], datum.tolerance)
        for e in elements for s in range(datum.n)
    }


def order_of_product(datum: "CoxeterDatum", s, t, bound: int = DEFAULT_ORDER_BOUND) -> OrderResult:
    """ρ₁(s)ρ₁(t) 的阶：Finite(m) 或 Infinite(bound)"""
    found = literal_order(datum.rho1(s) @ datum.rho1(t), bound)
    if found is None:
        return OrderResult.infinite(bound)
    return OrderResult.finite(found)


def element_record(datum: "CoxeterDatum", e: Element, roots: Optional[SignedRootSet] = None) -> ElementRecord:
    reduced = reduced_word(datum, e)
    classes = n_set(datum, e, 1, roots)
    return ElementRecord(
        word=e.labels(),
        reduced_word=reduced,
        length=len(reduced),
        n_set=[cls.representative.tolist() for cls in sorted(classes, key=lambda c: c.key)],
    )
