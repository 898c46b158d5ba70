"""反射子群模块

反射子群 W′ 的闭包、根子系统 Φ(W′)、由 N 集判据给出的典范根 Δ(W′)、
S(W′) 的暴力验证、子群长度 ℓ_{W′}、典范根集的校验以及 Δ 中根对的配对分类。
"""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from paired_roots.core.datum import bond_order, coxeter_matrix_of, coxeter_matrix_to_file, induced_datum
from paired_roots.core.dihedral import alternating_product, literal_order
from paired_roots.core.group import (
    Element, Reflection, apply_to_class, identity, n_set, nbar, reflection_of,
)
from paired_roots.core.roots import (
    RootClass, RootPair, SignClass, SignedRootSet, _RootIndex, generate_roots,
    reflect_pair_by_root, root_class, root_reflection_matrices, sign_of,
)
from paired_roots.models import BondLabel, CanonicalReport, OrderResult, PairReport, SubgroupReport
from paired_roots.utils.config import (
    DEFAULT_CLOSURE_DEPTH, DEFAULT_DEPTH, DEFAULT_ELEMENT_CAP, DEFAULT_M_MAX, DEFAULT_ORDER_BOUND, DEFAULT_ROOT_CAP,
)
from paired_roots.utils.exceptions import (
    CapExceededError, DatumError, ErrorCode, RootSystemError, SubgroupError, safe_execute,
)
from paired_roots.utils.logging_config import get_logger, performance_monitor

if TYPE_CHECKING:
    from paired_roots.core.datum import CoxeterDatum

logger = get_logger(__name__)


@dataclass(frozen=True)
class SubgroupCaps:
    """子群计算的各项上限"""
    closure_depth: int = DEFAULT_CLOSURE_DEPTH
    element_cap: int = DEFAULT_ELEMENT_CAP
    root_depth: int = DEFAULT_DEPTH
    root_cap: int = DEFAULT_ROOT_CAP


@dataclass
class ReflectionSubgroup:
    """由若干反射生成的子群 W′"""
    parent: "CoxeterDatum"
    parent_roots: SignedRootSet
    generators: List[Reflection]
    phi: Dict[RootClass, RootPair] = field(default_factory=dict)
    elements: Optional[List[Element]] = None
    delta: List[RootPair] = field(default_factory=list)
    complete: bool = False
    _element_index: Optional[_RootIndex] = field(default=None, repr=False)

    @property
    def phi_classes(self) -> Set[RootClass]:
        return set(self.phi)

    @property
    def is_finite(self) -> bool:
        return self.elements is not None

    def contains(self, e: Element) -> bool:
        """e ∈ W′（仅有限情形）"""
        if self._element_index is None:
            raise SubgroupError("子群元素未完全枚举", ErrorCode.INFINITE_CASE)
        return self._element_index.find(e.act1.ravel()) is not None

    def index_of(self, e: Element) -> Optional[int]:
        if self._element_index is None:
            return None
        return self._element_index.find(e.act1.ravel())


def _parent_roots(parent: "CoxeterDatum", caps: SubgroupCaps) -> SignedRootSet:
    try:
        return generate_roots(parent, caps.root_depth, caps.root_cap)
    except CapExceededError as e:
        logger.warning("父根系在上限处截断", extra={"cap": caps.root_cap})
        return e.partial


def positive_representative(roots: SignedRootSet, x) -> Optional[RootPair]:
    """根集中与 ±x 相同的正根对"""
    x = np.asarray(x, dtype=float)
    for candidate in (x, -x):
        idx = roots.find(candidate)
        if idx is not None and roots.signs[idx] is SignClass.POSITIVE:
            return roots.pairs[idx]
    return None


def find_root(roots: SignedRootSet, coords) -> RootPair:
    """按坐标在根集中查找正根对

    Raises:
        RootSystemError: 坐标不是（已生成的）根（ROOT_NOT_FOUND）
    """
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (roots.datum.dims[0],):
        raise RootSystemError(
            f"根坐标维数 {coords.shape} 不符",
            ErrorCode.ROOT_NOT_FOUND,
            {"coords": coords.tolist()},
        )
    pair = positive_representative(roots, coords)
    if pair is None:
        raise RootSystemError(
            f"{coords.tolist()} 不在已生成的父根系中",
            ErrorCode.ROOT_NOT_FOUND,
            {"coords": coords.tolist(), "complete": roots.complete},
        )
    return pair


def _close_classes(
        parent: "CoxeterDatum",
        roots: SignedRootSet,
        seeds: Sequence[RootPair],
        depth: int,
) -> Tuple[Dict[RootClass, RootPair], bool]:
    """种子根在种子反射下的轨道 W′·seeds，返回 (类 → 正根对, 是否闭合)"""
    eps = parent.tolerance
    phi: Dict[RootClass, RootPair] = {}
    frontier: List[RootPair] = []
    for seed in seeds:
        cls = root_class(seed.x, eps)
        if cls not in phi:
            phi[cls] = seed
            frontier.append(seed)

    closed = False
    truncated = False
    for _ in range(depth):
        new: List[RootPair] = []
        for pair in frontier:
            for g in seeds:
                z, _w = reflect_pair_by_root(parent, g, pair.x, pair.y)
                cls = root_class(z, eps)
                if cls in phi:
                    continue
                rep = positive_representative(roots, z)
                if rep is None:
                    if roots.complete:
                        raise SubgroupError(
                            "闭包产生了父根系之外的向量",
                            ErrorCode.PRECONDITION_FAIL,
                            {"vector": z.tolist()},
                        )
                    truncated = True
                    continue
                phi[cls] = rep
                new.append(rep)
        if not new:
            closed = True
            break
        frontier = new
    return phi, closed and not truncated


def _enumerate_elements(
        parent: "CoxeterDatum",
        generators: Sequence[Reflection],
        cap: int,
) -> Tuple[List[Element], _RootIndex]:
    index = _RootIndex(parent.tolerance)
    start = identity(parent)
    index.add(start.act1.ravel())
    elements = [start]
    frontier = [start]
    while frontier:
        new = []
        for element in frontier:
            for g in generators:
                product = element * g.element
                flat = product.act1.ravel()
                if index.find(flat) is not None:
                    continue
                if len(elements) >= cap:
                    raise CapExceededError(
                        f"子群元素数达到上限 {cap}",
                        partial=elements,
                        details={"cap": cap},
                    )
                index.add(flat)
                elements.append(product)
                new.append(product)
        frontier = new
    return elements, index


@performance_monitor("subgroup_from_reflections")
def subgroup_from_reflections(
        parent: "CoxeterDatum",
        seeds: Sequence[RootPair],
        caps: Optional[SubgroupCaps] = None,
        roots: Optional[SignedRootSet] = None,
) -> ReflectionSubgroup:
    """由种子根的反射生成子群，并计算 Φ(W′) 与 Δ(W′)

    Args:
        parent: 父数据
        seeds: 父根系中的根对
        caps: 上限
        roots: 已生成的父根系

    Raises:
        SubgroupError: 种子为空或不在父根系中
        CapExceededError: 子群元素数超过上限
    """
    caps = caps or SubgroupCaps()
    if not seeds:
        raise SubgroupError("至少需要一个种子根", ErrorCode.PRECONDITION_FAIL)
    if roots is None:
        roots = _parent_roots(parent, caps)

    positive_seeds = []
    for seed in seeds:
        rep = positive_representative(roots, seed.x)
        if rep is None:
            raise SubgroupError(
                f"种子 {np.asarray(seed.x).tolist()} 不在父根系中",
                ErrorCode.PRECONDITION_FAIL,
                {"seed": np.asarray(seed.x).tolist()},
            )
        positive_seeds.append(rep)

    generators = list(dict.fromkeys(reflection_of(parent, seed) for seed in positive_seeds))
    phi, closed = _close_classes(parent, roots, [g.root_pair for g in generators], caps.closure_depth)

    subgroup = ReflectionSubgroup(parent, roots, generators, phi, complete=closed)
    if closed:
        subgroup.elements, subgroup._element_index = _enumerate_elements(parent, generators, caps.element_cap)
    subgroup.delta = canonical_roots(subgroup)

    logger.info(
        f"反射子群: {len(phi)} 个正根类，|Δ| = {len(subgroup.delta)}",
        extra={
            "phi_classes": len(phi),
            "delta": len(subgroup.delta),
            "elements": len(subgroup.elements) if subgroup.elements is not None else None,
            "complete": closed,
        },
    )
    return subgroup


# ---------------------------------------------------------------------------
# Φ(W′) 与 Δ(W′)
# ---------------------------------------------------------------------------

def _require_finite(subgroup: ReflectionSubgroup, what: str) -> None:
    if not subgroup.is_finite or not subgroup.parent_roots.complete:
        raise SubgroupError(f"{what} 仅适用于有限且完全枚举的情形", ErrorCode.INFINITE_CASE)


def phi_of(subgroup: ReflectionSubgroup) -> Set[RootClass]:
    """{ x̂ ∈ Φ̂⁺ : r_x ∈ W′ }，逐个检验父根系的正根

    Raises:
        SubgroupError: 父根系被截断（INCOMPLETE_PARENT）或子群无限（INFINITE_CASE）
    """
    if not subgroup.parent_roots.complete:
        raise SubgroupError("父根系未完全枚举", ErrorCode.INCOMPLETE_PARENT)
    _require_finite(subgroup, "phi_of")
    parent = subgroup.parent
    return {
        root_class(pair.x, parent.tolerance)
        for pair in subgroup.parent_roots.positive_pairs()
        if subgroup.contains(reflection_of(parent, pair).element)
    }


def canonical_roots(subgroup: ReflectionSubgroup) -> List[RootPair]:
    """Δ(W′) = { x : N(r_x) ∩ Φ̂(W′) = {x̂} }，按 Φ(W′) 的发现顺序"""
    parent = subgroup.parent
    classes = subgroup.phi_classes
    delta = []
    for cls, pair in subgroup.phi.items():
        flipped = n_set(parent, reflection_of(parent, pair).element, 1, subgroup.parent_roots)
        if flipped & classes == {cls}:
            delta.append(pair)
    return delta


def canonical_generators_bruteforce(subgroup: ReflectionSubgroup) -> Set[Reflection]:
    """S(W′) = { t ∈ T : N̄(t) ∩ W′ = {t} }

    Raises:
        SubgroupError: 无限情形（INFINITE_CASE）
    """
    _require_finite(subgroup, "canonical_generators_bruteforce")
    parent = subgroup.parent
    roots = subgroup.parent_roots
    reflections = [reflection_of(parent, pair) for pair in roots.positive_pairs()]
    in_subgroup = [t for t in reflections if subgroup.contains(t.element)]

    result = set()
    for t in in_subgroup:
        inside = {r for r in nbar(parent, t.element, roots) if subgroup.contains(r.element)}
        if inside == {t}:
            result.add(t)
    return result


def _restricted_length(subgroup: ReflectionSubgroup, e: Element) -> int:
    return len(n_set(subgroup.parent, e, 1, subgroup.parent_roots) & subgroup.phi_classes)


def sub_length(subgroup: ReflectionSubgroup, e: Element) -> int:
    """ℓ_{W′}(w) = |N(w) ∩ Φ̂(W′)|

    Raises:
        SubgroupError: w ∉ W′（NOT_IN_SUBGROUP）
    """
    if subgroup.is_finite and not subgroup.contains(e):
        raise SubgroupError(f"{e!r} 不在子群中", ErrorCode.NOT_IN_SUBGROUP, {"word": list(e.word)})
    return _restricted_length(subgroup, e)


def cayley_distances(subgroup: ReflectionSubgroup) -> List[int]:
    """(W′, S(W′)) 的 Cayley 图中各元素到单位元的距离，与 elements 对齐"""
    _require_finite(subgroup, "cayley_distances")
    parent = subgroup.parent
    steps = [reflection_of(parent, pair).element for pair in subgroup.delta]
    distances: List[Optional[int]] = [None] * len(subgroup.elements)
    start = identity(parent)
    distances[subgroup.index_of(start)] = 0
    frontier = [start]
    distance = 0
    while frontier:
        distance += 1
        new = []
        for element in frontier:
            for step in steps:
                product = element * step
                idx = subgroup.index_of(product)
                if idx is not None and distances[idx] is None:
                    distances[idx] = distance
                    new.append(product)
        frontier = new
    if any(d is None for d in distances):
        raise SubgroupError("Δ 生成的 Cayley 图不连通", ErrorCode.PRECONDITION_FAIL)
    return distances


def validate_canonical_set(parent: "CoxeterDatum", delta1: Sequence[RootPair], m_max: int = DEFAULT_M_MAX) -> bool:
    """检查 ⟨x, φ(x)⟩ = 1、⟨x, φ(x′)⟩ ≤ 0 以及乘积的键阶有效"""
    eps = parent.tolerance
    classes = [root_class(pair.x, eps) for pair in delta1]
    if len(set(classes)) != len(classes):
        return False
    for i, x in enumerate(delta1):
        if abs(parent.pair(x.x, x.y) - 1.0) > eps:
            return False
        for j in range(i + 1, len(delta1)):
            y = delta1[j]
            pxy = parent.pair(x.x, y.y)
            pyx = parent.pair(y.x, x.y)
            if pxy > eps or pyx > eps:
                return False
            try:
                if not bond_order(pxy, pyx, eps, m_max).is_valid:
                    return False
            except DatumError:
                return False
    return True


def conjugate_delta_check(subgroup: ReflectionSubgroup, x: RootPair) -> bool:
    """Δ(r_x W′ r_x) = r_x·Δ(W′)，x 为不在 Φ(W′) 中的单根

    Raises:
        SubgroupError: 前提不成立（PRECONDITION_FAIL）
    """
    parent = subgroup.parent
    eps = parent.tolerance
    is_simple = any(np.allclose(x.x, parent.alpha[s], atol=eps) for s in range(parent.n))
    if not is_simple:
        raise SubgroupError("x 必须是单根", ErrorCode.PRECONDITION_FAIL)
    if root_class(x.x, eps) in subgroup.phi_classes:
        raise SubgroupError("x 属于 Φ(W′)", ErrorCode.PRECONDITION_FAIL)

    conjugated_seeds = []
    for g in subgroup.generators:
        z, w = reflect_pair_by_root(parent, x, g.root_pair.x, g.root_pair.y)
        conjugated_seeds.append(RootPair(z, w))
    conjugated = subgroup_from_reflections(
        parent, conjugated_seeds, SubgroupCaps(), roots=subgroup.parent_roots,
    )

    expected = set()
    for pair in subgroup.delta:
        z, _w = reflect_pair_by_root(parent, x, pair.x, pair.y)
        expected.add(root_class(z, eps))
    return {root_class(p.x, eps) for p in conjugated.delta} == expected


def span_check(subgroup: ReflectionSubgroup) -> bool:
    """Φ(W′) = W′·Δ(W′)（按类比较）"""
    _require_finite(subgroup, "span_check")
    orbit = {
        apply_to_class(e, root_class(pair.x, subgroup.parent.tolerance))
        for e in subgroup.elements for pair in subgroup.delta
    }
    return orbit == subgroup.phi_classes


def restricted_nset_identity_check(subgroup: ReflectionSubgroup, w1: Element, w2: Element) -> bool:
    """w₁ ∈ W，w₂ ∈ W′：N(w₁w₂) ∩ Φ̂′ = w₂⁻¹(N(w₁) ∩ Φ̂′) ∆ (N(w₂) ∩ Φ̂′)"""
    parent = subgroup.parent
    roots = subgroup.parent_roots
    classes = subgroup.phi_classes
    lhs = n_set(parent, w1 * w2, 1, roots) & classes
    inverse = w2.inverse()
    moved = {apply_to_class(inverse, cls) for cls in n_set(parent, w1, 1, roots) & classes}
    return lhs == moved ^ (n_set(parent, w2, 1, roots) & classes)


def length_descent_check(subgroup: ReflectionSubgroup, w: Element) -> bool:
    """对每个 x̂ ∈ Φ̂(W′)：x̂ ∈ N(w) 当且仅当 ℓ_{W′}(w·r_x) < ℓ_{W′}(w)"""
    parent = subgroup.parent
    flipped = n_set(parent, w, 1, subgroup.parent_roots)
    base = _restricted_length(subgroup, w)
    for cls, pair in subgroup.phi.items():
        shorter = _restricted_length(subgroup, w * reflection_of(parent, pair).element) < base
        if (cls in flipped) != shorter:
            return False
    return True


# ---------------------------------------------------------------------------
# Δ 中根对的分类
# ---------------------------------------------------------------------------

def d34_report(
        subgroup: ReflectionSubgroup,
        m_max: int = DEFAULT_M_MAX,
        bound: int = DEFAULT_ORDER_BOUND,
) -> CanonicalReport:
    """Δ 中每对根的配对值、乘积、键阶与 r_x r_y 的矩阵阶"""
    parent = subgroup.parent
    eps = parent.tolerance
    report = CanonicalReport()
    delta = subgroup.delta
    for i in range(len(delta)):
        for j in range(i + 1, len(delta)):
            x, y = delta[i], delta[j]
            if root_class(x.x, eps) == root_class(y.x, eps):
                report.skipped.append((i, j))
                continue
            pxy = parent.pair(x.x, y.y)
            pyx = parent.pair(y.x, x.y)
            product = pxy * pyx
            try:
                bond = bond_order(pxy, pyx, eps, m_max)
            except DatumError:
                bond = BondLabel.invalid(product)
            mx, _ = root_reflection_matrices(parent, x)
            my, _ = root_reflection_matrices(parent, y)
            found = literal_order(mx @ my, bound)
            order = OrderResult.infinite(bound) if found is None else OrderResult.finite(found)

            flags = []
            if pxy > eps or pyx > eps:
                flags.append("positive_pairing")
            if not bond.is_valid:
                flags.append("invalid_bond")
            elif not order.agrees_with(bond):
                flags.append("order_mismatch")
            report.entries.append(PairReport(
                pair=(i, j), pairing_xy=pxy, pairing_yx=pyx, product=product,
                bond=bond, order=order, flags=flags,
            ))
    if report.skipped:
        logger.info("跳过反射相同的根对", extra={"skipped": report.skipped})
    return report


def dihedral_coefficients(
        parent: "CoxeterDatum",
        x: RootPair,
        y: RootPair,
        count: int,
) -> List[Tuple[float, float, float, float]]:
    """(···r_y r_x r_y)x = c_m·x + d_m·y 与 (···r_x r_y r_x)y = c′_m·x + d′_m·y，m = 0..count−1

    Raises:
        SubgroupError: x、y 线性相关（DEGENERATE_SPAN）
    """
    eps = parent.tolerance
    basis = np.column_stack([x.x, y.x])
    if np.linalg.matrix_rank(basis, tol=eps * max(1.0, float(np.max(np.abs(basis))))) < 2:
        raise SubgroupError("x 与 y 线性相关", ErrorCode.DEGENERATE_SPAN)
    rx, _ = root_reflection_matrices(parent, x)
    ry, _ = root_reflection_matrices(parent, y)

    out = []
    for m in range(count):
        u = _trailing_product(ry, rx, m) @ x.x
        v = _trailing_product(rx, ry, m) @ y.x
        coeffs = []
        for vec in (u, v):
            solution, *_ = np.linalg.lstsq(basis, vec, rcond=None)
            residual = float(np.max(np.abs(basis @ solution - vec)))
            if residual > eps * max(1.0, float(np.max(np.abs(vec)))):
                raise SubgroupError(
                    f"向量不在 x、y 的张成中，残差 {residual:.3g}",
                    ErrorCode.DEGENERATE_SPAN,
                    {"m": m},
                )
            coeffs.extend(float(c) for c in solution)
        out.append(tuple(coeffs))
    return out


def _trailing_product(last: np.ndarray, other: np.ndarray, factors: int) -> np.ndarray:
    """···other·last，共 factors 个因子，最右为 last"""
    first, second = (last, other) if factors % 2 == 1 else (other, last)
    return alternating_product(first, second, factors)


def dihedral_coeff_check(
        parent: "CoxeterDatum",
        x: RootPair,
        y: RootPair,
        max_factors: Optional[int] = None,
        bound: int = DEFAULT_ORDER_BOUND,
) -> bool:
    """对 0 ≤ m < n（n 为 r_x r_y 的阶）系数非负且向量为正根

    Args:
        max_factors: 无限阶时检验的 m 上界（含），默认 6
    """
    rx, _ = root_reflection_matrices(parent, x)
    ry, _ = root_reflection_matrices(parent, y)
    order = literal_order(rx @ ry, bound)
    if order is None:
        count = (6 if max_factors is None else max_factors) + 1
    else:
        count = order if max_factors is None else min(order, max_factors + 1)

    eps = parent.tolerance
    for m, coeffs in enumerate(dihedral_coefficients(parent, x, y, count)):
        if min(coeffs) < -eps:
            return False
        u = _trailing_product(ry, rx, m) @ x.x
        v = _trailing_product(rx, ry, m) @ y.x
        if sign_of(parent, u, 1) is not SignClass.POSITIVE or sign_of(parent, v, 1) is not SignClass.POSITIVE:
            return False
    return True


# ---------------------------------------------------------------------------
# 报告
# ---------------------------------------------------------------------------

def delta_coxeter_matrix(subgroup: ReflectionSubgroup, m_max: int = DEFAULT_M_MAX) -> Optional[List[List[int]]]:
    """Δ 的诱导数据的 Coxeter 矩阵（0 表示 ∞）"""
    if not subgroup.delta:
        return None
    induced = induced_datum(subgroup.parent, subgroup.delta)
    return coxeter_matrix_to_file(coxeter_matrix_of(induced, m_max))


def delta_classes(subgroup: ReflectionSubgroup) -> Set[RootClass]:
    return {root_class(pair.x, subgroup.parent.tolerance) for pair in subgroup.delta}


def oracle_agrees(subgroup: ReflectionSubgroup) -> bool:
    """N 集判据与 S(W′) 定义给出相同的反射集"""
    brute = {t.root_class for t in canonical_generators_bruteforce(subgroup)}
    return brute == delta_classes(subgroup)


def subgroup_report(
        subgroup: ReflectionSubgroup,
        with_d34: bool = True,
        oracle: bool = False,
        m_max: int = DEFAULT_M_MAX,
        bound: int = DEFAULT_ORDER_BOUND,
) -> SubgroupReport:
    order = len(subgroup.elements) if subgroup.is_finite else "infinite/truncated"
    return SubgroupReport(
        generators=[g.root_pair.x.tolist() for g in subgroup.generators],
        order=order,
        phi_class_count=len(subgroup.phi),
        complete=subgroup.complete,
        delta=[pair.x.tolist() for pair in subgroup.delta],
        delta_partners=[pair.y.tolist() for pair in subgroup.delta],
        coxeter_matrix_of_delta=safe_execute(
            delta_coxeter_matrix, subgroup, m_max, context={"section": "coxeter_matrix"},
        ),
        d34=d34_report(subgroup, m_max, bound) if with_d34 else None,
        oracle_agrees=oracle_agrees(subgroup) if oracle else None,
    )
