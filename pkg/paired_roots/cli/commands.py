"""命令处理模块

每个 cmd_* 处理一个子命令并返回 CommandOutcome；run() 负责解析参数、
输出 JSON 并给出退出码（0 成功，1 性质不成立，2 输入错误）。
"""

import json
import math
import sys
from argparse import Namespace
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from paired_roots.cli.parser import parse_args
from paired_roots.core.catalogue import standard_datum
from paired_roots.core.datum import CoxeterDatum, load_datum, validate
from paired_roots.core.dihedral import (
    RELATIVE_TOLERANCE, braid_check, classify_gamma, max_closed_form_deviation, order_of_AB,
)
from paired_roots.core.group import element_from_word, element_record
from paired_roots.core.roots import RootPair, SignedRootSet, decomposition_check, generate_roots
from paired_roots.core.subgroup import (
    SubgroupCaps, find_root, subgroup_from_reflections, subgroup_report, validate_canonical_set,
)
from paired_roots.models import CommandOutcome
from paired_roots.utils.config import DEFAULT_THREADS, DEFAULT_TOLERANCE, ConfigManager, config_manager, setup_logger
from paired_roots.utils.exceptions import (
    CapExceededError, DihedralError, ErrorCode, InputError, PairedRootsException, handle_exceptions,
)
from paired_roots.utils.logging_config import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_PROPERTY_FAILED = 1
EXIT_INPUT_ERROR = 2


@dataclass(frozen=True)
class RunSettings:
    """一次调用的运行参数：全局选项优先，其次是配置文件"""
    tolerance: Optional[float]
    m_max: int
    n_max: int
    order_bound: int
    depth: int
    root_cap: int
    closure_depth: int
    element_cap: int
    threads: int


def load_settings(args: Namespace) -> RunSettings:
    """读取一次配置并与命令行选项合并

    Raises:
        InputError: --config 指向的文件不存在（FILE_NOT_FOUND）
    """
    settings: ConfigManager = config_manager
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise InputError(f"配置文件不存在: {path}", ErrorCode.FILE_NOT_FOUND, {"path": str(path)})
        settings = ConfigManager(path)

    tolerance = args.eps
    if tolerance is None and args.config:
        tolerance = float(settings.get("numerics.tolerance", DEFAULT_TOLERANCE))
    threads = args.threads
    if threads is None:
        threads = int(settings.get("compute.threads", 1)) if args.config else DEFAULT_THREADS
    m_max = int(settings.get("numerics.m_max", 360))
    depth = getattr(args, "depth", None)
    cap = getattr(args, "cap", None)
    return RunSettings(
        tolerance=tolerance,
        m_max=m_max,
        n_max=int(settings.get("numerics.n_max", 720)),
        order_bound=int(settings.get("numerics.order_bound_factor", 2)) * m_max,
        depth=depth if depth is not None else int(settings.get("roots.default_depth", 20)),
        root_cap=cap if cap is not None else int(settings.get("roots.cap", 100000)),
        closure_depth=int(settings.get("subgroup.closure_depth", 24)),
        element_cap=int(settings.get("subgroup.element_cap", 20000)),
        threads=threads,
    )


def _load(args: Namespace, settings: RunSettings) -> CoxeterDatum:
    if args.type_name:
        return standard_datum(args.type_name, settings.tolerance or DEFAULT_TOLERANCE)
    if args.datum_file:
        return load_datum(args.datum_file, settings.tolerance)
    raise InputError("需要数据文件或 --type", ErrorCode.BAD_FLAGS)


def _datum_summary(datum: CoxeterDatum) -> Dict[str, Any]:
    return {"generators": datum.labels, "standard": datum.is_standard, "tolerance": datum.tolerance}


def _pair_record(datum: CoxeterDatum, pair: RootPair) -> Dict[str, Any]:
    return {
        "side1": np.asarray(pair.x).tolist(),
        "side2": np.asarray(pair.y).tolist(),
        "depth": pair.depth,
        "witness": [datum.labels[s] for s in pair.witness],
        "seed": datum.labels[pair.seed],
    }


# ---------------------------------------------------------------------------
# 子命令
# ---------------------------------------------------------------------------

@handle_exceptions(default_exception=InputError)
def cmd_validate(args: Namespace, settings: RunSettings) -> CommandOutcome:
    datum = _load(args, settings)
    report = validate(datum, settings.m_max)
    return CommandOutcome(
        exit_code=EXIT_OK if report.passed else EXIT_PROPERTY_FAILED,
        payload={
            "command": "validate",
            "datum": _datum_summary(datum),
            "report": report.model_dump(mode="json"),
            "failed": report.failed_conditions(),
        },
    )


@handle_exceptions(default_exception=InputError)
def cmd_roots(args: Namespace, settings: RunSettings) -> CommandOutcome:
    datum = _load(args, settings)
    try:
        roots = generate_roots(
            datum, settings.depth, settings.root_cap,
            force=args.force, threads=settings.threads, m_max=settings.m_max,
        )
    except CapExceededError as e:
        roots = e.partial

    exclude = {"1": {"side2", "sign2"}, "2": {"side1", "sign"}}.get(args.side, set())
    records = [record.model_dump(mode="json", exclude=exclude) for record in roots.records()]
    return CommandOutcome(
        exit_code=EXIT_OK,
        payload={
            "command": "roots",
            "records": records,
            "summary": roots.summary().model_dump(mode="json"),
        },
    )


@handle_exceptions(default_exception=InputError)
def cmd_decompose(args: Namespace, settings: RunSettings) -> CommandOutcome:
    datum = _load(args, settings)
    result = decomposition_check(datum, settings.depth, settings.root_cap, threads=settings.threads)
    payload: Dict[str, Any] = {
        "command": "decompose",
        "holds": result.holds,
        "depth_reached": result.depth_reached,
        "complete": result.complete,
        "roots_checked": result.roots_checked,
    }
    if not result.holds:
        payload["counterexample"] = dict(_pair_record(datum, result.counterexample), side=result.side)
    return CommandOutcome(exit_code=EXIT_OK if result.holds else EXIT_PROPERTY_FAILED, payload=payload)


def _parse_root_list(text: str) -> List[List[float]]:
    try:
        coords = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"--roots 不是合法的 JSON: {e}", ErrorCode.BAD_FLAGS, {"roots": text}, e)
    if not isinstance(coords, list) or not coords or not all(isinstance(row, list) for row in coords):
        raise InputError("--roots 必须是非空的坐标列表", ErrorCode.BAD_FLAGS, {"roots": text})
    return coords


def _random_seeds(roots: SignedRootSet, count: int, seed: int) -> List[RootPair]:
    positives = roots.positive_pairs()
    if count > len(positives):
        raise InputError(
            f"只有 {len(positives)} 个已生成的正根，无法选取 {count} 个",
            ErrorCode.BAD_FLAGS,
            {"random": count, "positives": len(positives)},
        )
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(positives), size=count, replace=False)
    return [positives[int(i)] for i in sorted(picks)]


@handle_exceptions(default_exception=InputError)
def cmd_subgroup(args: Namespace, settings: RunSettings) -> CommandOutcome:
    datum = _load(args, settings)
    caps = SubgroupCaps(
        closure_depth=settings.closure_depth,
        element_cap=settings.element_cap,
        root_depth=settings.depth,
        root_cap=settings.root_cap,
    )
    try:
        roots = generate_roots(datum, caps.root_depth, caps.root_cap, threads=settings.threads, m_max=settings.m_max)
    except CapExceededError as e:
        roots = e.partial

    if args.root_list is not None:
        seeds = [find_root(roots, coords) for coords in _parse_root_list(args.root_list)]
    else:
        seeds = _random_seeds(roots, args.random_count, args.seed)

    subgroup = subgroup_from_reflections(datum, seeds, caps, roots=roots)
    report = subgroup_report(
        subgroup, with_d34=args.report, oracle=args.oracle, m_max=settings.m_max, bound=settings.order_bound,
    )

    payload: Dict[str, Any] = {
        "command": "subgroup",
        "datum": _datum_summary(datum),
        "seeds": [np.asarray(seed.x).tolist() for seed in seeds],
        "report": report.model_dump(mode="json"),
    }
    failed: List[str] = []
    if args.canonical:
        payload["canonical_valid"] = validate_canonical_set(datum, subgroup.delta, settings.m_max)
        if not payload["canonical_valid"]:
            failed.append("canonical")
    if args.oracle and not report.oracle_agrees:
        failed.append("oracle")
    if args.report and report.d34 is not None and not report.d34.consistent:
        failed.append("d34")
    payload["failed"] = failed
    return CommandOutcome(exit_code=EXIT_PROPERTY_FAILED if failed else EXIT_OK, payload=payload)


def _parse_cos(text: str) -> Tuple[int, int]:
    try:
        k, m = (int(part) for part in text.split("/"))
    except ValueError as e:
        raise InputError(f"--cos 需要 k/m 形式: {text}", ErrorCode.BAD_FLAGS, {"cos": text}, e)
    if not 0 < k < m:
        raise InputError("--cos 要求 0 < k < m", ErrorCode.BAD_FLAGS, {"k": k, "m": m})
    return k, m


@handle_exceptions(default_exception=InputError)
def cmd_dihedral(args: Namespace, settings: RunSettings) -> CommandOutcome:
    if args.braid and args.cos_ratio is None:
        raise InputError("--braid 需要 --cos k/m", ErrorCode.BAD_FLAGS)

    eps = settings.tolerance or DEFAULT_TOLERANCE
    m_max, n_max = settings.m_max, settings.n_max

    ratio = _parse_cos(args.cos_ratio) if args.cos_ratio is not None else None
    gamma = math.cos(ratio[0] * math.pi / ratio[1]) if ratio is not None else args.gamma
    if not math.isfinite(gamma):
        raise InputError("γ 必须是有限实数", ErrorCode.BAD_FLAGS, {"gamma": gamma})

    payload: Dict[str, Any] = {"command": "dihedral", "gamma": gamma}
    try:
        payload["classification"] = str(classify_gamma(gamma, eps, m_max, n_max))
    except DihedralError as e:
        if e.error_code is not ErrorCode.INCONCLUSIVE:
            raise
        payload["classification"] = "Inconclusive"

    exit_code = EXIT_OK
    if args.order:
        order = order_of_AB(gamma, eps, m_max, n_max)
        payload["order"] = str(order)
        payload["order_detail"] = order.model_dump(mode="json")
    if args.braid:
        holds = braid_check(*ratio, args.q, args.X)
        payload["braid"] = holds
        if not holds:
            exit_code = EXIT_PROPERTY_FAILED
    if args.pcheck is not None:
        deviation = max_closed_form_deviation(gamma, args.pcheck)
        payload["pcheck"] = {
            "n_max": args.pcheck,
            "max_deviation": deviation,
            "within_tolerance": deviation <= RELATIVE_TOLERANCE,
        }
        if deviation > RELATIVE_TOLERANCE:
            exit_code = EXIT_PROPERTY_FAILED
    return CommandOutcome(exit_code=exit_code, payload=payload)


@handle_exceptions(default_exception=InputError)
def cmd_element(args: Namespace, settings: RunSettings) -> CommandOutcome:
    datum = _load(args, settings)
    record = element_record(datum, element_from_word(datum, args.word))
    return CommandOutcome(
        exit_code=EXIT_OK,
        payload={"command": "element", "datum": _datum_summary(datum), "element": record.model_dump(mode="json")},
    )


COMMANDS = {
    "validate": cmd_validate,
    "roots": cmd_roots,
    "decompose": cmd_decompose,
    "subgroup": cmd_subgroup,
    "dihedral": cmd_dihedral,
    "element": cmd_element,
}


# ---------------------------------------------------------------------------
# 入口
# ---------------------------------------------------------------------------

def _error_outcome(exc: PairedRootsException) -> CommandOutcome:
    return CommandOutcome(exit_code=EXIT_INPUT_ERROR, payload={"error": exc.to_dict()})


def _emit(outcome: CommandOutcome, stream: TextIO) -> None:
    payload = dict(outcome.payload)
    records = payload.pop("records", None)
    if records is not None:
        for record in records:
            stream.write(json.dumps(record, ensure_ascii=False) + "\n")
    stream.write(json.dumps(payload, ensure_ascii=False) + "\n")
    stream.flush()


def dispatch(args: Namespace) -> CommandOutcome:
    try:
        return COMMANDS[args.command](args, load_settings(args))
    except PairedRootsException as e:
        return _error_outcome(e)


def run(argv: Optional[Sequence[str]] = None, stream: Optional[TextIO] = None) -> int:
    """解析参数、执行子命令并把 JSON 写到标准输出

    Returns:
        退出码
    """
    stream = stream or sys.stdout
    try:
        args = parse_args(argv)
    except PairedRootsException as e:
        outcome = _error_outcome(e)
    else:
        if args.log_level:
            setup_logger(level=args.log_level)
        logger.debug(f"执行命令 {args.command}", extra={"argv": list(argv or [])})
        outcome = dispatch(args)
    _emit(outcome, stream)
    return outcome.exit_code
