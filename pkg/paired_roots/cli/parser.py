"""命令行参数定义

子命令：validate、roots、decompose、subgroup、dihedral、element。
"""

import argparse
from typing import Optional, Sequence

from paired_roots.utils.exceptions import ErrorCode, InputError


class ArgumentParser(argparse.ArgumentParser):
    """参数错误抛出 InputError，由调用方映射为退出码 2"""

    def error(self, message: str):
        raise InputError(f"参数错误: {message}", ErrorCode.BAD_FLAGS, {"prog": self.prog})


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"必须为正数: {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"必须为正整数: {text}")
    return value


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"不能为负: {text}")
    return value


def _add_datum_source(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("datum_file", nargs="?", help="数据文件（JSON，数据格式或 Coxeter 矩阵格式）")
    source.add_argument("--type", dest="type_name", metavar="NAME", help="标准类型名，如 A3、B3、H3、I2(5)、Ainf")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="paired-roots",
        description="Coxeter 数据、配对根系与反射子群的计算工具",
    )
    parser.add_argument("--eps", type=_positive_float, default=None, help="全局数值容差 ε")
    parser.add_argument("--threads", type=_positive_int, default=None, help="逐层并行的线程数（默认取配置 compute.threads）")
    parser.add_argument("--seed", type=int, default=0, help="随机种子")
    parser.add_argument("--config", default=None, help="配置文件路径（TOML）")
    parser.add_argument(
        "--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="日志级别（输出到标准错误）",
    )

    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    validate = commands.add_parser("validate", help="逐项检查条件 D1-D5")
    _add_datum_source(validate)

    roots = commands.add_parser("roots", help="生成根对（JSON 行输出）")
    _add_datum_source(roots)
    roots.add_argument("--depth", type=_non_negative_int, default=None, help="BFS 最大深度")
    roots.add_argument("--cap", type=_positive_int, default=None, help="根对数上限")
    roots.add_argument("--side", choices=["1", "2", "both"], default="both", help="输出哪一侧的坐标")
    roots.add_argument("--force", action="store_true", help="跳过数据校验")

    decompose = commands.add_parser("decompose", help="检验正负分解，寻找混合根")
    _add_datum_source(decompose)
    decompose.add_argument("--depth", type=_non_negative_int, default=None, help="BFS 最大深度")
    decompose.add_argument("--cap", type=_positive_int, default=None, help="根对数上限")

    subgroup = commands.add_parser("subgroup", help="反射子群与典范生成元")
    _add_datum_source(subgroup)
    seeds = subgroup.add_mutually_exclusive_group(required=True)
    seeds.add_argument("--roots", dest="root_list", metavar="COORDS", help='种子根坐标的 JSON 列表，如 "[[1,1]]"')
    seeds.add_argument("--random", dest="random_count", type=_positive_int, metavar="K", help="随机选取 K 个正根")
    subgroup.add_argument("--canonical", action="store_true", help="校验 Δ 并给出诱导数据的 Coxeter 矩阵")
    subgroup.add_argument("--oracle", action="store_true", help="与 S(W′) 的暴力计算比较")
    subgroup.add_argument("--report", action="store_true", help="输出 Δ 中各根对的分类")
    subgroup.add_argument("--depth", type=_non_negative_int, default=None, help="父根系的 BFS 深度")

    dihedral = commands.add_parser("dihedral", help="秩 2 引擎：γ 分类、阶、辫关系与递推检验")
    gamma = dihedral.add_mutually_exclusive_group(required=True)
    gamma.add_argument("--gamma", type=float, help="参数 γ")
    gamma.add_argument("--cos", dest="cos_ratio", metavar="k/m", help="γ = cos(kπ/m)")
    dihedral.add_argument("--order", action="store_true", help="计算 q = 1 时 AB 的阶")
    dihedral.add_argument("--braid", action="store_true", help="检验 ABA··· = BAB···（需要 --cos）")
    dihedral.add_argument("--q", type=_positive_float, default=1.0, help="参数 q")
    dihedral.add_argument("--x", dest="X", type=float, default=1.0, help="参数 X")
    dihedral.add_argument("--pcheck", type=_non_negative_int, metavar="N", help="比较 p_n 递推与闭式到 n = N")

    element = commands.add_parser("element", help="群元素的长度、既约字与 N 集")
    _add_datum_source(element)
    element.add_argument("--word", required=True, help='生成元字，如 "s1 s2 s1"')

    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)
