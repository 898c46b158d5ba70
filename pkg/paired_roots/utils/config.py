"""配置管理模块

提供应用程序的配置加载、验证和访问功能。
支持从TOML文件加载配置，并提供默认配置作为后备。
"""

import logging
import os
from pathlib import Path
from typing import Dict, Any, Optional

from colorama import Fore, Back, Style

try:
    import tomli
except ImportError:
    # 兼容性处理：如果tomli不可用，尝试使用tomllib (Python 3.11+)
    try:
        import tomllib as tomli  # type: ignore
    except ImportError:
        raise ImportError("需要安装tomli库或使用Python 3.11+")


class ConfigManager:
    """配置管理器类

    负责加载、验证和提供配置访问接口。
    """

    def __init__(self, config_file: Optional[Path] = None) -> None:
        """初始化配置管理器

        Args:
            config_file: 配置文件路径，默认为环境变量 PAIRED_ROOTS_CONFIG 或当前目录下的config.toml
        """
        env_file = os.environ.get("PAIRED_ROOTS_CONFIG")
        self.config_file = config_file or Path(env_file or "config.toml").resolve()
        self._config: Dict[str, Any] = {}
        self._load_config()

    @property
    def default_config(self) -> Dict[str, Any]:
        """获取默认配置"""
        return {
            "numerics": {
                "tolerance": 1e-9,
                "m_max": 360,  # cos²(π/m) 识别的最大 m
                "n_max": 720,  # p_n 递推的扫描上界
                "dedup_grid": 1e-6,
                "order_bound_factor": 2,
            },
            "roots": {
                "cap": 100000,
                "default_depth": 20,
            },
            "group": {
                "cap": 100000,
                "max_length": 64,
            },
            "subgroup": {
                "closure_depth": 24,
                "element_cap": 20000,
            },
            "compute": {
                "threads": 1,
            },
            "logging": {
                "level": "WARNING",
                "log_file": "",
                "use_structured_format": False,
                "max_file_size": 10 * 1024 * 1024,
                "backup_count": 5,
                "console_output": True,
            },
        }

    def _load_config(self) -> None:
        """加载配置文件"""
        try:
            if self.config_file.exists():
                with open(self.config_file, "rb") as f:
                    loaded_config = tomli.load(f)
                # 深度合并配置，确保所有默认值都存在
                self._config = self._deep_merge(self.default_config, loaded_config)
                logging.debug(f"已从 {self.config_file} 加载配置")
            else:
                self._config = self.default_config.copy()
                logging.debug(f"配置文件 {self.config_file} 不存在，使用默认配置")
        except Exception as e:
            logging.error(f"加载配置文件失败: {e}，使用默认配置")
            self._config = self.default_config.copy()

    def _deep_merge(self, default: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
        """深度合并两个字典

        Args:
            default: 默认配置字典
            override: 覆盖配置字典

        Returns:
            合并后的配置字典
        """
        result = default.copy()
        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = value
        return result

    def get(self, key_path: str, default: Any = None) -> Any:
        """获取配置值

        Args:
            key_path: 配置键路径，支持点分隔的嵌套路径，如 'numerics.tolerance'
            default: 默认值

        Returns:
            配置值或默认值
        """
        keys = key_path.split('.')
        value = self._config

        try:
            for key in keys:
                value = value[key]
            return value
        except (KeyError, TypeError):
            return default

    def __getitem__(self, key: str) -> Any:
        """支持字典式访问"""
        return self._config[key]

    def __contains__(self, key: str) -> bool:
        """支持 in 操作符"""
        return key in self._config


# 创建全局配置管理器实例
config_manager = ConfigManager()
config = config_manager

# 提取配置值（支持环境变量覆盖）
DEFAULT_TOLERANCE = float(os.environ.get("PAIRED_ROOTS_EPS", config_manager.get("numerics.tolerance", 1e-9)))
DEFAULT_M_MAX = int(config_manager.get("numerics.m_max", 360))
DEFAULT_N_MAX = int(config_manager.get("numerics.n_max", 720))
DEDUP_GRID = float(config_manager.get("numerics.dedup_grid", 1e-6))
ORDER_BOUND_FACTOR = int(config_manager.get("numerics.order_bound_factor", 2))
DEFAULT_ORDER_BOUND = ORDER_BOUND_FACTOR * DEFAULT_M_MAX

DEFAULT_ROOT_CAP = int(config_manager.get("roots.cap", 100000))
DEFAULT_DEPTH = int(config_manager.get("roots.default_depth", 20))
DEFAULT_GROUP_CAP = int(config_manager.get("group.cap", 100000))
DEFAULT_MAX_LENGTH = int(config_manager.get("group.max_length", 64))
DEFAULT_CLOSURE_DEPTH = int(config_manager.get("subgroup.closure_depth", 24))
DEFAULT_ELEMENT_CAP = int(config_manager.get("subgroup.element_cap", 20000))

DEFAULT_THREADS = int(os.environ.get("PAIRED_ROOTS_THREADS", config_manager.get("compute.threads", 1)))
DEFAULT_LOG_FILE = config_manager.get("logging.log_file", "") or None

# 输出载荷的版本标识
SCHEMA_VERSION = "paired-roots/1"


class ColorFormatter(logging.Formatter):
    """彩色日志格式化器

    为不同级别的日志消息添加颜色，提升控制台输出的可读性。
    """

    COLOR_MAP = {
        logging.DEBUG: Fore.WHITE,
        logging.INFO: Fore.GREEN,
        logging.WARNING: Fore.YELLOW,
        logging.ERROR: Fore.RED,
        logging.CRITICAL: Back.RED,
    }
    RESET_SEQ = Style.RESET_ALL

    def format(self, record: logging.LogRecord) -> str:
        """格式化日志记录

        Args:
            record: 日志记录对象

        Returns:
            格式化后的彩色日志字符串
        """
        msg = super().format(record)
        color = self.COLOR_MAP.get(record.levelno, self.RESET_SEQ)
        return f"{color}{msg}{self.RESET_SEQ}"


def setup_logger(name: str = "PAIRED_ROOTS", level: Optional[str] = None) -> logging.Logger:
    """设置并配置日志记录器

    Args:
        name: 日志记录器名称
        level: 覆盖配置文件中的日志级别

    Returns:
        配置好的日志记录器实例
    """
    from .logging_config import logging_config

    # 获取日志配置
    log_level = level or config_manager.get("logging.level", "WARNING")
    use_structured_format = config_manager.get("logging.use_structured_format", False)
    max_file_size = config_manager.get("logging.max_file_size", 10 * 1024 * 1024)
    backup_count = config_manager.get("logging.backup_count", 5)
    console_output = config_manager.get("logging.console_output", True)

    # 使用统一的日志配置管理器
    return logging_config.setup_logging(
        level=log_level,
        log_file=DEFAULT_LOG_FILE,
        max_file_size=max_file_size,
        backup_count=backup_count,
        use_structured_format=use_structured_format,
        console_output=console_output,
        logger_name=name,
        color_formatter=ColorFormatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'),
    )


# 创建全局日志记录器
logger = setup_logger()
