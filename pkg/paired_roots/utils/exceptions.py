"""异常处理模块

定义项目中使用的自定义异常类型，提供统一的异常处理机制。
"""

import logging
import traceback
from datetime import datetime
from enum import Enum
from functools import wraps
from typing import Optional, Dict, Any, Type, Callable

from .logging_config import get_logger


class ErrorCode(Enum):
    """错误代码枚举"""

    # 输入与通用错误 (1000-1999)
    INVALID_PARAMETER = 1001
    INVALID_FILE_FORMAT = 1002
    FILE_NOT_FOUND = 1003
    BAD_FLAGS = 1004

    # 数据 (datum) 错误 (2000-2999)
    NON_SYMMETRIC = 2000
    BAD_DIAGONAL = 2001
    ENTRY_OUT_OF_RANGE = 2002
    NEGATIVE_PRODUCT = 2003
    INVALID_DATUM = 2004
    DUPLICATE_REFLECTION = 2005
    EMBEDDING_MISMATCH = 2006
    UNKNOWN_GENERATOR = 2007
    DIMENSION_MISMATCH = 2008

    # 根系错误 (3000-3999)
    ZERO_VECTOR = 3000
    CAP_EXCEEDED = 3001
    ROOT_NOT_FOUND = 3002

    # 群与二面体错误 (4000-4999)
    NO_DESCENT = 4000
    INCONCLUSIVE = 4001
    INVALID_PARAMETERS = 4002

    # 反射子群错误 (5000-5999)
    NOT_IN_SUBGROUP = 5000
    INCOMPLETE_PARENT = 5001
    INFINITE_CASE = 5002
    PRECONDITION_FAIL = 5003
    DEGENERATE_SPAN = 5004

    UNKNOWN_ERROR = 9000


class PairedRootsException(Exception):
    """Paired Roots 基础异常类

    所有自定义异常的基类，提供统一的异常处理接口。
    """

    def __init__(
            self,
            message: str,
            error_code: ErrorCode = ErrorCode.UNKNOWN_ERROR,
            details: Optional[Dict[str, Any]] = None,
            cause: Optional[Exception] = None
    ):
        """初始化异常

        Args:
            message: 错误消息
            error_code: 错误代码
            details: 错误详细信息
            cause: 原始异常
        """
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        self.cause = cause
        self.timestamp = datetime.now()

        self._log_exception()

    def _log_exception(self) -> None:
        """记录异常信息到日志"""
        logger = get_logger(self.__class__.__module__)

        log_extra = {
            "error_code": self.error_code.value,
            "error_name": self.error_code.name,
            "exception_type": self.__class__.__name__,
            "details": self.details
        }
        if self.cause:
            log_extra["original_exception"] = type(self.cause).__name__
            log_extra["original_message"] = str(self.cause)

        log_message = f"[{self.error_code.name}] {self.message}"

        # 输入错误面向用户；领域错误由调用方处理，只在调试级别记录
        if self.error_code.value < 2000:
            logger.warning(log_message, extra=log_extra)
        elif self.error_code.value < 9000:
            logger.debug(log_message, extra=log_extra)
        else:
            logger.error(log_message, extra=log_extra, exc_info=self.cause is not None)

    def to_dict(self) -> Dict[str, Any]:
        """将异常转换为字典格式

        Returns:
            包含异常信息的字典
        """
        return {
            "error_code": self.error_code.value,
            "error_name": self.error_code.name,
            "message": self.message,
            "details": _jsonable(self.details),
            "timestamp": self.timestamp.isoformat(),
            "traceback": traceback.format_exc() if self.cause else None
        }

    def __str__(self) -> str:
        return f"[{self.error_code.name}] {self.message}"


class InputError(PairedRootsException):
    """输入文件或命令行参数异常"""

    def __init__(
            self,
            message: str = "输入无效",
            error_code: ErrorCode = ErrorCode.INVALID_PARAMETER,
            details: Optional[Dict[str, Any]] = None,
            cause: Optional[Exception] = None
    ):
        super().__init__(message, error_code, details, cause)


class DatumError(PairedRootsException):
    """Coxeter 数据相关异常"""

    def __init__(
            self,
            message: str = "Coxeter 数据无效",
            error_code: ErrorCode = ErrorCode.INVALID_DATUM,
            details: Optional[Dict[str, Any]] = None,
            cause: Optional[Exception] = None
    ):
        super().__init__(message, error_code, details, cause)


class RootSystemError(PairedRootsException):
    """根系计算相关异常"""

    def __init__(
            self,
            message: str = "根系计算失败",
            error_code: ErrorCode = ErrorCode.ZERO_VECTOR,
            details: Optional[Dict[str, Any]] = None,
            cause: Optional[Exception] = None
    ):
        super().__init__(message, error_code, details, cause)


class CapExceededError(RootSystemError):
    """枚举超过上限；partial 保存截断前的结果"""

    def __init__(self, message: str, partial: Any = None, details: Optional[Dict[str, Any]] = None):
        self.partial = partial
        super().__init__(message, ErrorCode.CAP_EXCEEDED, details)


class DihedralError(PairedRootsException):
    """二面体（秩 2）计算相关异常"""

    def __init__(
            self,
            message: str = "二面体计算无结论",
            error_code: ErrorCode = ErrorCode.INCONCLUSIVE,
            details: Optional[Dict[str, Any]] = None,
            cause: Optional[Exception] = None
    ):
        super().__init__(message, error_code, details, cause)


class GroupError(PairedRootsException):
    """群元素计算相关异常"""

    def __init__(
            self,
            message: str = "群计算失败",
            error_code: ErrorCode = ErrorCode.NO_DESCENT,
            details: Optional[Dict[str, Any]] = None,
            cause: Optional[Exception] = None
    ):
        super().__init__(message, error_code, details, cause)


class SubgroupError(PairedRootsException):
    """反射子群相关异常"""

    def __init__(
            self,
            message: str = "反射子群计算失败",
            error_code: ErrorCode = ErrorCode.PRECONDITION_FAIL,
            details: Optional[Dict[str, Any]] = None,
            cause: Optional[Exception] = None
    ):
        super().__init__(message, error_code, details, cause)


def _jsonable(value: Any) -> Any:
    """把 details 中的 numpy 值等转换为可序列化的形式"""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


class ExceptionHandler:
    """异常处理器

    提供统一的异常转换功能。
    """

    def convert_exception(
            self,
            exc: Exception,
            context: Optional[Dict[str, Any]] = None
    ) -> PairedRootsException:
        """将标准异常转换为项目异常

        Args:
            exc: 原始异常
            context: 异常上下文信息

        Returns:
            转换后的异常
        """
        if isinstance(exc, PairedRootsException):
            return exc

        message = str(exc)
        details = dict(context or {})
        details["original_exception"] = type(exc).__name__

        if isinstance(exc, FileNotFoundError):
            return InputError(f"文件未找到: {message}", ErrorCode.FILE_NOT_FOUND, details, exc)
        if isinstance(exc, OSError):
            return InputError(f"文件读取失败: {message}", ErrorCode.FILE_NOT_FOUND, details, exc)
        if isinstance(exc, (ValueError, TypeError, KeyError)):
            return InputError(f"参数验证失败: {message}", ErrorCode.INVALID_PARAMETER, details, exc)
        if isinstance(exc, (ArithmeticError, MemoryError)):
            return PairedRootsException(f"数值计算失败: {message}", ErrorCode.UNKNOWN_ERROR, details, exc)
        return PairedRootsException(f"未知错误: {message}", ErrorCode.UNKNOWN_ERROR, details, exc)


def handle_exceptions(default_exception: Optional[Type[PairedRootsException]] = None):
    """异常处理装饰器

    项目异常原样抛出；其他异常转换为项目异常后抛出。

    Args:
        default_exception: 转换结果不是该类型时，用该类型重新包装
    """

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except PairedRootsException:
                raise
            except Exception as e:
                context = {
                    "function": func.__name__,
                    "module": func.__module__,
                }
                custom_exception = ExceptionHandler().convert_exception(e, context)
                if default_exception is not None and not isinstance(custom_exception, default_exception):
                    custom_exception = default_exception(
                        custom_exception.message, custom_exception.error_code, custom_exception.details, e
                    )
                raise custom_exception from e

        return wrapper

    return decorator


def safe_execute(
        func: Callable,
        *args,
        default_return=None,
        exception_types: tuple = (Exception,),
        log_errors: bool = True,
        context: Optional[Dict[str, Any]] = None,
        **kwargs
) -> Any:
    """安全执行函数

    Args:
        func: 要执行的函数
        *args: 函数参数
        default_return: 异常时的默认返回值
        exception_types: 要捕获的异常类型
        log_errors: 是否记录错误日志
        context: 上下文信息
        **kwargs: 函数关键字参数

    Returns:
        函数执行结果或默认返回值
    """
    func_name = getattr(func, '__name__', str(func))
    module_name = getattr(func, '__module__', __name__)

    try:
        return func(*args, **kwargs)
    except exception_types as e:
        if log_errors:
            log_extra = {
                "function": func_name,
                "exception_type": type(e).__name__,
                "safe_execution": True,
                "default_return": str(default_return),
            }
            if context:
                log_extra["context"] = context
            level = logging.INFO if isinstance(e, PairedRootsException) else logging.ERROR
            get_logger(module_name).log(level, f"安全执行函数 {func_name} 失败: {e}", extra=log_extra)

        return default_return
