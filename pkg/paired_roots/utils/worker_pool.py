import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Sequence, TypeVar

from paired_roots.utils.config import DEFAULT_THREADS
from paired_roots.utils.logging_config import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class LayerWorkerPool:
    """Manager for the thread pools used to fan out BFS layers"""

    # 类变量，按线程数缓存执行器
    _executors: Dict[int, ThreadPoolExecutor] = {}
    _lock = threading.Lock()

    @classmethod
    def _executor(cls, threads: int) -> ThreadPoolExecutor:
        with cls._lock:
            executor = cls._executors.get(threads)
            if executor is None:
                executor = ThreadPoolExecutor(max_workers=threads, thread_name_prefix=f"layer-{threads}")
                cls._executors[threads] = executor
                logger.debug(f"已创建 {threads} 线程的层执行器")
            return executor

    @classmethod
    def map_layer(cls, func: Callable[[T], R], items: Sequence[T], threads: int = DEFAULT_THREADS) -> List[R]:
        """对一层的各个分块并行求值，结果保持输入顺序

        调用方按返回顺序合并结果，因此无论线程数多少，每层的处理都等价于原子地逐层进行。

        Args:
            func: 纯函数，作用在单个分块上
            items: 分块列表
            threads: 工作线程数，<=1 时直接在当前线程执行

        Returns:
            与 items 顺序一致的结果列表
        """
        if threads <= 1 or len(items) <= 1:
            return [func(item) for item in items]
        return list(cls._executor(threads).map(func, items))

    @classmethod
    def shutdown_all(cls) -> None:
        """关闭所有执行器"""
        with cls._lock:
            for threads, executor in cls._executors.items():
                executor.shutdown(wait=False, cancel_futures=True)
                logger.debug(f"已关闭 {threads} 线程的层执行器")
            cls._executors.clear()
