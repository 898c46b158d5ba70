import signal
import sys

from paired_roots.cli.commands import run
from paired_roots.utils.config import logger
from paired_roots.utils.worker_pool import LayerWorkerPool


# 信号处理函数
def signal_handler(sig, frame):
    """处理终止信号，关闭层执行器后退出"""
    logger.info(f"接收到信号 {sig}，停止计算...")

    # 取消尚未开始的分块任务
    LayerWorkerPool.shutdown_all()

    logger.info("清理完成，准备退出")
    sys.exit(130 if sig == signal.SIGINT else 143)


def main():
    """Main entry point for the application"""
    # 注册信号处理函数
    signal.signal(signal.SIGINT, signal_handler)  # Ctrl+C
    signal.signal(signal.SIGTERM, signal_handler)  # kill

    try:
        exit_code = run(sys.argv[1:])
    finally:
        LayerWorkerPool.shutdown_all()
    sys.exit(exit_code)


if __name__ == "__main__":
    main()
