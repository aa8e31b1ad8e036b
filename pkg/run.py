#!/usr/bin/env python3
"""
高斯矩展开工具 - 启动脚本
"""

import sys


def check_dependencies():
    """检查依赖包是否安装"""
    try:
        import numpy
        import scipy
        import typer
        import pydantic
        import loguru
        print("✅ 依赖检查通过", file=sys.stderr)
        return True
    except ImportError as e:
        print(f"❌ 缺少依赖包: {e}", file=sys.stderr)
        print("请运行: pip install -r requirements.txt", file=sys.stderr)
        return False


def run_app():
    """运行命令行应用"""
    if not check_dependencies():
        sys.exit(2)

    from cli import app

    try:
        app()
    except KeyboardInterrupt:
        print("\n👋 已停止", file=sys.stderr)
        sys.exit(130)


if __name__ == "__main__":
    run_app()
