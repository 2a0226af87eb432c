"""
命令行模块

console script ``lapt`` 的入口，也可通过 ``python -m cli`` 调用。
"""

from .main import EXIT_IO, EXIT_OK, EXIT_VALIDATION, build_parser, main

__all__ = ["EXIT_OK", "EXIT_VALIDATION", "EXIT_IO", "build_parser", "main"]
