"""
Setup.py for backward compatibility

lapt-bev 的项目配置全部在 pyproject.toml 中。
本文件保留以支持不识别 PEP 517 的旧版本 pip。
"""

from setuptools import setup

setup()
