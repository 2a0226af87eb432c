"""
异常定义模块

统一定义流水线各模块抛出的异常类型。校验类异常同时继承 ValueError，
I/O 类异常同时继承 OSError，便于调用方按标准异常捕获。
"""


class LaptError(Exception):
    """项目内所有异常的基类"""


class ValidationError(LaptError, ValueError):
    """输入数据或参数校验失败（命令行退出码 1）"""


class CalibrationError(ValidationError):
    """标定参数不合法：非正交旋转、退化矩阵、内参越界等"""


class InvalidDepthError(ValidationError):
    """深度值不合法（必须为正）"""


class InvalidArgumentError(ValidationError):
    """函数参数不合法：尺寸不匹配、下采样因子为零等"""


class PreconditionError(ValidationError):
    """调用前置条件不满足，例如像素坐标越界"""


class ConfigError(ValidationError):
    """配置项取值不合法"""


class LaptIOError(LaptError, OSError):
    """文件读写失败（命令行退出码 2）"""


class FormatError(LaptIOError):
    """文件格式错误：魔数不符、文件截断、头部与数据不一致等"""
