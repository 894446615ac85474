"""
异常定义
"""


class MonoSquareError(Exception):
    """所有错误的基类，exit_code 供命令行使用"""

    exit_code = 2


class DomainError(MonoSquareError):
    """查询点不在着色的定义域内"""

    def __init__(self, n: int, lo: int, hi: int):
        super().__init__(f"n={n} 不在定义域 [{lo}, {hi}] 内")
        self.n = n
        self.lo = lo
        self.hi = hi


class ConstructionError(MonoSquareError):
    """着色构造非法（缺口、重叠、越界）"""

    def __init__(self, message: str, boundary: int = None):
        super().__init__(message)
        self.boundary = boundary


class ColouringParseError(MonoSquareError):
    """着色文件格式错误"""

    exit_code = 4

    def __init__(self, message: str, position: str = ""):
        super().__init__(f"{message} (位置: {position})" if position else message)
        self.position = position


class ArithmeticOverflowError(MonoSquareError):
    """64位无符号检查运算溢出"""


class CapacityError(MonoSquareError):
    """规模超出可扫描/可搜索上限"""


class PreconditionError(MonoSquareError):
    """前置条件不满足"""


class InternalContradictionError(MonoSquareError):
    """证明中的不变量被破坏，说明实现有缺陷"""

    exit_code = 3
