"""
错误类型 - 工作台所有可预期的失败都从 WorkbenchError 派生
"""

from typing import Any, Optional, Sequence


class WorkbenchError(ValueError):
    """工作台错误基类"""


class AmbientMismatchError(WorkbenchError):
    """两个对象不属于同一个环境 (m, n, 群)"""

    def __init__(self, left: Any, right: Any):
        super().__init__(f"环境不一致: {left} 与 {right}")
        self.left = left
        self.right = right


class ConstantPolynomialError(WorkbenchError):
    """常数多项式没有首项变元"""

    def __init__(self, what: str = "leader"):
        super().__init__(f"常数多项式没有 {what}")


class DerivationIndexError(WorkbenchError):
    """微分算子下标越界"""

    def __init__(self, j: int, m: int):
        super().__init__(f"微分下标 {j} 超出范围 1..{m}")
        self.j = j
        self.m = m


class MissingAssignmentError(WorkbenchError):
    """求值时缺少变元的取值"""

    def __init__(self, missing: Sequence[Any]):
        names = ", ".join(str(v) for v in missing)
        super().__init__(f"缺少以下变元的取值: {names}")
        self.missing = tuple(missing)


class AutoreducedViolation(WorkbenchError):
    """集合不是自约化集"""

    def __init__(self, reason: str, pair: Optional[tuple[Any, Any]] = None):
        detail = f" ({pair[0]} / {pair[1]})" if pair else ""
        super().__init__(f"不是自约化集: {reason}{detail}")
        self.reason = reason
        self.pair = pair


class TruncationError(WorkbenchError):
    """多项式含有截断之外的变元"""

    def __init__(self, foreign: Sequence[Any], message: Optional[str] = None):
        names = ", ".join(str(v) for v in foreign)
        super().__init__(message or f"变元不在截断内: {names}")
        self.foreign = tuple(foreign)


class ZeroSaturatorError(WorkbenchError):
    """不能用 0 做饱和"""

    def __init__(self):
        super().__init__("饱和元 h 不能为 0")


class GroupSpecError(WorkbenchError):
    """群的乘法表不合法"""


class UnknownGroupElementError(WorkbenchError):
    """群中没有该元素"""

    def __init__(self, name: Any, elements: Sequence[str]):
        super().__init__(f"未知群元素: {name} (可选: {' '.join(elements)})")
        self.name = name


class ArityError(WorkbenchError):
    """参数个数与环境不符"""

    def __init__(self, expected: int, got: int):
        super().__init__(f"需要 {expected} 个分量, 实际 {got} 个")
        self.expected = expected
        self.got = got


class ParseError(WorkbenchError):
    """多项式或群文件语法错误"""

    def __init__(self, message: str, line: int = 1, column: int = 1, source: str = ""):
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column
        self.source = source


class ConfigError(WorkbenchError):
    """会话配置不合法"""


class BlockError(WorkbenchError):
    """多项式涉及了不允许的块"""

    def __init__(self, blocks: Sequence[str]):
        super().__init__(f"只允许单位元所在的块, 却出现了: {' '.join(blocks)}")
        self.blocks = tuple(blocks)
