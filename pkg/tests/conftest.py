"""
Pytest 配置和共享 fixtures
"""

import os
import sys

import pytest

# 添加项目根目录到 Python 路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from diffalg_workbench.gaction import cyclic_group, symmetric_group  # noqa: E402
from tests.helpers import Ring  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


@pytest.fixture
def ode():
    """一个微分算子, 一个变量"""
    return Ring(1, 1)


@pytest.fixture
def ode2():
    """一个微分算子, 两个变量"""
    return Ring(1, 2)


@pytest.fixture
def pde():
    """两个微分算子, 一个变量"""
    return Ring(2, 1)


@pytest.fixture
def pde2():
    return Ring(2, 2)


@pytest.fixture
def alg():
    """纯代数情形 m = 0, x[1], x[2], x[3] 记作 y, z, w"""
    return Ring(0, 3)


@pytest.fixture
def z2():
    return Ring(1, 1, cyclic_group(2))


@pytest.fixture
def z3():
    return Ring(1, 1, cyclic_group(3))


@pytest.fixture
def s3():
    return Ring(0, 1, symmetric_group(3))


@pytest.fixture
def fixture_path():
    """tests/fixtures 下的文件路径"""

    def path(name: str) -> str:
        return os.path.join(FIXTURES, name)

    return path
