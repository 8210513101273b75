"""
会话配置 - 环境 (m, n, 群), 检查上界, 输出模式与并行度

配置可以来自 YAML 文件, 命令行参数覆盖文件中的值.
"""

from __future__ import annotations

import logging
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, InstanceOf, ValidationError, field_validator

from .diffpoly import Ambient
from .errors import ConfigError
from .gaction import GroupSpec, resolve_group, trivial_group

logger = logging.getLogger(__name__)


class OutputMode(str, Enum):
    TEXT = "text"
    MACHINE = "machine"


class SessionConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    m: int = Field(default=1, ge=0, description="微分算子个数")
    n: int = Field(default=1, ge=1, description="每个块中的变量个数")
    group: InstanceOf[GroupSpec] = Field(default_factory=trivial_group)
    degree_cap: int = Field(default=3, ge=1, description="探测的次数上界 D")
    order_cap: int = Field(default=3, ge=0, description="探测的导数阶上界 O")
    output: OutputMode = OutputMode.TEXT
    workers: int = Field(default=1, ge=1, description="逐对/逐元素检查的线程数")

    @field_validator("group", mode="before")
    @classmethod
    def _resolve_group(cls, value: Any) -> Any:
        if isinstance(value, str):
            return resolve_group(value)
        if isinstance(value, dict):
            try:
                elements = tuple(value["elements"])
                position = {e: i for i, e in enumerate(elements)}
                table = tuple(tuple(position[x] for x in row) for row in value["table"])
            except KeyError as e:
                raise ValueError(f"群定义缺少或含有未知的项: {e.args[0]}") from None
            return GroupSpec(value.get("name", "custom"), elements, table)
        return value

    @property
    def ambient(self) -> Ambient:
        return self.group.ambient(self.m, self.n)

    @property
    def machine(self) -> bool:
        return self.output == OutputMode.MACHINE

    @property
    def caps(self) -> dict[str, int]:
        return {"degree": self.degree_cap, "order": self.order_cap}


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(x) for x in item["loc"]) or "config"
        parts.append(f"{where}: {item['msg']}")
    return "; ".join(parts)


def build_config(**values: Any) -> SessionConfig:
    """构造配置, 值为 None 的项取默认值"""
    try:
        return SessionConfig(**{k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        raise ConfigError(f"配置不合法: {_describe(e)}") from None


def load_config(path: Optional[Union[str, Path]] = None, **overrides: Any) -> SessionConfig:
    data: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except OSError as e:
            raise ConfigError(f"无法读取配置文件 {path}: {e}") from None
        except yaml.YAMLError as e:
            raise ConfigError(f"配置文件 {path} 不是合法的 YAML: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"配置文件 {path} 的顶层必须是映射")
        logger.debug("已读取配置文件 %s: %s", path, sorted(data))
    data.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(**data)
