"""
报告输出 - 文本模式用 rich 表格, 机器模式每个结果一行 JSON
"""

from __future__ import annotations

import json
from enum import Enum
from typing import Any, Iterable, Optional, Sequence

import click
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from .config import SessionConfig
from .diffpoly import DiffPoly
from .ideals import Truncation
from .reduction import ReductionCertificate

# 固定宽度; 关闭 markup, 变元名 x[e,1] 不能被当成样式标签
console = Console(width=100, highlight=False, markup=False)


class Verdict(str, Enum):
    DONE = "done"
    HOLDS = "holds"
    REFUTED = "refuted"
    INCONCLUSIVE = "inconclusive"

    @property
    def exit_code(self) -> int:
        return {"done": 0, "holds": 0, "refuted": 1, "inconclusive": 2}[self.value]


VERDICT_TEXT = {
    Verdict.DONE: ("完成", "green"),
    Verdict.HOLDS: ("成立", "green"),
    Verdict.REFUTED: ("不成立", "red"),
    Verdict.INCONCLUSIVE: ("上界内未发现违例 (不是证明)", "yellow"),
}


def ambient_record(session: SessionConfig) -> dict:
    return {
        "m": session.m,
        "n": session.n,
        "group": session.group.name,
        "elements": list(session.group.elements),
    }


def emit(
    command: str,
    verdict: Verdict,
    session: SessionConfig,
    truncation: Optional[Truncation] = None,
    **payload: Any,
) -> None:
    """机器模式: 一条记录一行, 键排序"""
    record = {
        "command": command,
        "verdict": verdict.value,
        "ambient": ambient_record(session),
        "caps": session.caps,
        "truncation": truncation.names() if truncation is not None else None,
        **payload,
    }
    click.echo(json.dumps(record, sort_keys=True, ensure_ascii=False))


def print_header(command: str, session: SessionConfig):
    group = session.group
    console.print(
        f"{command}  m={session.m} n={session.n} "
        f"G={group.name} ({' '.join(group.elements)})  "
        f"D={session.degree_cap} O={session.order_cap}",
        style="bold",
    )


def print_verdict(verdict: Verdict, detail: str = ""):
    text, style = VERDICT_TEXT[verdict]
    body = f"{text}\n{detail}" if detail else text
    console.print(Panel(body, title="结论", border_style=style))


def print_table(title: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]):
    table = Table(title=title, show_header=True)
    for i, name in enumerate(columns):
        table.add_column(name, style="cyan" if i == 0 else None)
    for row in rows:
        table.add_row(*[str(x) for x in row])
    console.print(table)


def print_polys(title: str, polys: Iterable[DiffPoly]):
    print_table(title, ["#", "多项式"], ((i, f) for i, f in enumerate(polys)))


def print_truncation(truncation: Optional[Truncation]):
    if truncation is not None:
        names = truncation.names()
        console.print(f"截断 ({len(names)} 个变元): {', '.join(names)}", style="dim")


def print_errors(errors: Iterable[str]):
    errors = list(errors)
    if errors:
        console.print("\n⚠️  问题:", style="bold red")
        for error in errors:
            console.print(f"   - {error}")


def certificate_record(cert: ReductionCertificate) -> dict:
    return {
        "poly": str(cert.f),
        "remainder": str(cert.remainder),
        "exponent": cert.exponent,
        "initial_exponents": list(cert.initial_exponents),
        "separant_exponents": list(cert.separant_exponents),
        "is_h_power": cert.is_h_power,
        "cofactors": [
            {"coefficient": str(c.coefficient), "op": list(c.op.exponents), "index": c.index}
            for c in cert.cofactors
        ],
        "steps": cert.steps,
        "verified": cert.verify(),
    }


def print_certificate(cert: ReductionCertificate):
    basis = cert.basis
    console.print(f"\nf = {cert.f}", style="bold")
    console.print(f"   余式 f0 = {cert.remainder}")
    console.print(
        f"   指数 r = {cert.exponent}  初式指数 {list(cert.initial_exponents)}  "
        f"分离元指数 {list(cert.separant_exponents)}"
    )
    if cert.cofactors:
        rows = []
        for c in cert.cofactors:
            op = str(c.op) or "1"
            rows.append((c.index, op, basis[c.index], c.coefficient))
        print_table("系数", ["Λ 下标", "算子", "Λ 元素", "系数"], rows)
    status = "通过" if cert.verify() else "失败"
    console.print(f"   证书验证: {status}  (约化步数 {cert.steps})")
