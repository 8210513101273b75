"""
群作用模块 - 有限群, σ 作用, G 不变性检验与对角理想

群 G = {g_1, …, g_ℓ} 以 Cayley 表给出, g_1 为单位元. σ_g 通过左乘重排变元块:
σ_g(δ^ξ x_{g_i,j}) = δ^ξ x_{g·g_i,j}, 系数不变, 与所有 δ_j 交换.
"""

from __future__ import annotations

import functools
import itertools
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import yaml

from .diffpoly import Ambient, DiffPoly
from .errors import (
    AmbientMismatchError,
    ArityError,
    BlockError,
    GroupSpecError,
    ParseError,
    UnknownGroupElementError,
)
from .ideals import Truncation, TruncatedIdeal, saturate
from .reduction import AutoreducedSet, minimal_autoreduced_subset
from .rosenfeld import CharSetReport, parallel_map, prolong

logger = logging.getLogger(__name__)

CATALOG_PATH = Path(__file__).parent / "knowledge" / "groups.yaml"

NAME_PATTERN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# 超过这个阶数时跳过结合律的穷举检查
ASSOCIATIVITY_LIMIT = 24

ElementRef = Union[int, str]


@dataclass(frozen=True)
class GroupSpec:
    """有限群: 元素名 (单位元在前) 与 Cayley 表 table[a][b] = a·b 的下标"""

    name: str
    elements: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        ell = len(self.elements)
        if not ell:
            raise GroupSpecError("群至少要有一个元素")
        for e in self.elements:
            if not NAME_PATTERN.match(e):
                raise GroupSpecError(f"元素名不合法: {e!r}")
        if len(set(self.elements)) != ell:
            raise GroupSpecError(f"元素名重复: {' '.join(self.elements)}")
        if len(self.table) != ell or any(len(row) != ell for row in self.table):
            raise GroupSpecError(f"乘法表必须是 {ell}×{ell}")
        if any(not 0 <= x < ell for row in self.table for x in row):
            raise GroupSpecError("乘法表含有越界的元素")

        full = list(range(ell))
        if list(self.table[0]) != full or [row[0] for row in self.table] != full:
            raise GroupSpecError(f"第一个元素 {self.elements[0]} 不是单位元")
        for a, row in enumerate(self.table):
            if sorted(row) != full:
                raise GroupSpecError(f"{self.elements[a]} 所在的行不是置换")
        for b in range(ell):
            if sorted(row[b] for row in self.table) != full:
                raise GroupSpecError(f"{self.elements[b]} 所在的列不是置换")

        if ell <= ASSOCIATIVITY_LIMIT:
            t = self.table
            for a, b, c in itertools.product(range(ell), repeat=3):
                if t[t[a][b]][c] != t[a][t[b][c]]:
                    names = self.elements
                    raise GroupSpecError(f"结合律不成立: ({names[a]}, {names[b]}, {names[c]})")
        else:
            logger.warning("群 %s 有 %d 个元素, 跳过结合律检查", self.name, ell)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def is_trivial(self) -> bool:
        return self.order == 1

    @functools.cached_property
    def inverse(self) -> tuple[int, ...]:
        return tuple(row.index(0) for row in self.table)

    def index(self, name: str) -> int:
        try:
            return self.elements.index(name)
        except ValueError:
            raise UnknownGroupElementError(name, self.elements) from None

    def resolve(self, g: ElementRef) -> int:
        if isinstance(g, int):
            if not 0 <= g < self.order:
                raise UnknownGroupElementError(g, self.elements)
            return g
        return self.index(g)

    def mul(self, a: ElementRef, b: ElementRef) -> int:
        return self.table[self.resolve(a)][self.resolve(b)]

    def ambient(self, m: int, n: int) -> Ambient:
        return Ambient(m, n, self.elements)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "elements": list(self.elements),
            "table": [[self.elements[x] for x in row] for row in self.table],
        }

    def to_text(self) -> str:
        lines = [f"elements: {' '.join(self.elements)}"]
        lines += [" ".join(self.elements[x] for x in row) for row in self.table]
        return "\n".join(lines) + "\n"


# ---- 内置群 ----


def trivial_group() -> GroupSpec:
    return GroupSpec("trivial", ("e",), ((0,),))


def cyclic_group(k: int) -> GroupSpec:
    """ℤ/k, 元素记作 e, g, g2, …"""
    if k < 1:
        raise GroupSpecError(f"循环群阶数必须为正: {k}")
    names = tuple("e" if i == 0 else "g" if i == 1 else f"g{i}" for i in range(k))
    table = tuple(tuple((a + b) % k for b in range(k)) for a in range(k))
    return GroupSpec(f"cyclic:{k}", names, table)


def symmetric_group(k: int) -> GroupSpec:
    """S_k, 置换 p 记作 "p" 加上 p(1)…p(k), 恒等置换记作 e; 乘法为复合 (a·b)(i) = a(b(i))"""
    if not 1 <= k <= 4:
        raise GroupSpecError(f"对称群只支持 1 ≤ k ≤ 4: {k}")
    perms = list(itertools.permutations(range(k)))
    position = {p: i for i, p in enumerate(perms)}
    names = tuple(
        "e" if i == 0 else "p" + "".join(str(x + 1) for x in p) for i, p in enumerate(perms)
    )
    table = tuple(
        tuple(position[tuple(a[b[i]] for i in range(k))] for b in perms) for a in perms
    )
    return GroupSpec(f"sym:{k}", names, table)


@functools.lru_cache(maxsize=1)
def load_catalog(path: Path = CATALOG_PATH) -> dict[str, GroupSpec]:
    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    catalog = {}
    for name, entry in (data.get("groups") or {}).items():
        elements = tuple(entry["elements"])
        position = {e: i for i, e in enumerate(elements)}
        try:
            table = tuple(tuple(position[x] for x in row) for row in entry["table"])
        except KeyError as e:
            raise GroupSpecError(f"群目录 {name}: 未知元素 {e.args[0]}") from None
        catalog[name] = GroupSpec(name, elements, table)
    return catalog


def _builtin(text: str) -> Optional[GroupSpec]:
    if text == "trivial":
        return trivial_group()
    kind, sep, arg = text.partition(":")
    if sep and kind in ("cyclic", "sym"):
        if not arg.isdigit():
            raise GroupSpecError(f"群阶数必须是正整数: {text}")
        return cyclic_group(int(arg)) if kind == "cyclic" else symmetric_group(int(arg))
    return load_catalog().get(text)


def resolve_group(text: str) -> GroupSpec:
    """trivial, cyclic:k, sym:k, 目录中的名字, 或者群文件路径"""
    text = text.strip()
    group = _builtin(text)
    if group is not None:
        return group
    path = Path(text)
    if path.is_file():
        return load_group_file(path)
    known = ", ".join(["trivial", "cyclic:k", "sym:k", *sorted(load_catalog())])
    raise GroupSpecError(f"未知群: {text} (可选: {known}, 或群文件路径)")


def parse_group_text(text: str, source: str = "<group>", name: Optional[str] = None) -> GroupSpec:
    """
    群文件: 表头 `elements: e g h …`, 之后 ℓ 行乘法表, 每行 ℓ 个元素名.
    `#` 之后为注释, 空行忽略.
    """
    rows: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if line.strip():
            rows.append((lineno, line))
    if not rows:
        raise ParseError("群文件为空", 1, 1, source)

    lineno, header = rows[0]
    key, sep, rest = header.partition(":")
    if not sep or key.strip() != "elements":
        column = len(header) - len(header.lstrip()) + 1
        raise ParseError("缺少表头 'elements:'", lineno, column, source)
    elements = rest.split()
    if not elements:
        raise ParseError("表头没有给出元素", lineno, len(header) + 1, source)
    position = {e: i for i, e in enumerate(elements)}

    table = []
    for lineno, line in rows[1:]:
        row = []
        for match in re.finditer(r"\S+", line):
            token = match.group()
            if token not in position:
                raise ParseError(f"未知元素 {token}", lineno, match.start() + 1, source)
            row.append(position[token])
        if len(row) != len(elements):
            raise ParseError(f"每行需要 {len(elements)} 个元素, 实际 {len(row)} 个", lineno, 1, source)
        table.append(tuple(row))
    if len(table) != len(elements):
        raise ParseError(
            f"乘法表需要 {len(elements)} 行, 实际 {len(table)} 行", rows[-1][0], 1, source
        )
    return GroupSpec(name or Path(source).stem, tuple(elements), tuple(table))


def load_group_file(path: Union[str, Path]) -> GroupSpec:
    path = Path(path)
    return parse_group_text(path.read_text(encoding="utf-8"), str(path), path.stem)


# ---- σ 作用 ----


@dataclass(frozen=True)
class GAmbient:
    """群 G 上的 n 个变量, m 个微分算子"""

    group: GroupSpec
    n: int
    m: int

    @property
    def ambient(self) -> Ambient:
        return self.group.ambient(self.m, self.n)

    def stamps(self, f: DiffPoly) -> bool:
        return f.ambient == self.ambient


def _check_group(f: DiffPoly, group: GroupSpec):
    if f.ambient.elements != group.elements:
        raise AmbientMismatchError(f.ambient, group.name)


def sigma_apply(g: ElementRef, f: DiffPoly, group: GroupSpec) -> DiffPoly:
    """σ_g(f): 每个变元的块左乘 g"""
    _check_group(f, group)
    gi = group.resolve(g)
    if gi == 0:
        return f
    row = group.table[gi]
    return f.map_indeterminates(lambda v: v.with_block(row[v.block]))


def symbolic_point(ambient: Ambient) -> list[DiffPoly]:
    """(x_{e,1}, …, x_{e,n})"""
    return [ambient.variable(j) for j in range(1, ambient.n + 1)]


def bar_sigma_expand(base: Sequence[DiffPoly], group: GroupSpec) -> tuple[DiffPoly, ...]:
    """σ̄(a) = (σ_{g_i}(a_j) : 1 ≤ i ≤ ℓ, 1 ≤ j ≤ n), i 在外层"""
    if not base:
        raise ArityError(1, 0)
    n = base[0].ambient.n
    if len(base) != n:
        raise ArityError(n, len(base))
    return tuple(sigma_apply(g, a, group) for g in range(group.order) for a in base)


def substitute_orbit(f: DiffPoly, base: Sequence[DiffPoly], group: GroupSpec) -> DiffPoly:
    """把 σ̄(base) 代入 f: δ^ξ x_{g_i,j} 换成 δ^ξ σ_{g_i}(base_j)"""
    _check_group(f, group)
    orbit = bar_sigma_expand(base, group)
    n = f.ambient.n
    mapping = {
        v: orbit[v.block * n + v.index - 1].derivative_by(v.op) for v in f.indeterminates()
    }
    return f.substitute(mapping)


# ---- G 不变性 ----


@dataclass(frozen=True)
class ElementCheck:
    """单个群元素 g 的四个条件, P 为 Λ 给出的理想, P_g 为 σ_g(Λ) 给出的理想"""

    element: str
    pg_contains_lambda: bool
    pg_excludes_h: bool
    p_contains_lambda_g: bool
    p_excludes_h_g: bool
    truncation: Truncation

    @property
    def invariant(self) -> bool:
        return (
            self.pg_contains_lambda
            and self.pg_excludes_h
            and self.p_contains_lambda_g
            and self.p_excludes_h_g
        )

    def to_dict(self) -> dict:
        return {
            "element": self.element,
            "invariant": self.invariant,
            "pg_contains_lambda": self.pg_contains_lambda,
            "pg_excludes_h": self.pg_excludes_h,
            "p_contains_lambda_g": self.p_contains_lambda_g,
            "p_excludes_h_g": self.p_excludes_h_g,
            "truncation": self.truncation.names(),
        }


@dataclass
class InvarianceReport:
    group: GroupSpec
    elements: tuple[DiffPoly, ...]
    checks: tuple[ElementCheck, ...] = ()
    caps: Optional[dict] = None
    charset_passed: Optional[bool] = None
    notes: list[str] = field(default_factory=list)

    @property
    def invariant(self) -> bool:
        return all(c.invariant for c in self.checks)

    @property
    def witness(self) -> Optional[ElementCheck]:
        return next((c for c in self.checks if not c.invariant), None)

    def to_dict(self) -> dict:
        return {
            "group": self.group.name,
            "elements": [str(f) for f in self.elements],
            "invariant": self.invariant,
            "checks": [c.to_dict() for c in self.checks],
            "charset_caps": self.caps,
            "charset_passed": self.charset_passed,
            "notes": list(self.notes),
        }


def _check_element(basis: AutoreducedSet, group: GroupSpec, g: int) -> ElementCheck:
    order = basis.max_order
    lam = list(basis)
    lam_g = [sigma_apply(g, f, group) for f in lam]
    h = basis.h_product
    h_g = sigma_apply(g, h, group)

    gens = [p.poly for p in prolong(lam, order)]
    gens_g = [p.poly for p in prolong(lam_g, order)]
    truncation = Truncation.spanning([*gens, *gens_g, h, h_g], basis.ambient)
    p = saturate(TruncatedIdeal(truncation, gens), h)
    p_g = saturate(TruncatedIdeal(truncation, gens_g), h_g)

    check = ElementCheck(
        element=group.elements[g],
        pg_contains_lambda=all(p_g.contains(f) for f in lam),
        pg_excludes_h=not p_g.contains(h),
        p_contains_lambda_g=all(p.contains(f) for f in lam_g),
        p_excludes_h_g=not p.contains(h_g),
        truncation=truncation,
    )
    logger.info("σ_%s: %s", check.element, "不变" if check.invariant else "不满足")
    return check


def g_invariance_check(
    basis: AutoreducedSet,
    group: GroupSpec,
    charset: Optional[CharSetReport] = None,
    workers: int = 1,
) -> InvarianceReport:
    """
    对每个非单位元 g 比较 Λ 与 σ_g(Λ) 给出的素微分理想

    两边都延拓到 Λ 的最高阶再做饱和, σ_g(Λ) 的饱和元取 σ_g(H_Λ).
    不重新检验素性, 只记录调用方给出的特征集报告的上界.
    """
    if basis.ambient.elements != group.elements:
        raise AmbientMismatchError(basis.ambient, group.name)
    report = InvarianceReport(group, tuple(basis))
    if charset is not None:
        report.caps = {"degree": charset.degree_cap, "order": charset.order_cap}
        report.charset_passed = charset.passed
        if not charset.passed:
            report.notes.append("特征集检查在上界内发现违例, 不变性结论不可靠")
    if not basis.elements:
        return report
    report.checks = tuple(
        parallel_map(lambda g: _check_element(basis, group, g), range(1, group.order), workers)
    )
    return report


def diagonal_ideal(
    basis: Union[AutoreducedSet, Sequence[DiffPoly]], group: GroupSpec
) -> list[DiffPoly]:
    """Λ ∪ {x_{g_1,j} − x_{g_i,j} : 2 ≤ i ≤ ℓ, 1 ≤ j ≤ n}"""
    elements = list(basis)
    if isinstance(basis, AutoreducedSet):
        ambient = basis.ambient
    elif elements:
        ambient = elements[0].ambient
    else:
        raise ValueError("空的生成元列表无法确定环境")
    if ambient.elements != group.elements:
        raise AmbientMismatchError(ambient, group.name)
    foreign = sorted(
        {ambient.indet_name(v) for f in elements for v in f.indeterminates() if v.block != 0}
    )
    if foreign:
        raise BlockError(foreign)
    out = list(elements)
    for i in range(1, group.order):
        for j in range(1, ambient.n + 1):
            out.append(ambient.variable(j) - ambient.variable(j, block=i))
    return out


def diagonal_check(
    basis: Union[AutoreducedSet, Sequence[DiffPoly]],
    group: GroupSpec,
    charset: Optional[CharSetReport] = None,
    workers: int = 1,
) -> InvarianceReport:
    """对角理想的生成元先取最小自约化子集, 再做不变性检验"""
    subset = minimal_autoreduced_subset(diagonal_ideal(basis, group))
    return g_invariance_check(subset, group, charset, workers)
