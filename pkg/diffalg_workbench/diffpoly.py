"""
微分多项式模块 - ℚ 上 m 个交换微分算子的微分多项式环

变元写作 δ^ξ x_{g,j}: 群元素 g 所在的块, 变量下标 j (从 1 开始), 以及微分算子
δ^ξ = δ_1^{ξ_1}⋯δ_m^{ξ_m}. 排序采用典范有序排序, 比较键为

    (Σξ, 块位置, 变量下标, ξ_1, …, ξ_m)

即把 "变量位置" 一栏展开成 (块位置, 变量下标) 两个分量. 平凡群只有一个块 0.
所有对象构造后不可变.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

from .errors import (
    AmbientMismatchError,
    ConstantPolynomialError,
    DerivationIndexError,
    MissingAssignmentError,
    UnknownGroupElementError,
)

Scalar = Union[int, Fraction]


class Ordering(IntEnum):
    """三值比较结果"""

    LESS = -1
    EQUAL = 0
    GREATER = 1

    @classmethod
    def of(cls, left, right) -> "Ordering":
        if left < right:
            return cls.LESS
        if left > right:
            return cls.GREATER
        return cls.EQUAL


@dataclass(frozen=True)
class DerivOp:
    """微分算子 δ^ξ, ξ ∈ ℕ^m"""

    exponents: tuple[int, ...]

    def __post_init__(self):
        if any(e < 0 for e in self.exponents):
            raise ValueError(f"微分算子指数必须非负: {self.exponents}")

    @classmethod
    def zero(cls, m: int) -> "DerivOp":
        return cls((0,) * m)

    @classmethod
    def unit(cls, m: int, j: int) -> "DerivOp":
        return cls.zero(m).bump(j)

    @property
    def m(self) -> int:
        return len(self.exponents)

    @property
    def order(self) -> int:
        return sum(self.exponents)

    @property
    def is_identity(self) -> bool:
        return self.order == 0

    def bump(self, j: int, times: int = 1) -> "DerivOp":
        """第 j 个分量加 times (j 从 1 开始)"""
        if not 1 <= j <= self.m:
            raise DerivationIndexError(j, self.m)
        exps = list(self.exponents)
        exps[j - 1] += times
        return DerivOp(tuple(exps))

    def divides(self, other: "DerivOp") -> bool:
        """other 是否为 self 的导数 (分量逐个不小于)"""
        return all(a <= b for a, b in zip(self.exponents, other.exponents))

    def lcm(self, other: "DerivOp") -> "DerivOp":
        return DerivOp(tuple(max(a, b) for a, b in zip(self.exponents, other.exponents)))

    def __add__(self, other: "DerivOp") -> "DerivOp":
        return DerivOp(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __sub__(self, other: "DerivOp") -> "DerivOp":
        return DerivOp(tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def steps(self) -> Iterator[int]:
        """按 δ_1, δ_2, … 的顺序逐次给出微分下标"""
        for j, e in enumerate(self.exponents, start=1):
            for _ in range(e):
                yield j

    def __str__(self) -> str:
        parts = []
        for j, e in enumerate(self.exponents, start=1):
            if e == 1:
                parts.append(f"d{j}")
            elif e > 1:
                parts.append(f"d{j}^{e}")
        return " ".join(parts)


@functools.total_ordering
@dataclass(frozen=True)
class Indeterminate:
    """代数变元 δ^ξ x_{block,index}"""

    block: int
    index: int
    op: DerivOp

    @functools.cached_property
    def key(self) -> tuple[int, ...]:
        return (self.op.order, self.block, self.index, *self.op.exponents)

    @property
    def base(self) -> tuple[int, int]:
        return (self.block, self.index)

    @property
    def order(self) -> int:
        return self.op.order

    def derive(self, j: int, times: int = 1) -> "Indeterminate":
        return Indeterminate(self.block, self.index, self.op.bump(j, times))

    def derive_by(self, op: DerivOp) -> "Indeterminate":
        return Indeterminate(self.block, self.index, self.op + op)

    def with_block(self, block: int) -> "Indeterminate":
        return Indeterminate(block, self.index, self.op)

    def is_derivative_of(self, other: "Indeterminate") -> bool:
        return self.base == other.base and other.op.divides(self.op)

    def is_proper_derivative_of(self, other: "Indeterminate") -> bool:
        return self.is_derivative_of(other) and self.op != other.op

    def __lt__(self, other: "Indeterminate") -> bool:
        return self.key < other.key

    def __str__(self) -> str:
        ops = str(self.op)
        head = f"{ops} " if ops else ""
        return f"{head}x[{self.block}:{self.index}]"


@dataclass(frozen=True)
class Ambient:
    """环境: m 个微分算子, n 个基本变量, 群元素按声明顺序排列 (单位元在前)"""

    m: int
    n: int
    elements: tuple[str, ...] = ("e",)

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"m 必须非负: {self.m}")
        if self.n < 1:
            raise ValueError(f"n 必须至少为 1: {self.n}")
        if not self.elements or len(set(self.elements)) != len(self.elements):
            raise ValueError(f"群元素名必须非空且互不相同: {self.elements}")

    @property
    def ell(self) -> int:
        return len(self.elements)

    def block_of(self, name: str) -> int:
        try:
            return self.elements.index(name)
        except ValueError:
            raise UnknownGroupElementError(name, self.elements) from None

    def admits(self, v: Indeterminate) -> bool:
        return (
            v.op.m == self.m
            and 1 <= v.index <= self.n
            and 0 <= v.block < self.ell
        )

    def indeterminate(
        self, index: int, block: int = 0, exponents: Optional[Iterable[int]] = None
    ) -> Indeterminate:
        op = DerivOp(tuple(exponents)) if exponents is not None else DerivOp.zero(self.m)
        v = Indeterminate(block, index, op)
        if not self.admits(v):
            raise AmbientMismatchError(v, self)
        return v

    def variable(
        self, index: int, block: int = 0, exponents: Optional[Iterable[int]] = None
    ) -> "DiffPoly":
        return DiffPoly.from_indeterminate(self, self.indeterminate(index, block, exponents))

    def constant(self, value: Scalar) -> "DiffPoly":
        return DiffPoly.constant(self, value)

    def zero(self) -> "DiffPoly":
        return DiffPoly(self)

    def one(self) -> "DiffPoly":
        return DiffPoly.constant(self, 1)

    def indet_name(self, v: Indeterminate) -> str:
        ops = str(v.op)
        head = f"{ops} " if ops else ""
        if self.ell == 1:
            return f"{head}x[{v.index}]"
        return f"{head}x[{self.elements[v.block]},{v.index}]"

    def __str__(self) -> str:
        return f"(m={self.m}, n={self.n}, G={{{' '.join(self.elements)}}})"


def compare_indets(u: Indeterminate, v: Indeterminate) -> Ordering:
    """典范有序排序下比较两个变元"""
    if u.op.m != v.op.m:
        raise AmbientMismatchError(u, v)
    return Ordering.of(u.key, v.key)


@dataclass(frozen=True)
class Monomial:
    """单项式: 变元到正指数的映射, 因子按排序从高到低存放"""

    factors: tuple[tuple[Indeterminate, int], ...] = ()

    @classmethod
    def of(cls, exps: Mapping[Indeterminate, int]) -> "Monomial":
        items = [(v, e) for v, e in exps.items() if e]
        items.sort(key=lambda item: item[0].key, reverse=True)
        return cls(tuple(items))

    @functools.cached_property
    def degree(self) -> int:
        return sum(e for _, e in self.factors)

    @functools.cached_property
    def sort_key(self) -> tuple:
        # 先比总次数, 再从最高变元起按 (变元, 指数) 比较
        return (self.degree, tuple((v.key, e) for v, e in self.factors))

    @property
    def is_one(self) -> bool:
        return not self.factors

    def as_dict(self) -> dict[Indeterminate, int]:
        return dict(self.factors)

    def exponent(self, v: Indeterminate) -> int:
        for w, e in self.factors:
            if w == v:
                return e
        return 0

    def indeterminates(self) -> tuple[Indeterminate, ...]:
        return tuple(v for v, _ in self.factors)

    def __mul__(self, other: "Monomial") -> "Monomial":
        if not other.factors:
            return self
        if not self.factors:
            return other
        exps = self.as_dict()
        for v, e in other.factors:
            exps[v] = exps.get(v, 0) + e
        return Monomial.of(exps)

    def without(self, v: Indeterminate) -> "Monomial":
        return Monomial(tuple(item for item in self.factors if item[0] != v))


ONE = Monomial()


def _fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    raise TypeError(f"系数必须是有理数: {value!r}")


class DiffPoly:
    """
    ℚ 上的微分多项式

    内部保存 {Monomial: Fraction}, 不含零系数. 项的典范顺序按单项式的
    (次数, 排序) 从高到低.
    """

    __slots__ = ("ambient", "_terms", "_hash", "_ordered")

    def __init__(
        self,
        ambient: Ambient,
        terms: Optional[Mapping[Monomial, Scalar]] = None,
    ):
        clean: dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            c = _fraction(coeff)
            if c == 0:
                continue
            for v in mono.indeterminates():
                if not ambient.admits(v):
                    raise AmbientMismatchError(v, ambient)
            clean[mono] = clean.get(mono, Fraction(0)) + c
            if clean[mono] == 0:
                del clean[mono]
        self.ambient = ambient
        self._terms = clean
        self._hash = None
        self._ordered = None

    @classmethod
    def _raw(cls, ambient: Ambient, terms: dict[Monomial, Fraction]) -> "DiffPoly":
        """内部快速构造, 调用方保证 terms 已规范"""
        poly = cls.__new__(cls)
        poly.ambient = ambient
        poly._terms = terms
        poly._hash = None
        poly._ordered = None
        return poly

    @classmethod
    def constant(cls, ambient: Ambient, value: Scalar) -> "DiffPoly":
        c = _fraction(value)
        return cls._raw(ambient, {ONE: c} if c else {})

    @classmethod
    def from_indeterminate(cls, ambient: Ambient, v: Indeterminate, power: int = 1) -> "DiffPoly":
        return cls(ambient, {Monomial(((v, power),)): 1})

    # ---- 访问 ----

    @property
    def terms(self) -> tuple[tuple[Monomial, Fraction], ...]:
        """按典范顺序 (从高到低) 排列的项"""
        if self._ordered is None:
            self._ordered = tuple(
                sorted(self._terms.items(), key=lambda t: t[0].sort_key, reverse=True)
            )
        return self._ordered

    def as_dict(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(m.is_one for m in self._terms)

    @property
    def constant_value(self) -> Fraction:
        return self._terms.get(ONE, Fraction(0))

    @property
    def total_degree(self) -> int:
        return max((m.degree for m in self._terms), default=0)

    @property
    def max_order(self) -> int:
        return max((v.order for v in self.indeterminates()), default=0)

    def indeterminates(self) -> frozenset[Indeterminate]:
        return frozenset(v for m in self._terms for v in m.indeterminates())

    def degree_in(self, v: Indeterminate) -> int:
        return max((m.exponent(v) for m in self._terms), default=0)

    def coefficients_in(self, v: Indeterminate) -> dict[int, "DiffPoly"]:
        """把多项式看作 v 的一元多项式, 返回 {次数: 系数}"""
        buckets: dict[int, dict[Monomial, Fraction]] = {}
        for mono, c in self._terms.items():
            k = mono.exponent(v)
            rest = mono.without(v) if k else mono
            buckets.setdefault(k, {})[rest] = c
        return {k: DiffPoly._raw(self.ambient, b) for k, b in buckets.items()}

    def coefficient(self, v: Indeterminate, k: int) -> "DiffPoly":
        return self.coefficients_in(v).get(k, DiffPoly(self.ambient))

    # ---- 算术 ----

    def _check(self, other: "DiffPoly"):
        if self.ambient != other.ambient:
            raise AmbientMismatchError(self.ambient, other.ambient)

    def _coerce(self, other) -> "DiffPoly":
        if isinstance(other, DiffPoly):
            self._check(other)
            return other
        return DiffPoly.constant(self.ambient, other)

    def __add__(self, other) -> "DiffPoly":
        other = self._coerce(other)
        out = dict(self._terms)
        for mono, c in other._terms.items():
            s = out.get(mono, 0) + c
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return DiffPoly._raw(self.ambient, out)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly._raw(self.ambient, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "DiffPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "DiffPoly":
        return self._coerce(other) - self

    def scale(self, value: Scalar) -> "DiffPoly":
        c = _fraction(value)
        if c == 0:
            return DiffPoly(self.ambient)
        return DiffPoly._raw(self.ambient, {m: c * a for m, a in self._terms.items()})

    def __mul__(self, other) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            return self.scale(other)
        self._check(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = m1 * m2
                s = out.get(mono, 0) + c1 * c2
                if s:
                    out[mono] = s
                else:
                    out.pop(mono, None)
        return DiffPoly._raw(self.ambient, out)

    def __rmul__(self, other) -> "DiffPoly":
        return self.scale(other)

    def __pow__(self, k: int) -> "DiffPoly":
        if k < 0:
            raise ValueError("不支持负指数")
        result = DiffPoly.constant(self.ambient, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, DiffPoly):
            return self.ambient == other.ambient and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant and self.constant_value == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ambient, frozenset(self._terms.items())))
        return self._hash

    # ---- 微分与替换 ----

    def partial(self, v: Indeterminate) -> "DiffPoly":
        """把变元看作彼此独立时对 v 的形式偏导"""
        out: dict[Monomial, Fraction] = {}
        for mono, c in self._terms.items():
            k = mono.exponent(v)
            if not k:
                continue
            exps = mono.as_dict()
            exps[v] = k - 1
            out[Monomial.of(exps)] = c * k
        return DiffPoly._raw(self.ambient, out)

    def derivative(self, j: int) -> "DiffPoly":
        """δ_j f, 按 Leibniz 法则"""
        if not 1 <= j <= self.ambient.m:
            raise DerivationIndexError(j, self.ambient.m)
        out: dict[Monomial, Fraction] = {}
        for mono, c in self._terms.items():
            for v, k in mono.factors:
                exps = mono.as_dict()
                exps[v] = k - 1
                dv = v.derive(j)
                exps[dv] = exps.get(dv, 0) + 1
                new = Monomial.of(exps)
                s = out.get(new, 0) + c * k
                if s:
                    out[new] = s
                else:
                    out.pop(new, None)
        return DiffPoly._raw(self.ambient, out)

    def derivative_by(self, op: DerivOp) -> "DiffPoly":
        result = self
        for j in op.steps():
            result = result.derivative(j)
        return result

    def map_indeterminates(self, fn: Callable[[Indeterminate], Indeterminate]) -> "DiffPoly":
        """逐个变元改名 (fn 必须是单射)"""
        out = {}
        for mono, c in self._terms.items():
            out[Monomial.of({fn(v): e for v, e in mono.factors})] = c
        return DiffPoly(self.ambient, out)

    def substitute(self, mapping: Mapping[Indeterminate, "DiffPoly"]) -> "DiffPoly":
        """把变元替换为多项式, 未出现在 mapping 中的变元保持不变"""
        result = DiffPoly(self.ambient)
        powers: dict[tuple[Indeterminate, int], DiffPoly] = {}
        for mono, c in self._terms.items():
            term = DiffPoly.constant(self.ambient, c)
            for v, e in mono.factors:
                if v in mapping:
                    key = (v, e)
                    if key not in powers:
                        powers[key] = mapping[v] ** e
                    term = term * powers[key]
                else:
                    term = term * DiffPoly.from_indeterminate(self.ambient, v, e)
            result = result + term
        return result

    def evaluate(self, assignment: Mapping[Indeterminate, Scalar]) -> Fraction:
        return evaluate(self, assignment)

    def __repr__(self) -> str:
        from .parser import print_poly

        return f"DiffPoly({print_poly(self)!r})"

    def __str__(self) -> str:
        from .parser import print_poly

        return print_poly(self)


# ---- 结构提取 ----


@functools.total_ordering
@dataclass(frozen=True)
class Rank:
    """多项式的秩 (首项变元, 次数), 按 (key, degree) 字典序比较"""

    leader: Indeterminate
    degree: int

    @property
    def key(self) -> tuple[int, ...]:
        return self.leader.key

    def __lt__(self, other: "Rank") -> bool:
        return (self.key, self.degree) < (other.key, other.degree)


def apply_derivation(j: int, f: DiffPoly) -> DiffPoly:
    return f.derivative(j)


def leader(f: DiffPoly) -> Indeterminate:
    """f 中排序最高的变元"""
    indets = f.indeterminates()
    if not indets:
        raise ConstantPolynomialError("leader")
    return max(indets, key=lambda v: v.key)


def degree_in_leader(f: DiffPoly) -> int:
    return f.degree_in(leader(f))


def rank(f: DiffPoly) -> Rank:
    u = leader(f)
    return Rank(u, f.degree_in(u))


def separant(f: DiffPoly) -> DiffPoly:
    return f.partial(leader(f))


def initial(f: DiffPoly) -> DiffPoly:
    u = leader(f)
    return f.coefficient(u, f.degree_in(u))


def h_product(elements: Iterable[DiffPoly]) -> DiffPoly:
    """H_Λ = ∏ i_f · s_f"""
    elements = list(elements)
    if not elements:
        raise ValueError("空集合没有 H")
    result = DiffPoly.constant(elements[0].ambient, 1)
    for f in elements:
        result = result * initial(f) * separant(f)
    return result


def is_partially_reduced(g: DiffPoly, f: DiffPoly) -> bool:
    u = leader(f)
    return not any(v.is_proper_derivative_of(u) for v in g.indeterminates())


def is_reduced(g: DiffPoly, f: DiffPoly) -> bool:
    if not is_partially_reduced(g, f):
        return False
    u = leader(f)
    return g.degree_in(u) < f.degree_in(u)


def is_reduced_wrt_set(g: DiffPoly, elements: Iterable[DiffPoly]) -> bool:
    return all(is_reduced(g, f) for f in elements)


def evaluate(f: DiffPoly, assignment: Mapping[Indeterminate, Scalar]) -> Fraction:
    """把每个 δ^ξ x 看作独立变元做普通代入"""
    missing = sorted(
        (v for v in f.indeterminates() if v not in assignment), key=lambda v: v.key
    )
    if missing:
        raise MissingAssignmentError([f.ambient.indet_name(v) for v in missing])
    total = Fraction(0)
    for mono, c in f._terms.items():
        value = c
        for v, e in mono.factors:
            value *= _fraction(assignment[v]) ** e
        total += value
    return total
