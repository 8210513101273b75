"""
微分约化模块 - 带证书的微分除法, 自约化集校验, 以及自约化集之间的排序
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .diffpoly import (
    Ambient,
    DerivOp,
    DiffPoly,
    Indeterminate,
    Ordering,
    Rank,
    evaluate,
    h_product,
    initial,
    is_reduced,
    leader,
    rank,
    separant,
)
from .errors import AmbientMismatchError, AutoreducedViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AutoreducedSet:
    """按秩严格递增排列的自约化集 Λ

    只应通过 validate_autoreduced 或 minimal_autoreduced_subset 构造.
    """

    elements: tuple[DiffPoly, ...]
    ambient: Ambient

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i: int) -> DiffPoly:
        return self.elements[i]

    @functools.cached_property
    def ranks(self) -> tuple[Rank, ...]:
        return tuple(rank(f) for f in self.elements)

    @property
    def leaders(self) -> tuple[Indeterminate, ...]:
        return tuple(r.leader for r in self.ranks)

    @functools.cached_property
    def initials(self) -> tuple[DiffPoly, ...]:
        return tuple(initial(f) for f in self.elements)

    @functools.cached_property
    def separants(self) -> tuple[DiffPoly, ...]:
        return tuple(separant(f) for f in self.elements)

    @functools.cached_property
    def h_product(self) -> DiffPoly:
        if not self.elements:
            return self.ambient.one()
        return h_product(self.elements)

    @property
    def max_order(self) -> int:
        return max((u.order for u in self.leaders), default=0)


@dataclass(frozen=True)
class Cofactor:
    """证书中的一项 coefficient · δ^op(Λ[index])"""

    coefficient: DiffPoly
    op: DerivOp
    index: int


@dataclass(frozen=True)
class ReductionCertificate:
    """
    微分除法的证书

    乘子 M = ∏ i_k^{a_k} s_k^{b_k} 满足

        M · f = remainder + Σ coefficient · δ^op(Λ[index])

    exponent r = max(a_k, b_k), 因此 M 整除 H_Λ^r.
    """

    f: DiffPoly
    basis: AutoreducedSet
    remainder: DiffPoly
    cofactors: tuple[Cofactor, ...]
    initial_exponents: tuple[int, ...]
    separant_exponents: tuple[int, ...]
    steps: int = 0

    @property
    def exponent(self) -> int:
        return max((*self.initial_exponents, *self.separant_exponents), default=0)

    @property
    def multiplier(self) -> DiffPoly:
        result = self.f.ambient.one()
        for i, a in zip(self.basis.initials, self.initial_exponents):
            if a:
                result = result * i**a
        for s, b in zip(self.basis.separants, self.separant_exponents):
            if b:
                result = result * s**b
        return result

    @property
    def is_h_power(self) -> bool:
        """乘子是否恰为 H_Λ^r"""
        return self.multiplier == self.basis.h_product**self.exponent

    def combination(self) -> DiffPoly:
        total = self.f.ambient.zero()
        for c in self.cofactors:
            total = total + c.coefficient * self.basis[c.index].derivative_by(c.op)
        return total

    def verify(self) -> bool:
        return self.multiplier * self.f == self.remainder + self.combination()

    def indeterminates(self) -> frozenset[Indeterminate]:
        """证书恒等式两边出现的全部变元"""
        seen = set(self.f.indeterminates()) | set(self.remainder.indeterminates())
        seen |= self.multiplier.indeterminates()
        for c in self.cofactors:
            seen |= c.coefficient.indeterminates()
            seen |= self.basis[c.index].derivative_by(c.op).indeterminates()
        return frozenset(seen)

    def verify_at(self, assignment: Mapping[Indeterminate, Fraction]) -> bool:
        lhs = evaluate(self.multiplier, assignment) * evaluate(self.f, assignment)
        rhs = evaluate(self.remainder, assignment)
        for c in self.cofactors:
            lam = self.basis[c.index].derivative_by(c.op)
            rhs += evaluate(c.coefficient, assignment) * evaluate(lam, assignment)
        return lhs == rhs

    def h_lifted(self) -> tuple[int, DiffPoly, tuple[Cofactor, ...]]:
        """乘以 H_Λ^r / M, 得到 H_Λ^r · f = N·f_0 + Σ N·coefficient · δ^op(Λ[index])"""
        r = self.exponent
        lift = self.f.ambient.one()
        for i, a in zip(self.basis.initials, self.initial_exponents):
            lift = lift * i ** (r - a)
        for s, b in zip(self.basis.separants, self.separant_exponents):
            lift = lift * s ** (r - b)
        cofactors = tuple(Cofactor(lift * c.coefficient, c.op, c.index) for c in self.cofactors)
        return r, lift * self.remainder, cofactors


def _check_same_ambient(f: DiffPoly, ambient: Ambient):
    if f.ambient != ambient:
        raise AmbientMismatchError(f.ambient, ambient)


def validate_autoreduced(
    polys: Iterable[DiffPoly], ambient: Optional[Ambient] = None
) -> AutoreducedSet:
    """按秩排序并检查两两约化, 失败时抛出 AutoreducedViolation 并附上出问题的一对"""
    polys = list(polys)
    if ambient is None:
        if not polys:
            raise AutoreducedViolation("空集合需要显式给出环境")
        ambient = polys[0].ambient
    for f in polys:
        _check_same_ambient(f, ambient)
        if f.is_constant:
            raise AutoreducedViolation(f"含有常数元素 {f}")

    ordered = sorted(polys, key=rank)
    for a, b in zip(ordered, ordered[1:]):
        if leader(a) == leader(b):
            raise AutoreducedViolation("首项变元重复", (a, b))
    for a in ordered:
        for b in ordered:
            if a is not b and not is_reduced(a, b):
                raise AutoreducedViolation("元素对另一元素不是约化的", (a, b))
    return AutoreducedSet(tuple(ordered), ambient)


def compare_autoreduced_sets(a: AutoreducedSet, b: AutoreducedSet) -> Ordering:
    if a.ambient != b.ambient:
        raise AmbientMismatchError(a.ambient, b.ambient)
    for ra, rb in zip(a.ranks, b.ranks):
        if ra != rb:
            return Ordering.LESS if ra < rb else Ordering.GREATER
    # 前缀秩相同时, 更长的集合更小
    return Ordering.of(len(b), len(a))


def minimal_autoreduced_subset(polys: Sequence[DiffPoly]) -> AutoreducedSet:
    """贪心抽取: 取秩最小者, 只保留对它约化的元素, 重复"""
    pool = [f for f in polys if not f.is_constant]
    if not pool:
        raise AutoreducedViolation("输入全为常数")
    ambient = pool[0].ambient
    for f in pool:
        _check_same_ambient(f, ambient)

    chosen: list[DiffPoly] = []
    while pool:
        best = min(pool, key=rank)
        chosen.append(best)
        pool = [g for g in pool if g is not best and is_reduced(g, best)]
    return AutoreducedSet(tuple(chosen), ambient)


def _partial_target(
    g: DiffPoly, leaders: Sequence[Indeterminate]
) -> Optional[tuple[Indeterminate, int]]:
    """最高的 "首项变元的真导数", 以及它所来自的秩最高的元素"""
    offenders = [
        v for v in g.indeterminates() if any(v.is_proper_derivative_of(u) for u in leaders)
    ]
    if not offenders:
        return None
    v = max(offenders, key=lambda w: w.key)
    k = max(i for i, u in enumerate(leaders) if v.is_proper_derivative_of(u))
    return v, k


def _degree_target(
    g: DiffPoly, leaders: Sequence[Indeterminate], degrees: Sequence[int]
) -> Optional[int]:
    hits = [i for i, (u, d) in enumerate(zip(leaders, degrees)) if g.degree_in(u) >= d]
    return max(hits) if hits else None


def _pseudo_divide(
    g: DiffPoly, divisor: DiffPoly, v: Indeterminate, d: int, lc: DiffPoly
) -> tuple[int, DiffPoly, DiffPoly]:
    """
    关于 v 的伪除

    divisor 在 v 上的次数为 d, 首系数为 lc. 返回 (t, q, g'), 满足
    lc^t · g = q · divisor + g' 且 deg_v g' < d.
    """
    ambient = g.ambient
    q = ambient.zero()
    t = 0
    while (k := g.degree_in(v)) >= d:
        c = g.coefficient(v, k)
        shift = c * DiffPoly.from_indeterminate(ambient, v, k - d) if k > d else c
        g = lc * g - shift * divisor
        q = lc * q + shift
        t += 1
    return t, q, g


def diff_remainder(f: DiffPoly, basis: AutoreducedSet) -> ReductionCertificate:
    """
    f 对 Λ 的微分余式

    先消去首项变元的真导数 (乘分离元), 再降低首项变元的次数 (乘初式).
    每一步总是处理排序最高的违规变元, 且在它来自的元素中取秩最高者.
    """
    _check_same_ambient(f, basis.ambient)
    elements = basis.elements
    leaders = basis.leaders
    degrees = [r.degree for r in basis.ranks]
    p = len(elements)
    init_exps = [0] * p
    sep_exps = [0] * p
    cofactors: dict[tuple[DerivOp, int], DiffPoly] = {}
    zero_op = DerivOp.zero(basis.ambient.m)
    g = f
    steps = 0

    def absorb(lc: DiffPoly, t: int, q: DiffPoly, key: tuple[DerivOp, int]):
        if t and lc != 1:
            scale = lc**t
            for k in cofactors:
                cofactors[k] = cofactors[k] * scale
        cofactors[key] = cofactors.get(key, basis.ambient.zero()) + q

    while True:
        hit = _partial_target(g, leaders)
        if hit is not None:
            v, k = hit
            kappa = v.op - leaders[k].op
            derived = elements[k].derivative_by(kappa)
            lc = basis.separants[k]
            t, q, g = _pseudo_divide(g, derived, v, 1, lc)
            absorb(lc, t, q, (kappa, k))
            if lc != 1:
                sep_exps[k] += t
            steps += 1
            logger.debug("约化步骤 %d: 用 δ^%s Λ[%d] 消去导数, 乘分离元 %d 次", steps, kappa.exponents, k, t)
            continue
        k = _degree_target(g, leaders, degrees)
        if k is not None:
            lc = basis.initials[k]
            t, q, g = _pseudo_divide(g, elements[k], leaders[k], degrees[k], lc)
            absorb(lc, t, q, (zero_op, k))
            if lc != 1:
                init_exps[k] += t
            steps += 1
            logger.debug("约化步骤 %d: 用 Λ[%d] 降次, 乘初式 %d 次", steps, k, t)
            continue
        break

    ordered = sorted(cofactors.items(), key=lambda item: (item[0][1], item[0][0].exponents))
    return ReductionCertificate(
        f=f,
        basis=basis,
        remainder=g,
        cofactors=tuple(Cofactor(c, op, idx) for (op, idx), c in ordered if c),
        initial_exponents=tuple(init_exps),
        separant_exponents=tuple(sep_exps),
        steps=steps,
    )


def membership_by_remainder(f: DiffPoly, basis: AutoreducedSet) -> bool:
    """Λ 是素微分理想的特征集时, f ∈ P 当且仅当余式为 0"""
    return diff_remainder(f, basis).remainder.is_zero
