"""
测试辅助: 环境构造与随机多项式
"""

import random
from fractions import Fraction
from typing import Optional

from hypothesis import strategies as st

from diffalg_workbench.diffpoly import DiffPoly, Indeterminate, Monomial
from diffalg_workbench.gaction import GroupSpec, trivial_group
from diffalg_workbench.parser import parse_poly
from diffalg_workbench.reduction import AutoreducedSet, validate_autoreduced
from diffalg_workbench.rosenfeld import ops_up_to


class Ring:
    """固定环境下用文本构造多项式"""

    def __init__(self, m: int, n: int, group: Optional[GroupSpec] = None):
        self.group = group or trivial_group()
        self.ambient = self.group.ambient(m, n)

    def __call__(self, text: str) -> DiffPoly:
        return parse_poly(text, self.ambient)

    def many(self, *texts: str) -> list[DiffPoly]:
        return [self(t) for t in texts]

    def basis(self, *texts: str) -> AutoreducedSet:
        return validate_autoreduced(self.many(*texts), self.ambient)

    def indet(self, index: int = 1, block: int = 0, exponents=None) -> Indeterminate:
        return self.ambient.indeterminate(index, block, exponents)


def indeterminates(ambient, max_order: int) -> list[Indeterminate]:
    """阶数 ≤ max_order 的全部变元"""
    return [
        Indeterminate(block, index, op)
        for block in range(ambient.ell)
        for index in range(1, ambient.n + 1)
        for op in ops_up_to(ambient.m, max_order)
    ]


def random_poly(
    rng: random.Random,
    ambient,
    max_terms: int = 3,
    max_order: int = 1,
    max_power: int = 2,
    max_factors: int = 2,
) -> DiffPoly:
    """至少含一个变元的随机多项式, 系数为小整数"""
    pool = indeterminates(ambient, max_order)
    terms = {}
    for k in range(rng.randint(1, max_terms)):
        count = rng.randint(1 if k == 0 else 0, max_factors)
        exps = {}
        for _ in range(count):
            v = rng.choice(pool)
            exps[v] = exps.get(v, 0) + rng.randint(1, max_power)
        mono = Monomial.of(exps)
        terms[mono] = terms.get(mono, 0) + rng.choice([-3, -2, -1, 1, 2, 3])
    f = DiffPoly(ambient, terms)
    if f.is_constant:
        return f + DiffPoly.from_indeterminate(ambient, rng.choice(pool))
    return f


def random_assignment(rng: random.Random, indets) -> dict:
    return {v: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for v in indets}


@st.composite
def diff_polys(draw, ambient, max_terms: int = 4, max_order: int = 2, max_power: int = 3):
    """hypothesis 策略: 有理系数的随机微分多项式 (可能为 0)"""
    pool = indeterminates(ambient, max_order)
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exps = {}
        for _ in range(draw(st.integers(0, 2))):
            v = draw(st.sampled_from(pool))
            exps[v] = exps.get(v, 0) + draw(st.integers(1, max_power))
        mono = Monomial.of(exps)
        c = draw(st.fractions(min_value=-5, max_value=5, max_denominator=4))
        terms[mono] = terms.get(mono, 0) + c
    return DiffPoly(ambient, terms)
