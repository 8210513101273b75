"""
理想引擎 - 有限个变元的多项式理想计算

微分问题最终落在有限个代数变元上判定: 截断 Truncation 固定这些变元及单项式序,
TruncatedIdeal 在其上缓存约化 Gröbner 基. 多项式运算借助 sympy 的稀疏多项式环,
Buchberger 算法本身在这里实现, 以便记录每个基元素关于原生成元的系数.
"""

from __future__ import annotations

import functools
import itertools
import logging
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.orderings import ProductOrder, grevlex, grlex, lex
from sympy.polys.rings import PolyElement, PolyRing

from .diffpoly import Ambient, DiffPoly, Indeterminate, Monomial
from .errors import TruncationError, ZeroSaturatorError

logger = logging.getLogger(__name__)

MONOMIAL_ORDERS = {"grevlex": grevlex, "grlex": grlex, "lex": lex}


class Truncation:
    """
    有限变元截断

    变元按排序从高到低排列, 作为多项式环的生成元顺序; 默认单项式序为
    由该顺序诱导的分次反字典序.
    """

    def __init__(
        self,
        ambient: Ambient,
        variables: Iterable[Indeterminate],
        order: str = "grevlex",
    ):
        if order not in MONOMIAL_ORDERS:
            raise ValueError(f"未知单项式序: {order}")
        unique = {v for v in variables}
        for v in unique:
            if not ambient.admits(v):
                raise TruncationError([v])
        self.ambient = ambient
        self.variables: tuple[Indeterminate, ...] = tuple(
            sorted(unique, key=lambda v: v.key, reverse=True)
        )
        self.order = order
        self._index = {v: i for i, v in enumerate(self.variables)}

    @classmethod
    def spanning(
        cls, polys: Iterable[DiffPoly], ambient: Optional[Ambient] = None, order: str = "grevlex"
    ) -> "Truncation":
        polys = list(polys)
        if ambient is None:
            if not polys:
                raise TruncationError([], "没有多项式也没有给出环境, 无法确定截断")
            ambient = polys[0].ambient
        variables = set()
        for f in polys:
            variables |= f.indeterminates()
        return cls(ambient, variables, order)

    @functools.cached_property
    def ring(self) -> PolyRing:
        # 至少保留一个生成元, 零变元截断也能表示常数
        symbols = [f"v{i}" for i in range(max(1, len(self.variables)))]
        return PolyRing(symbols, QQ, MONOMIAL_ORDERS[self.order])

    def __len__(self) -> int:
        return len(self.variables)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Truncation):
            return NotImplemented
        return (self.ambient, self.variables, self.order) == (
            other.ambient,
            other.variables,
            other.order,
        )

    def __hash__(self) -> int:
        return hash((self.ambient, self.variables, self.order))

    def __contains__(self, v: Indeterminate) -> bool:
        return v in self._index

    def join(self, *others: "Truncation") -> "Truncation":
        variables = set(self.variables)
        for other in others:
            variables |= set(other.variables)
        return Truncation(self.ambient, variables, self.order)

    def names(self) -> list[str]:
        return [self.ambient.indet_name(v) for v in self.variables]

    def check(self, f: DiffPoly):
        if f.ambient != self.ambient:
            raise TruncationError([str(f.ambient)])
        foreign = [v for v in f.indeterminates() if v not in self._index]
        if foreign:
            raise TruncationError(sorted(self.ambient.indet_name(v) for v in foreign))

    def to_ring(self, f: DiffPoly) -> PolyElement:
        self.check(f)
        size = len(self.ring.gens)
        terms = {}
        for mono, c in f.terms:
            exps = [0] * size
            for v, e in mono.factors:
                exps[self._index[v]] = e
            terms[tuple(exps)] = QQ(c.numerator, c.denominator)
        return self.ring.from_dict(terms)

    def from_ring(self, p: PolyElement) -> DiffPoly:
        terms = {}
        for exps, c in p.items():
            mono = Monomial.of({self.variables[i]: e for i, e in enumerate(exps) if e})
            terms[mono] = Fraction(int(c.numerator), int(c.denominator))
        return DiffPoly(self.ambient, terms)

    def __repr__(self) -> str:
        return f"Truncation([{', '.join(self.names())}], order={self.order})"


# ---- Buchberger ----


@dataclass(frozen=True)
class _Tracked:
    """多项式及其关于原生成元的系数向量"""

    poly: PolyElement
    cofactors: tuple[PolyElement, ...]

    def monic(self) -> "_Tracked":
        lc = self.poly.LC
        if lc == self.poly.ring.domain.one:
            return self
        return _Tracked(self.poly.quo_ground(lc), tuple(c.quo_ground(lc) for c in self.cofactors))


def _reduce(item: _Tracked, divisors: Sequence[_Tracked]) -> _Tracked:
    """完全约化, 同时更新系数向量"""
    if not item.poly or not divisors:
        return item
    quotients, remainder = item.poly.div([d.poly for d in divisors])
    cofactors = list(item.cofactors)
    for q, d in zip(quotients, divisors):
        if q:
            for i, c in enumerate(d.cofactors):
                if c:
                    cofactors[i] = cofactors[i] - q * c
    return _Tracked(remainder, tuple(cofactors))


def _s_polynomial(a: _Tracked, b: _Tracked) -> _Tracked:
    ring = a.poly.ring
    lcm = ring.monomial_lcm(a.poly.LM, b.poly.LM)
    ma = ring.monomial_div(lcm, a.poly.LM)
    mb = ring.monomial_div(lcm, b.poly.LM)
    poly = a.poly.mul_monom(ma) - b.poly.mul_monom(mb)
    cofactors = tuple(x.mul_monom(ma) - y.mul_monom(mb) for x, y in zip(a.cofactors, b.cofactors))
    return _Tracked(poly, cofactors)


def s_polynomial(f: PolyElement, g: PolyElement) -> PolyElement:
    ring = f.ring
    lcm = ring.monomial_lcm(f.LM, g.LM)
    return f.mul_term((ring.monomial_div(lcm, f.LM), g.LC)) - g.mul_term(
        (ring.monomial_div(lcm, g.LM), f.LC)
    )


def buchberger(
    generators: Sequence[PolyElement], ring: PolyRing
) -> tuple[tuple[PolyElement, ...], tuple[tuple[PolyElement, ...], ...]]:
    """
    约化 Gröbner 基及其系数矩阵

    返回 (basis, cofactors), 其中 basis[k] = Σ_i cofactors[k][i] · generators[i].
    基元素首一, 按首单项式从大到小排序. S 对用乘积判据与链判据剪枝
    (Gebauer–Möller 更新), 按正规策略选取.
    """
    order = ring.order
    lcm = ring.monomial_lcm
    mul = ring.monomial_mul
    div = ring.monomial_div
    k = len(generators)

    def unit(i: int) -> tuple[PolyElement, ...]:
        return tuple(ring.one if j == i else ring.zero for j in range(k))

    # 初始集合先互相约化
    work = [_Tracked(g, unit(i)).monic() for i, g in enumerate(generators) if g]
    while True:
        reduced = []
        for i, item in enumerate(work):
            r = _reduce(item, work[:i])
            if r.poly:
                reduced.append(r.monic())
        if [r.poly for r in reduced] == [w.poly for w in work]:
            break
        work = reduced

    store: list[_Tracked] = []

    def update(G: set[int], pairs: set[tuple[int, int]], ih: int):
        mh = store[ih].poly.LM

        candidates = set(G)
        kept = set()
        while candidates:
            ig = candidates.pop()
            mg = store[ig].poly.LM
            lcm_hg = lcm(mh, mg)

            def divides(ip: int) -> bool:
                return div(lcm_hg, lcm(mh, store[ip].poly.LM)) is not None

            if mul(mh, mg) == lcm_hg or (
                not any(divides(ip) for ip in candidates)
                and not any(divides(pair[1]) for pair in kept)
            ):
                kept.add((ih, ig))

        # 乘积判据: 首单项式互素的对不必处理
        fresh = {
            (ih, ig) for ih, ig in kept if mul(mh, store[ig].poly.LM) != lcm(mh, store[ig].poly.LM)
        }

        # 链判据: 剔除旧对
        survivors = set()
        for ig1, ig2 in pairs:
            m1, m2 = store[ig1].poly.LM, store[ig2].poly.LM
            lcm12 = lcm(m1, m2)
            if div(lcm12, mh) is None or lcm(m1, mh) == lcm12 or lcm(m2, mh) == lcm12:
                survivors.add((ig1, ig2))
        survivors |= fresh

        basis = {ig for ig in G if div(store[ig].poly.LM, mh) is None}
        basis.add(ih)
        return basis, survivors

    G: set[int] = set()
    pairs: set[tuple[int, int]] = set()
    for item in work:
        store.append(item)
        G, pairs = update(G, pairs, len(store) - 1)

    processed = 0
    while pairs:
        pair = min(
            sorted(pairs),
            key=lambda p: order(lcm(store[p[0]].poly.LM, store[p[1]].poly.LM)),
        )
        pairs.remove(pair)
        processed += 1
        h = _reduce(_s_polynomial(store[pair[0]], store[pair[1]]), [store[i] for i in sorted(G)])
        if h.poly:
            store.append(h.monic())
            G, pairs = update(G, pairs, len(store) - 1)

    members = sorted(G)
    final = []
    for ig in members:
        others = [store[j] for j in members if j != ig]
        final.append(_reduce(store[ig], others).monic())
    final.sort(key=lambda t: order(t.poly.LM), reverse=True)
    logger.debug("Buchberger: %d 个生成元, 处理 %d 个 S 对, 基大小 %d", k, processed, len(final))
    return tuple(t.poly for t in final), tuple(t.cofactors for t in final)


# ---- 理想与证书 ----


@dataclass(frozen=True)
class MembershipCertificate:
    """
    成员证书: saturator^exponent · target = Σ cofactors[i] · generators[i]

    普通成员关系时 exponent = 0, saturator 为空.
    """

    target: DiffPoly
    generators: tuple[DiffPoly, ...]
    cofactors: tuple[DiffPoly, ...]
    exponent: int = 0
    saturator: Optional[DiffPoly] = None

    def verify(self) -> bool:
        lhs = self.target
        if self.saturator is not None and self.exponent:
            lhs = self.saturator**self.exponent * lhs
        rhs = self.target.ambient.zero()
        for c, g in zip(self.cofactors, self.generators):
            rhs = rhs + c * g
        return lhs == rhs


@dataclass(frozen=True)
class Membership:
    """成员判定结果, 真值即是否为成员"""

    member: bool
    certificate: Optional[MembershipCertificate] = None

    def __bool__(self) -> bool:
        return self.member

    @property
    def exponent(self) -> Optional[int]:
        return self.certificate.exponent if self.certificate else None


class TruncatedIdeal:
    """截断中由生成元给出的理想, 约化 Gröbner 基在首次使用时计算并缓存"""

    def __init__(self, truncation: Truncation, generators: Iterable[DiffPoly]):
        self.truncation = truncation
        self.generators: tuple[DiffPoly, ...] = tuple(generators)
        self._ring_generators = tuple(truncation.to_ring(g) for g in self.generators)
        self._lock = threading.Lock()
        self._basis: Optional[tuple[PolyElement, ...]] = None
        self._cofactors: Optional[tuple[tuple[PolyElement, ...], ...]] = None

    @classmethod
    def spanning(cls, generators: Sequence[DiffPoly], *extra: DiffPoly) -> "TruncatedIdeal":
        """在生成元 (及 extra) 张成的最小截断中构造"""
        polys = [*generators, *extra]
        return cls(Truncation.spanning(polys), generators)

    def _ensure(self):
        if self._basis is None:
            with self._lock:
                if self._basis is None:
                    basis, cofactors = buchberger(self._ring_generators, self.truncation.ring)
                    self._cofactors = cofactors
                    self._basis = basis

    @property
    def ring_basis(self) -> tuple[PolyElement, ...]:
        self._ensure()
        return self._basis

    @property
    def groebner(self) -> tuple[DiffPoly, ...]:
        return tuple(self.truncation.from_ring(b) for b in self.ring_basis)

    @property
    def is_unit(self) -> bool:
        basis = self.ring_basis
        return len(basis) == 1 and basis[0] == self.truncation.ring.one

    @property
    def is_zero(self) -> bool:
        return not self.ring_basis

    def _normal_form(self, p: PolyElement) -> PolyElement:
        basis = self.ring_basis
        if not p or not basis:
            return p
        return p.rem(list(basis))

    def normal_form(self, f: DiffPoly) -> DiffPoly:
        return self.truncation.from_ring(self._normal_form(self.truncation.to_ring(f)))

    def contains(self, f: DiffPoly) -> bool:
        return not self._normal_form(self.truncation.to_ring(f))

    def member(self, f: DiffPoly) -> Membership:
        p = self.truncation.to_ring(f)
        basis = self.ring_basis
        ring = self.truncation.ring
        if not p:
            cofactors = tuple(self.truncation.ambient.zero() for _ in self.generators)
            return Membership(True, MembershipCertificate(f, self.generators, cofactors))
        if not basis:
            return Membership(False)
        quotients, remainder = p.div(list(basis))
        if remainder:
            return Membership(False)
        combined = [ring.zero for _ in self.generators]
        for q, row in zip(quotients, self._cofactors):
            if q:
                for i, c in enumerate(row):
                    if c:
                        combined[i] = combined[i] + q * c
        cofactors = tuple(self.truncation.from_ring(c) for c in combined)
        return Membership(True, MembershipCertificate(f, self.generators, cofactors))

    def widen(self, truncation: Truncation) -> "TruncatedIdeal":
        """同一组生成元放到更大的截断中"""
        return TruncatedIdeal(truncation, self.generators)

    def __repr__(self) -> str:
        return f"TruncatedIdeal({len(self.generators)} 个生成元, {self.truncation!r})"


class SaturatedIdeal(TruncatedIdeal):
    """I : h^∞, 每个生成元附带指数证书 h^r · z ∈ I"""

    def __init__(
        self,
        base: TruncatedIdeal,
        saturator: DiffPoly,
        generators: Iterable[DiffPoly],
        certificates: Iterable[MembershipCertificate] = (),
    ):
        super().__init__(base.truncation, generators)
        self.base = base
        self.saturator = saturator
        self.certificates: tuple[MembershipCertificate, ...] = tuple(certificates)

    @property
    def exponent_bound(self) -> int:
        return max((c.exponent for c in self.certificates), default=0)

    def member_with_exponent(self, f: DiffPoly) -> Membership:
        """成员时给出最小的 r 使 h^r · f ∈ I"""
        if not self.contains(f):
            return Membership(False)
        power = f
        for r in range(self.exponent_bound + 1):
            found = self.base.member(power)
            if found:
                cert = found.certificate
                return Membership(
                    True,
                    MembershipCertificate(
                        f, cert.generators, cert.cofactors, exponent=r, saturator=self.saturator
                    ),
                )
            power = self.saturator * power
        raise AssertionError(f"饱和成员 {f} 在指数上界 {self.exponent_bound} 内没有证书")


def groebner_basis(generators: Sequence[DiffPoly], truncation: Truncation) -> tuple[DiffPoly, ...]:
    return TruncatedIdeal(truncation, generators).groebner


def ideal_member(f: DiffPoly, ideal: TruncatedIdeal) -> Membership:
    return ideal.member(f)


def saturate(ideal: TruncatedIdeal, h: DiffPoly) -> SaturatedIdeal:
    """
    I : h^∞, 引入新变元 t, 加入 1 − t·h, 在以 t 为首块的消元序下消去 t

    t 的次数界给出每个生成元的指数上界, 再逐个检验 h^r · z ∈ I 取最小 r.
    """
    if h.is_zero:
        raise ZeroSaturatorError()
    truncation = ideal.truncation
    truncation.check(h)
    base_ring = truncation.ring
    size = len(base_ring.gens)
    ext_ring = PolyRing(
        ["t", *[str(s) for s in base_ring.symbols]],
        QQ,
        ProductOrder((lex, lambda m: m[:1]), (base_ring.order, lambda m: m[1:])),
    )

    def embed(p: PolyElement) -> PolyElement:
        return ext_ring.from_dict({(0, *m): c for m, c in p.items()})

    h_ext = embed(truncation.to_ring(h))
    t_monom = (1,) + (0,) * size
    generators = [embed(g) for g in ideal._ring_generators]
    generators.append(ext_ring.one - h_ext.mul_monom(t_monom))
    basis, cofactors = buchberger(generators, ext_ring)

    saturated = []
    certificates = []
    for b, row in zip(basis, cofactors):
        if b.LM[0]:
            continue
        z = truncation.from_ring(base_ring.from_dict({m[1:]: c for m, c in b.items()}))
        bound = max((c.degree(0) for c in row[:-1] if c), default=0)
        power = z
        for r in range(bound + 1):
            found = ideal.member(power)
            if found:
                cert = found.certificate
                certificates.append(
                    MembershipCertificate(
                        z, cert.generators, cert.cofactors, exponent=r, saturator=h
                    )
                )
                break
            power = h * power
        else:
            raise AssertionError(f"饱和生成元 {z} 在 t 次数界 {bound} 内没有证书")
        saturated.append(z)
    logger.debug(
        "饱和: %d 个生成元 -> %d 个, 指数 %s",
        len(ideal.generators),
        len(saturated),
        [c.exponent for c in certificates],
    )
    return SaturatedIdeal(ideal, h, saturated, certificates)


def ideal_equal_trunc(a: TruncatedIdeal, b: TruncatedIdeal) -> bool:
    if a.truncation != b.truncation:
        left, right = set(a.truncation.variables), set(b.truncation.variables)
        names = sorted(a.truncation.ambient.indet_name(v) for v in left ^ right)
        raise TruncationError(names or [f"order {a.truncation.order} != {b.truncation.order}"])
    return a.ring_basis == b.ring_basis


# ---- 有界素性探测 ----


PAIR_LIMIT = 32


class PrimeVerdict(str, Enum):
    NOT_PRIME = "not_prime"
    NO_VIOLATION = "no_violation_up_to"


@dataclass(frozen=True)
class PrimeProbe:
    """有界素性探测结果; NO_VIOLATION 不是素性证明"""

    verdict: PrimeVerdict
    degree_cap: int
    witness: Optional[tuple[DiffPoly, DiffPoly]] = None
    unit: bool = False

    @property
    def refuted(self) -> bool:
        return self.verdict == PrimeVerdict.NOT_PRIME

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "degree_cap": self.degree_cap,
            "unit": self.unit,
            "witness": [str(w) for w in self.witness] if self.witness else None,
        }


def monomials_up_to(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """次数 ≤ degree 的全部指数向量, 按 (次数, 指数) 升序"""
    out = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            exps = [0] * nvars
            for i in combo:
                exps[i] += 1
            out.append(tuple(exps))
    return sorted(set(out), key=lambda e: (sum(e), e))


def kernel_combinations(
    images: Sequence[PolyElement], columns: Sequence[PolyElement]
) -> list[PolyElement]:
    """
    images[k] 是 columns[k] 在某个线性映射下的像. 返回核的一组基,
    每个基向量写成组合 Σ a_k · columns[k].
    """
    rows: dict[tuple[int, ...], int] = {}
    for img in images:
        for m in img.itermonoms():
            rows.setdefault(m, len(rows))
    if not rows:
        size = len(columns)
        vectors = [[QQ.one if i == k else QQ.zero for i in range(size)] for k in range(size)]
    else:
        matrix = [[(0, 1)] * len(columns) for _ in rows]
        for k, img in enumerate(images):
            for m, c in img.items():
                matrix[rows[m]][k] = (int(c.numerator), int(c.denominator))
        vectors = DomainMatrix.from_list(matrix, QQ).nullspace().to_list()
    out = []
    for vec in vectors:
        g = columns[0].ring.zero
        for a, col in zip(vec, columns):
            if a:
                g = g + col.mul_ground(a)
        out.append(g)
    return out


def kernel_witness(
    images: Sequence[PolyElement], columns: Sequence[PolyElement], ideal: TruncatedIdeal
) -> Optional[PolyElement]:
    """核中第一个不属于理想的组合"""
    for g in kernel_combinations(images, columns):
        if ideal._normal_form(g):
            return g
    return None


def ring_monomials(ring: PolyRing, nvars: int, degree: int) -> list[PolyElement]:
    if not nvars:
        return [ring.one]
    return [ring.from_dict({e: QQ.one}) for e in monomials_up_to(nvars, degree)]


def span_elements(ideal: TruncatedIdeal, degree: int) -> list[PolyElement]:
    """I ∩ span(次数 ≤ degree 的单项式) 的一组基, 即单项式上 NF 映射的核"""
    ring = ideal.truncation.ring
    columns = ring_monomials(ring, len(ideal.truncation.variables), degree)
    images = [ideal._normal_form(m) for m in columns]
    return [v for v in kernel_combinations(images, columns) if v]


def _total_degree(p: PolyElement) -> int:
    return max(sum(m) for m in p.itermonoms())


def product_candidates(ideal: TruncatedIdeal, degree_cap: int) -> list[PolyElement]:
    """
    候选因子 f: I 中次数 ≤ 2D 的元素 (核基向量, 以及前 PAIR_LIMIT 个
    低次基向量两两的和与差) 的首一不可约因子, 再加次数 1..D 的单项式
    """
    ring = ideal.truncation.ring
    elements = list(ideal.ring_basis)
    spanned = sorted(span_elements(ideal, 2 * degree_cap), key=_total_degree)
    elements.extend(spanned)
    low = [v.monic() for v in spanned[:PAIR_LIMIT]]
    if len(spanned) > PAIR_LIMIT:
        logger.debug("素性探测: 核维数 %d, 两两组合只取前 %d 个", len(spanned), PAIR_LIMIT)
    for a, b in itertools.combinations(low, 2):
        elements.extend(p for p in (a - b, a + b) if p)

    candidates: list[PolyElement] = []
    seen = set()
    for p in elements:
        _, factors = p.factor_list()
        for factor, _ in factors:
            factor = factor.monic()
            if factor.LM != ring.zero_monom and _total_degree(factor) <= degree_cap:
                if factor not in seen:
                    seen.add(factor)
                    candidates.append(factor)
    for m in ring_monomials(ring, len(ideal.truncation.variables), degree_cap):
        if m != ring.one and m not in seen:
            seen.add(m)
            candidates.append(m)
    return candidates


def bounded_prime_probe(ideal: TruncatedIdeal, degree_cap: int) -> PrimeProbe:
    """
    在次数 ≤ D 内寻找 f·g ∈ I 而 f, g ∉ I

    候选 f 见 product_candidates; 对每个 f 求 g ↦ NF(f·g) 在次数 ≤ D
    单项式空间上的核, 核中不在 I 内的 g 即为反例.
    """
    if degree_cap < 1:
        raise ValueError(f"次数上界至少为 1: {degree_cap}")
    truncation = ideal.truncation
    ring = truncation.ring
    if ideal.is_unit:
        return PrimeProbe(PrimeVerdict.NOT_PRIME, degree_cap, unit=True)

    basis_monomials = ring_monomials(ring, len(truncation.variables), degree_cap)
    candidates = product_candidates(ideal, degree_cap)

    for f in candidates:
        if not ideal._normal_form(f):
            continue
        images = [ideal._normal_form(f * g) for g in basis_monomials]
        g = kernel_witness(images, basis_monomials, ideal)
        if g is not None:
            witness = (truncation.from_ring(f), truncation.from_ring(g))
            logger.debug("素性探测找到反例: (%s) · (%s)", *witness)
            return PrimeProbe(PrimeVerdict.NOT_PRIME, degree_cap, witness=witness)
    return PrimeProbe(PrimeVerdict.NO_VIOLATION, degree_cap)
