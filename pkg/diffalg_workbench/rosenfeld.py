"""
Rosenfeld 模块 - 相容性检查, 特征集判据报告, 以及由特征集给出的素微分理想的相等判定

所有微分问题都在有限截断中用代数饱和理想回答: 对相容的自约化集,
部分约化的多项式属于 [Λ]:H_Λ^∞ 当且仅当它属于 (Λ):H_Λ^∞.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, TypeVar, Union

from .diffpoly import DerivOp, DiffPoly, Indeterminate
from .errors import AmbientMismatchError, AutoreducedViolation
from .ideals import (
    PrimeProbe,
    SaturatedIdeal,
    Truncation,
    TruncatedIdeal,
    bounded_prime_probe,
    kernel_combinations,
    monomials_up_to,
    saturate,
)
from .reduction import AutoreducedSet, Cofactor, validate_autoreduced

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """按输入顺序返回结果; workers > 1 时用线程池"""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def ops_up_to(m: int, order: int) -> list[DerivOp]:
    """阶数 ≤ order 的全部微分算子, 按 (阶, 指数) 升序"""
    if order < 0:
        return []
    return [DerivOp(e) for e in monomials_up_to(m, order)]


@dataclass(frozen=True)
class DeltaPair:
    """首项变元落在同一个 (块, 变量) 上的一对元素, u 为最小公共导数"""

    i: int
    j: int
    xi: DerivOp
    eta: DerivOp
    u: Indeterminate

    def to_dict(self, basis: AutoreducedSet) -> dict:
        return {
            "i": self.i,
            "j": self.j,
            "xi": list(self.xi.exponents),
            "eta": list(self.eta.exponents),
            "u": basis.ambient.indet_name(self.u),
        }


def delta_pairs(basis: AutoreducedSet) -> list[DeltaPair]:
    """每个无序对 (i > j) 给出一个 Δ 对, 首项变元在不同变量上的跳过"""
    pairs = []
    leaders = basis.leaders
    for i in range(len(basis)):
        for j in range(i):
            ui, uj = leaders[i], leaders[j]
            if ui.base != uj.base:
                continue
            op = ui.op.lcm(uj.op)
            u = Indeterminate(ui.block, ui.index, op)
            pairs.append(DeltaPair(i, j, op - ui.op, op - uj.op, u))
    return pairs


def delta_polynomial(basis: AutoreducedSet, pair: DeltaPair) -> DiffPoly:
    """s_{f_j} · δ^ξ f_i − s_{f_i} · δ^η f_j"""
    fi, fj = basis[pair.i], basis[pair.j]
    si, sj = basis.separants[pair.i], basis.separants[pair.j]
    return sj * fi.derivative_by(pair.xi) - si * fj.derivative_by(pair.eta)


@dataclass(frozen=True)
class ProlongedElement:
    """δ^op(Λ[index])"""

    poly: DiffPoly
    op: DerivOp
    index: int


def prolong(elements: Iterable[DiffPoly], order: int) -> list[ProlongedElement]:
    """Λ 中元素的全部导数, 只保留首项变元阶数 ≤ order 的"""
    out = []
    for idx, f in enumerate(elements):
        base = f.max_order
        for op in ops_up_to(f.ambient.m, order - base):
            out.append(ProlongedElement(f.derivative_by(op), op, idx))
    return out


def _derivatives_below(basis: AutoreducedSet, u: Indeterminate) -> list[ProlongedElement]:
    out = []
    for idx, (f, ul) in enumerate(zip(basis, basis.leaders)):
        for op in ops_up_to(basis.ambient.m, u.order - ul.order):
            if ul.derive_by(op).key < u.key:
                out.append(ProlongedElement(f.derivative_by(op), op, idx))
    return out


def lower_ideal(basis: AutoreducedSet, u: Indeterminate) -> TruncatedIdeal:
    """(Λ)_u: Λ 中元素及其导数里首项变元严格低于 u 的那些生成的理想"""
    gens = [item.poly for item in _derivatives_below(basis, u)]
    return TruncatedIdeal(Truncation.spanning(gens, basis.ambient), gens)


@dataclass(frozen=True)
class PairCheck:
    """一个 Δ 对的检查结果"""

    pair: DeltaPair
    delta: DiffPoly
    member: bool
    exponent: Optional[int]
    truncation: Truncation

    def to_dict(self, basis: AutoreducedSet) -> dict:
        return {
            **self.pair.to_dict(basis),
            "delta": str(self.delta),
            "member": self.member,
            "exponent": self.exponent,
            "truncation": self.truncation.names(),
        }


@dataclass(frozen=True)
class CoherenceResult:
    coherent: bool
    checks: tuple[PairCheck, ...] = ()

    def __bool__(self) -> bool:
        return self.coherent

    @property
    def witness(self) -> Optional[PairCheck]:
        return next((c for c in self.checks if not c.member), None)


def lower_saturation(basis: AutoreducedSet, pair: DeltaPair, delta: DiffPoly) -> SaturatedIdeal:
    """(Λ)_u : H_Λ^∞, 截断取 Δ 多项式, 下理想生成元与 H_Λ 中出现的变元"""
    lower = lower_ideal(basis, pair.u)
    h = basis.h_product
    truncation = Truncation.spanning([delta, h, *lower.generators], basis.ambient)
    return saturate(lower.widen(truncation), h)


def _check_pair(basis: AutoreducedSet, pair: DeltaPair) -> PairCheck:
    delta = delta_polynomial(basis, pair)
    sat = lower_saturation(basis, pair, delta)
    found = sat.member_with_exponent(delta)
    logger.info(
        "Δ 对 (%d, %d) 于 %s: %s",
        pair.i,
        pair.j,
        basis.ambient.indet_name(pair.u),
        "属于饱和下理想" if found else "不属于",
    )
    return PairCheck(pair, delta, found.member, found.exponent, sat.truncation)


def is_coherent(basis: AutoreducedSet, workers: int = 1) -> CoherenceResult:
    pairs = delta_pairs(basis)
    checks = parallel_map(lambda p: _check_pair(basis, p), pairs, workers)
    return CoherenceResult(all(c.member for c in checks), tuple(checks))


def algebraic_saturation(basis: AutoreducedSet, *extra: DiffPoly) -> SaturatedIdeal:
    """(Λ):H_Λ^∞, 截断取 Λ, H_Λ 以及 extra 中出现的变元"""
    h = basis.h_product
    gens = list(basis)
    truncation = Truncation.spanning([*gens, h, *extra], basis.ambient)
    return saturate(TruncatedIdeal(truncation, gens), h)


@dataclass(frozen=True)
class ReducedElementProbe:
    """在次数与阶数上界内寻找 (Λ):H_Λ^∞ 中非零的约化元素"""

    found: bool
    degree_cap: int
    order_cap: int
    monomials_checked: int
    witness: Optional[DiffPoly] = None

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "degree_cap": self.degree_cap,
            "order_cap": self.order_cap,
            "monomials_checked": self.monomials_checked,
            "witness": str(self.witness) if self.witness is not None else None,
        }


def reduced_element_probe(
    basis: AutoreducedSet, sat: SaturatedIdeal, degree_cap: int, order_cap: int
) -> ReducedElementProbe:
    truncation = sat.truncation
    leaders = basis.leaders
    bounds = {u: r.degree for u, r in zip(leaders, basis.ranks)}
    free = [
        v
        for v in truncation.variables
        if v.order <= order_cap and not any(v.is_proper_derivative_of(u) for u in leaders)
    ]
    columns = []
    for exps in monomials_up_to(len(free), degree_cap):
        if any(e >= bounds[v] for v, e in zip(free, exps) if v in bounds):
            continue
        powers = {v: e for v, e in zip(free, exps) if e}
        columns.append(truncation.to_ring(_monomial_poly(basis, powers)))
    images = [sat._normal_form(c) for c in columns]
    kernel = kernel_combinations(images, columns)
    witness = truncation.from_ring(kernel[0]) if kernel else None
    return ReducedElementProbe(witness is not None, degree_cap, order_cap, len(columns), witness)


def _monomial_poly(basis: AutoreducedSet, powers: dict[Indeterminate, int]) -> DiffPoly:
    result = basis.ambient.one()
    for v, e in powers.items():
        result = result * DiffPoly.from_indeterminate(basis.ambient, v, e)
    return result


@dataclass
class CharSetReport:
    """
    特征集判据报告

    只给出 "在上界内未发现违例", 从不断言集合就是特征集.
    """

    elements: tuple[DiffPoly, ...]
    degree_cap: int
    order_cap: int
    autoreduced: bool = False
    basis: Optional[AutoreducedSet] = None
    coherence: Optional[CoherenceResult] = None
    reduced_element: Optional[ReducedElementProbe] = None
    prime_probe: Optional[PrimeProbe] = None
    truncation_used: Optional[Truncation] = None
    errors: list[str] = field(default_factory=list)

    @property
    def coherent(self) -> Optional[bool]:
        return None if self.coherence is None else self.coherence.coherent

    @property
    def refuted(self) -> bool:
        return bool(
            not self.autoreduced
            or (self.coherence is not None and not self.coherence.coherent)
            or (self.reduced_element is not None and self.reduced_element.found)
            or (self.prime_probe is not None and self.prime_probe.refuted)
        )

    @property
    def passed(self) -> bool:
        """上界内未发现违例 (不是证明)"""
        return not self.refuted

    def to_dict(self) -> dict:
        data = {
            "elements": [str(f) for f in self.elements],
            "caps": {"degree": self.degree_cap, "order": self.order_cap},
            "autoreduced": self.autoreduced,
            "coherent": self.coherent,
            "reduced_element_probe": (
                self.reduced_element.to_dict() if self.reduced_element else None
            ),
            "prime_probe": self.prime_probe.to_dict() if self.prime_probe else None,
            "truncation": self.truncation_used.names() if self.truncation_used else None,
            "errors": list(self.errors),
        }
        if self.coherence is not None and self.basis is not None:
            witness = self.coherence.witness
            data["coherence_witness"] = witness.to_dict(self.basis) if witness else None
        return data


def charset_report(
    candidate: Union[AutoreducedSet, Sequence[DiffPoly]],
    degree_cap: int = 3,
    order_cap: int = 3,
    workers: int = 1,
) -> CharSetReport:
    """依次检查自约化, 相容, 约化元素探测与素性探测; 自约化失败时其余检查跳过"""
    if degree_cap < 1 or order_cap < 0:
        raise ValueError(f"上界不合法: degree={degree_cap}, order={order_cap}")
    elements = tuple(candidate)
    report = CharSetReport(elements, degree_cap, order_cap)
    try:
        if isinstance(candidate, AutoreducedSet):
            basis = candidate
        else:
            basis = validate_autoreduced(elements)
    except AutoreducedViolation as e:
        report.errors.append(str(e))
        return report
    report.autoreduced = True
    report.basis = basis

    report.coherence = is_coherent(basis, workers)
    witness = report.coherence.witness
    if witness is not None:
        pair = witness.pair
        report.errors.append(f"不相容: Δ 对 ({pair.i}, {pair.j}) 的 Δ 多项式 {witness.delta}")

    sat = algebraic_saturation(basis)
    report.truncation_used = sat.truncation
    report.reduced_element = reduced_element_probe(basis, sat, degree_cap, order_cap)
    if report.reduced_element.found:
        report.errors.append(f"饱和理想含有约化元素 {report.reduced_element.witness}")
    report.prime_probe = bounded_prime_probe(sat, degree_cap)
    if report.prime_probe.refuted:
        if report.prime_probe.unit:
            report.errors.append("饱和理想是单位理想")
        else:
            f, g = report.prime_probe.witness
            report.errors.append(f"饱和理想不是素理想: ({f}) · ({g})")
    return report


# ---- 饱和成员关系与相等判定 ----


@dataclass(frozen=True)
class SaturationMembership:
    """
    H_Λ^exponent · f = Σ coefficient · δ^op(Λ[index]) 形式的微分证书
    """

    target: DiffPoly
    basis: AutoreducedSet
    member: bool
    truncation: Truncation
    exponent: Optional[int] = None
    cofactors: tuple[Cofactor, ...] = ()

    def __bool__(self) -> bool:
        return self.member

    def verify(self) -> bool:
        if not self.member:
            return False
        lhs = self.basis.h_product**self.exponent * self.target
        rhs = self.target.ambient.zero()
        for c in self.cofactors:
            rhs = rhs + c.coefficient * self.basis[c.index].derivative_by(c.op)
        return lhs == rhs


def membership_by_saturation(
    f: DiffPoly, basis: AutoreducedSet, order: Optional[int] = None
) -> SaturationMembership:
    """f ∈ (Λ 延拓到 f 的阶):H_Λ^∞, 在联合截断中判定"""
    if f.ambient != basis.ambient:
        raise AmbientMismatchError(f.ambient, basis.ambient)
    if order is None:
        order = max(f.max_order, basis.max_order)
    prolonged = prolong(basis, order)
    gens = [p.poly for p in prolonged]
    h = basis.h_product
    truncation = Truncation.spanning([f, h, *gens], basis.ambient)
    sat = saturate(TruncatedIdeal(truncation, gens), h)
    found = sat.member_with_exponent(f)
    if not found:
        return SaturationMembership(f, basis, False, truncation)
    cert = found.certificate
    cofactors = tuple(
        Cofactor(c, p.op, p.index) for c, p in zip(cert.cofactors, prolonged) if not c.is_zero
    )
    return SaturationMembership(f, basis, True, truncation, cert.exponent, cofactors)


@dataclass(frozen=True)
class EqualityReport:
    """P = Q 的四个条件"""

    gamma_sat_contains_lambda: bool
    gamma_sat_excludes_h_lambda: bool
    lambda_sat_contains_gamma: bool
    lambda_sat_excludes_h_gamma: bool
    truncation: Truncation

    @property
    def equal(self) -> bool:
        return (
            self.gamma_sat_contains_lambda
            and self.gamma_sat_excludes_h_lambda
            and self.lambda_sat_contains_gamma
            and self.lambda_sat_excludes_h_gamma
        )

    def to_dict(self) -> dict:
        return {
            "equal": self.equal,
            "gamma_sat_contains_lambda": self.gamma_sat_contains_lambda,
            "gamma_sat_excludes_h_lambda": self.gamma_sat_excludes_h_lambda,
            "lambda_sat_contains_gamma": self.lambda_sat_contains_gamma,
            "lambda_sat_excludes_h_gamma": self.lambda_sat_excludes_h_gamma,
            "truncation": self.truncation.names(),
        }


def compare_charsets(lam: AutoreducedSet, gamma: AutoreducedSet) -> EqualityReport:
    if lam.ambient != gamma.ambient:
        raise AmbientMismatchError(lam.ambient, gamma.ambient)
    h_lam, h_gamma = lam.h_product, gamma.h_product
    truncation = Truncation.spanning([*lam, *gamma, h_lam, h_gamma], lam.ambient)
    p = saturate(TruncatedIdeal(truncation, list(lam)), h_lam)
    q = saturate(TruncatedIdeal(truncation, list(gamma)), h_gamma)
    return EqualityReport(
        gamma_sat_contains_lambda=all(q.contains(f) for f in lam),
        gamma_sat_excludes_h_lambda=not q.contains(h_lam),
        lambda_sat_contains_gamma=all(p.contains(g) for g in gamma),
        lambda_sat_excludes_h_gamma=not p.contains(h_gamma),
        truncation=truncation,
    )


def ideal_equal_charsets(lam: AutoreducedSet, gamma: AutoreducedSet) -> bool:
    return compare_charsets(lam, gamma).equal
