"""
Rosenfeld 判据测试: Δ 对, 相容性, 特征集报告, 饱和成员关系与相等判定
"""

import pytest

from diffalg_workbench.diffpoly import DerivOp
from diffalg_workbench.ideals import TruncatedIdeal, Truncation, ideal_equal_trunc, saturate
from diffalg_workbench.reduction import membership_by_remainder
from diffalg_workbench.rosenfeld import (
    charset_report,
    compare_charsets,
    delta_pairs,
    delta_polynomial,
    ideal_equal_charsets,
    is_coherent,
    lower_ideal,
    membership_by_saturation,
    ops_up_to,
    parallel_map,
    prolong,
)
from tests.helpers import Ring

ODE = Ring(1, 1)
ODE2 = Ring(1, 2)
PDE = Ring(2, 1)
PDE2 = Ring(2, 2)

COHERENT = [
    (PDE, ["d1 x[1] - x[1]", "d2 x[1]"]),
    (PDE, ["d1 x[1]", "d2 x[1]"]),
    (PDE, ["d1 x[1] - x[1]", "d2 x[1] - x[1]"]),
    (PDE, ["d1 x[1] - x[1]", "d2 x[1] - 2 * x[1]"]),
    (PDE2, ["d1 x[1] - x[2]", "d2 x[1]", "d2 x[2]"]),
    (PDE, ["d1 x[1] - x[1]^2", "d2 x[1]"]),
    (ODE, ["d1 x[1] - x[1]"]),
]

INCOHERENT = [
    (PDE, ["d1 x[1] - x[1]", "d2 x[1] - 1"]),
    (PDE2, ["d1 x[1] - x[2]", "d2 x[1]"]),
    (PDE2, ["d1 x[1] - x[1]", "d2 x[1] - x[2]"]),
    (PDE, ["d1 x[1] - x[1]", "d2 x[1] - x[1]^2"]),
    (PDE, ["d1 x[1] - 1", "d2 x[1] - x[1]"]),
    (PDE, ["d1 x[1] - 2 * x[1]", "d2 x[1] - x[1]^3"]),
]

# (环境, Λ, [(f, 是否属于 [Λ]:H_Λ^∞)])
BRIDGE = [
    (ODE, ["d1 x[1] - x[1]"], [
        ("d1^2 x[1] - x[1]", True),
        ("d1 x[1]", False),
        ("d1^3 x[1] - d1 x[1]", True),
        ("(d1 x[1])^2 - x[1]^2", True),
        ("x[1]", False),
        ("x[1] * d1 x[1] - x[1]^2", True),
        ("0", True),
    ]),
    (ODE, ["d1 x[1]"], [
        ("d1^2 x[1]", True),
        ("x[1]", False),
        ("x[1] * d1 x[1]", True),
        ("d1 x[1] + x[1]", False),
    ]),
    (ODE, ["x[1]"], [
        ("d1 x[1]", True),
        ("x[1]^2 + d1^2 x[1]", True),
        ("1", False),
    ]),
    (ODE2, ["d1 x[1] - x[2]", "d1 x[2] + x[1]"], [
        ("d1^2 x[1] + x[1]", True),
        ("d1 x[1]", False),
        ("x[1]^2 + x[2]^2", False),
        ("2 * x[1] * d1 x[1] + 2 * x[2] * d1 x[2]", True),
    ]),
    (ODE2, ["x[2] - x[1]^2"], [
        ("d1 x[2] - 2 * x[1] * d1 x[1]", True),
        ("x[2]", False),
        ("x[2]^2 - x[1]^4", True),
    ]),
    (ODE, ["(d1 x[1])^2 - 4 * x[1]"], [
        ("d1^2 x[1] - 2", True),
        ("d1 x[1]", False),
        ("(d1 x[1])^2 - 4 * x[1]", True),
    ]),
    (ODE2, ["x[1] * x[2] - 1"], [
        ("x[1] * d1 x[2] + x[2] * d1 x[1]", True),
        ("x[2]", False),
        ("x[1] * x[2]^2 - x[2]", True),
    ]),
    (ODE2, ["x[1] * d1 x[1] - x[2]"], [
        ("x[1] * d1 x[1] - x[2]", True),
        ("x[2]", False),
        ("(d1 x[1])^2 + x[1] * d1^2 x[1] - d1 x[2]", True),
    ]),
]

EQUALITY = [
    (ODE, ["d1 x[1] - x[1]"], ["2 * d1 x[1] - 2 * x[1]"], True),
    (ODE, ["d1 x[1] - x[1]"], ["d1 x[1]"], False),
    (ODE, ["d1 x[1] - x[1]"], ["d1 x[1] - x[1]"], True),
    (ODE, ["d1 x[1] - x[1]"], ["d1 x[1] + x[1]"], False),
    (ODE, ["x[1]"], ["3 * x[1]"], True),
    (ODE, ["x[1]"], ["x[1] - 1"], False),
    (ODE, ["x[1]^2 - 2"], ["-x[1]^2 + 2"], True),
    (ODE, ["(d1 x[1])^2 - 4 * x[1]"], ["(d1 x[1])^2 - 4 * x[1]"], True),
    (ODE, ["(d1 x[1])^2 - 4 * x[1]"], ["(d1 x[1])^2 - x[1]"], False),
    (ODE2, ["d1 x[1] - x[2]", "d1 x[2] + x[1]"], ["d1 x[2] + x[1]", "d1 x[1] - x[2]"], True),
    (ODE2, ["x[2] - x[1]^2"], ["2 * x[2] - 2 * x[1]^2"], True),
    (ODE2, ["x[2] - x[1]^2"], ["x[2] + x[1]^2"], False),
    (ODE2, ["x[1] * x[2] - 1"], ["x[1] * x[2] - 1"], True),
    (ODE2, ["x[1] * x[2] - 1"], ["x[1] * x[2] + 1"], False),
    (ODE2, ["x[1]", "x[2]"], ["x[1]", "2 * x[2]"], True),
    (PDE, ["d1 x[1] - x[1]", "d2 x[1]"], ["d1 x[1] - x[1]", "2 * d2 x[1]"], True),
    (PDE, ["d1 x[1] - x[1]", "d2 x[1]"], ["d1 x[1] - x[1]", "d2 x[1] - x[1]"], False),
    (ODE, ["d1 x[1] - x[1]"], ["d1 x[1] - 2 * x[1]"], False),
    (ODE, ["x[1] * d1 x[1] - 1"], ["2 * x[1] * d1 x[1] - 2"], True),
    (ODE, ["x[1] * d1 x[1] - 1"], ["x[1] * d1 x[1] + 1"], False),
    (ODE2, ["d1 x[1] - x[2]", "d1 x[2] + x[1]"], ["d1 x[1] + x[2]", "d1 x[2] - x[1]"], False),
    (
        PDE2,
        ["d1 x[1] - x[2]", "d2 x[1]", "d2 x[2]"],
        ["2 * d1 x[1] - 2 * x[2]", "d2 x[1]", "d2 x[2]"],
        True,
    ),
]


def _ids(cases):
    return [" ; ".join(case[1]) for case in cases]


class TestDeltaPairs:
    """Δ 对与 Δ 多项式"""

    def test_single_pair(self, pde):
        basis = pde.basis("d1 x[1] - x[1]", "d2 x[1]")
        (pair,) = delta_pairs(basis)
        assert basis[pair.i] == pde("d1 x[1] - x[1]")
        assert basis[pair.j] == pde("d2 x[1]")
        assert pair.xi == DerivOp((0, 1))
        assert pair.eta == DerivOp((1, 0))
        assert pair.u == pde.indet(1, exponents=(1, 1))
        assert delta_polynomial(basis, pair) == pde("-d2 x[1]")

    def test_different_variables_skipped(self, pde2):
        assert delta_pairs(pde2.basis("d1 x[1]", "d1 x[2]")) == []

    def test_singleton(self, ode):
        assert delta_pairs(ode.basis("d1 x[1] - x[1]")) == []

    def test_pair_record(self, pde):
        basis = pde.basis("d1 x[1] - x[1]", "d2 x[1]")
        record = delta_pairs(basis)[0].to_dict(basis)
        assert record == {"i": 1, "j": 0, "xi": [0, 1], "eta": [1, 0], "u": "d1 d2 x[1]"}


class TestLowerIdeal:
    """(Λ)_u"""

    def test_generators(self, pde):
        basis = pde.basis("d1 x[1] - x[1]", "d2 x[1]")
        ideal = lower_ideal(basis, pde.indet(1, exponents=(1, 1)))
        assert set(ideal.generators) == set(pde.many("d1 x[1] - x[1]", "d2 x[1]", "d2^2 x[1]"))

    def test_generators_with_constant_term(self, pde):
        basis = pde.basis("d1 x[1] - x[1]", "d2 x[1] - 1")
        ideal = lower_ideal(basis, pde.indet(1, exponents=(1, 1)))
        assert set(ideal.generators) == set(pde.many("d1 x[1] - x[1]", "d2 x[1] - 1", "d2^2 x[1]"))

    def test_prolong(self, ode):
        items = prolong(ode.many("d1 x[1] - x[1]"), 3)
        assert [item.poly for item in items] == ode.many(
            "d1 x[1] - x[1]", "d1^2 x[1] - d1 x[1]", "d1^3 x[1] - d1^2 x[1]"
        )
        assert [item.op.order for item in items] == [0, 1, 2]

    def test_ops_up_to(self):
        assert ops_up_to(2, 1) == [DerivOp((0, 0)), DerivOp((0, 1)), DerivOp((1, 0))]
        assert ops_up_to(1, -1) == []


class TestCoherence:
    """相容性检验"""

    @pytest.mark.parametrize("ring,texts", COHERENT, ids=_ids(COHERENT))
    def test_coherent(self, ring, texts):
        result = is_coherent(ring.basis(*texts))
        assert result
        assert result.witness is None
        assert all(c.member for c in result.checks)

    @pytest.mark.parametrize("ring,texts", INCOHERENT, ids=_ids(INCOHERENT))
    def test_incoherent(self, ring, texts):
        """反例的 Δ 多项式不在重新计算的 (Λ)_u : H_Λ^∞ 中"""
        basis = ring.basis(*texts)
        result = is_coherent(basis)
        assert not result
        witness = result.witness
        assert witness is not None
        assert witness.exponent is None
        assert witness.delta == delta_polynomial(basis, witness.pair)
        lower = lower_ideal(basis, witness.pair.u)
        h = basis.h_product
        t = Truncation.spanning([witness.delta, h, *lower.generators], ring.ambient)
        sat = saturate(TruncatedIdeal(t, lower.generators), h)
        assert not sat.contains(witness.delta)

    def test_witness_delta(self, pde):
        basis = pde.basis("d1 x[1] - x[1]", "d2 x[1] - 1")
        witness = is_coherent(basis).witness
        assert witness.delta == pde("-d2 x[1]")
        record = witness.to_dict(basis)
        assert record["delta"] == "-d2 x[1]"
        assert record["member"] is False
        assert "d2 x[1]" in record["truncation"]

    def test_parallel_matches_serial(self, pde2):
        basis = pde2.basis("d1 x[1] - x[1]", "d2 x[1] - x[2]", "d1 x[2]", "d2 x[2]")
        serial = is_coherent(basis)
        threaded = is_coherent(basis, workers=4)
        assert serial.coherent == threaded.coherent
        assert [c.delta for c in serial.checks] == [c.delta for c in threaded.checks]

    def test_parallel_map_keeps_order(self):
        squares = parallel_map(lambda k: k * k, list(range(20)), workers=4)
        assert squares == [k * k for k in range(20)]


class TestCharsetReport:
    """特征集判据报告"""

    def test_linear_ode_passes(self, ode):
        report = charset_report(ode.many("d1 x[1] - x[1]"))
        assert report.autoreduced
        assert report.coherent
        assert not report.reduced_element.found
        assert not report.prime_probe.refuted
        assert report.passed
        assert report.errors == []

    def test_incoherent_refuted(self, pde):
        report = charset_report(pde.many("d1 x[1] - x[1]", "d2 x[1] - 1"), 2, 2)
        assert report.coherent is False
        assert report.refuted
        assert report.to_dict()["coherence_witness"]["delta"] == "-d2 x[1]"

    def test_reducible_refuted_by_prime_probe(self, ode):
        report = charset_report(ode.many("x[1]^2 - 1"))
        assert report.coherent
        assert not report.reduced_element.found
        assert report.prime_probe.refuted
        f, g = report.prime_probe.witness
        sat = saturate(TruncatedIdeal.spanning(ode.many("x[1]^2 - 1")), ode("2 * x[1]"))
        assert sat.contains(f * g)
        assert not sat.contains(f) and not sat.contains(g)

    def test_split_only_by_combination(self, ode2):
        """两个不可约元素, 饱和理想仍然分解: (x1 − x2)(x1 + x2) ∈ P"""
        report = charset_report(ode2.many("x[1]^2 - 2", "x[2]^2 - 2"), 2, 1)
        assert report.autoreduced and report.coherent
        assert report.prime_probe.refuted
        assert report.refuted
        assert any("不是素理想" in e for e in report.errors)
        f, g = report.prime_probe.witness
        sat = saturate(
            TruncatedIdeal.spanning(ode2.many("x[1]^2 - 2", "x[2]^2 - 2")),
            ode2("4 * x[1] * x[2]"),
        )
        assert sat.contains(f * g)
        assert not sat.contains(f) and not sat.contains(g)

    def test_not_autoreduced(self, ode):
        report = charset_report(ode.many("d1 x[1]", "d1^2 x[1]"))
        assert not report.autoreduced
        assert report.coherence is None
        assert report.refuted
        assert len(report.errors) == 1

    def test_record(self, ode2):
        report = charset_report(ode2.many("d1 x[1] - x[2]", "d1 x[2] + x[1]"), 2, 1)
        data = report.to_dict()
        assert data["caps"] == {"degree": 2, "order": 1}
        assert data["autoreduced"] and data["coherent"]
        assert data["prime_probe"]["verdict"] == "no_violation_up_to"
        assert data["coherence_witness"] is None
        assert set(data["truncation"]) >= {"d1 x[1]", "d1 x[2]", "x[1]", "x[2]"}

    def test_bad_caps(self, ode):
        with pytest.raises(ValueError):
            charset_report(ode.many("x[1]"), degree_cap=0)
        with pytest.raises(ValueError):
            charset_report(ode.many("x[1]"), order_cap=-1)


class TestSaturationMembership:
    """余式判定与饱和判定一致"""

    @pytest.mark.parametrize("ring,texts,cases", BRIDGE, ids=_ids(BRIDGE))
    def test_bridge(self, ring, texts, cases):
        basis = ring.basis(*texts)
        for text, expected in cases:
            f = ring(text)
            by_remainder = membership_by_remainder(f, basis)
            by_saturation = membership_by_saturation(f, basis)
            assert by_remainder == expected, text
            assert by_saturation.member == expected, text
            if expected:
                assert by_saturation.verify(), text

    def test_exponent(self, ode):
        basis = ode.basis("(d1 x[1])^2 - 4 * x[1]")
        found = membership_by_saturation(ode("d1^2 x[1] - 2"), basis)
        assert found.exponent == 1
        assert found.verify()


class TestCharsetEquality:
    """两个特征集给出的素微分理想是否相等"""

    @pytest.mark.parametrize("ring,lam,gamma,expected", EQUALITY, ids=_ids(EQUALITY))
    def test_against_saturations(self, ring, lam, gamma, expected):
        a, b = ring.basis(*lam), ring.basis(*gamma)
        report = compare_charsets(a, b)
        assert report.equal == expected
        assert ideal_equal_charsets(a, b) == expected

        t = report.truncation
        p = saturate(TruncatedIdeal(t, list(a)), a.h_product)
        q = saturate(TruncatedIdeal(t, list(b)), b.h_product)
        assert ideal_equal_trunc(p, q) == expected

    def test_record(self, ode):
        report = compare_charsets(ode.basis("d1 x[1] - x[1]"), ode.basis("d1 x[1]"))
        data = report.to_dict()
        assert data["equal"] is False
        assert data["gamma_sat_contains_lambda"] is False
        assert isinstance(report.truncation, Truncation)
