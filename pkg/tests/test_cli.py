"""
命令行测试: 退出码, 机器输出与错误报告
"""

import json

import pytest
from click.testing import CliRunner

from diffalg_workbench import __version__
from diffalg_workbench.cli import cli
from diffalg_workbench.gaction import cyclic_group
from tests.helpers import Ring


@pytest.fixture
def run(fixture_path):
    """调用 cli, 参数中的 @name 换成 tests/fixtures 下的路径"""
    runner = CliRunner()

    def invoke(*args: str):
        argv = [fixture_path(a[1:]) if a.startswith("@") else a for a in args]
        return runner.invoke(cli, argv)

    return invoke


def records(result) -> list[dict]:
    return [json.loads(line) for line in result.output.splitlines() if line.startswith("{")]


class TestExitCodes:
    def test_reduce(self, run):
        result = run("reduce", "--lambda", "@basis.gd", "--poly", "@f.gd")
        assert result.exit_code == 0
        assert "完成" in result.output

    def test_coherent(self, run):
        assert run("coherent", "--m", "2", "--lambda", "@coherent.gd").exit_code == 0
        assert run("coherent", "--m", "2", "--lambda", "@incoherent.gd").exit_code == 1

    def test_charset_check(self, run):
        caps = ("--degree-cap", "2", "--order-cap", "1")
        assert run("charset-check", *caps, "--lambda", "@basis.gd").exit_code == 2
        assert run("charset-check", *caps, "--lambda", "@quadratic.gd").exit_code == 1

    def test_autoreduced(self, run):
        assert run("autoreduced", "--lambda", "@basis.gd").exit_code == 0
        assert run("autoreduced", "--lambda", "@not_autoreduced.gd").exit_code == 1
        assert run("autoreduced", "--minimal", "--lambda", "@not_autoreduced.gd").exit_code == 0

    def test_member(self, run):
        result = run("member", "--lambda", "@basis.gd", "--poly", "@members.gd")
        assert result.exit_code == 1

    def test_ideal_eq(self, run):
        result = run("ideal-eq", "--lambda", "@basis.gd", "--gamma", "@basis2.gd")
        assert result.exit_code == 0
        result = run("ideal-eq", "--lambda", "@basis.gd", "--gamma", "@f.gd")
        assert result.exit_code == 1

    def test_g_invariant(self, run):
        caps = ("--degree-cap", "2", "--order-cap", "1")
        swap = run("g-invariant", "--group", "cyclic:2", *caps, "--lambda", "@swap.gd")
        notswap = run("g-invariant", "--group", "cyclic:2", *caps, "--lambda", "@notswap.gd")
        assert swap.exit_code == 0
        assert notswap.exit_code == 1
        assert "反例: g = g" in notswap.output

    def test_group_file(self, run):
        caps = ("--degree-cap", "2", "--order-cap", "1")
        result = run("g-invariant", "--group", "@z2.group", *caps, "--lambda", "@swap.gd")
        assert result.exit_code == 0

    def test_diagonal(self, run):
        assert run("diagonal", "--group", "cyclic:2", "--lambda", "@basis.gd").exit_code == 0

    def test_config_file(self, run):
        result = run("coherent", "--config", "@config.yaml", "--lambda", "@coherent.gd")
        assert result.exit_code == 0
        assert "m=2" in result.output

    def test_version(self, run):
        result = run("--version")
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_verbose(self, run):
        assert run("rank", "-v", "--poly", "@f.gd").exit_code == 0


class TestErrors:
    def test_parse_error(self, run):
        result = run("rank", "--poly", "@bad.gd")
        assert result.exit_code == 65
        assert "bad.gd:1:1" in result.output
        assert "错误" in result.output

    def test_missing_file(self, run):
        assert run("rank", "--poly", "no/such/file.gd").exit_code == 64

    def test_bad_cap(self, run):
        result = run("charset-check", "--degree-cap", "0", "--lambda", "@basis.gd")
        assert result.exit_code == 64
        assert "配置错误" in result.output

    def test_unknown_group(self, run):
        assert run("sigma", "--group", "nope", "--poly", "@f.gd").exit_code == 64

    def test_unknown_command(self, run):
        assert run("frobnicate").exit_code == 64

    def test_not_autoreduced_basis(self, run):
        """要求自约化集的命令遇到非自约化输入时按数据错误处理"""
        result = run("reduce", "--lambda", "@not_autoreduced.gd", "--poly", "@f.gd")
        assert result.exit_code == 65

    def test_block_outside_identity(self, run):
        result = run("diagonal", "--group", "cyclic:2", "--lambda", "@swap.gd")
        assert result.exit_code == 65


class TestMachineOutput:
    def test_reduce_record(self, run):
        result = run("reduce", "--machine", "--lambda", "@basis.gd", "--poly", "@f.gd")
        (record,) = records(result)
        assert record["command"] == "reduce"
        assert record["verdict"] == "done"
        assert record["remainder"] == "x[1]"
        assert record["exponent"] == 0
        assert record["verified"] is True
        assert record["ambient"] == {"m": 1, "n": 1, "group": "trivial", "elements": ["e"]}
        assert record["caps"] == {"degree": 3, "order": 3}

    def test_rank_record(self, run):
        (record,) = records(run("rank", "--machine", "--poly", "@f.gd"))
        assert record["leader"] == "d1^2 x[1]"
        assert record["degree"] == 1
        assert record["order"] == 2

    def test_coherent_witness(self, run):
        result = run("coherent", "--machine", "--m", "2", "--lambda", "@incoherent.gd")
        (record,) = records(result)
        assert record["verdict"] == "refuted"
        assert record["witness"]["delta"] == "-d2 x[1]"
        assert record["witness"]["member"] is False
        assert "d2 x[1]" in record["truncation"]

    def test_minimal_subset(self, run):
        result = run("autoreduced", "--minimal", "--machine", "--lambda", "@not_autoreduced.gd")
        (record,) = records(result)
        assert record["elements"] == ["d1 x[1]"]

    def test_autoreduced_violation(self, run):
        result = run("autoreduced", "--machine", "--lambda", "@not_autoreduced.gd")
        (record,) = records(result)
        assert record["verdict"] == "refuted"
        assert record["pair"] == ["d1^2 x[1]", "d1 x[1]"]

    def test_compare_sets(self, run):
        result = run("compare-sets", "--machine", "--lambda", "@basis.gd", "--gamma", "@f.gd")
        (record,) = records(result)
        assert record["ordering"] == "less"

    def test_member_records(self, run):
        result = run("member", "--machine", "--lambda", "@basis.gd", "--poly", "@members.gd")
        first, second = records(result)
        assert first["by_remainder"] is True
        assert first["by_saturation"] is True
        assert first["certificate_verified"] is True
        assert second["by_remainder"] is False
        assert second["agree"] is True

    def test_saturate(self, run):
        result = run(
            "saturate", "--machine", "--m", "0", "--n", "2",
            "--gens", "@sat_gens.gd", "--by", "x[1]",
        )
        assert result.exit_code == 0
        (record,) = records(result)
        assert record["basis"] == ["x[2]"]
        assert record["exponents"] == [1]
        assert record["saturator"] == "x[1]"

    def test_charset_record(self, run):
        result = run(
            "charset-check", "--machine", "--degree-cap", "2", "--order-cap", "1",
            "--lambda", "@quadratic.gd",
        )
        (record,) = records(result)
        assert record["verdict"] == "refuted"
        assert record["prime_probe"]["verdict"] == "not_prime"
        assert record["caps"] == {"degree": 2, "order": 1}

    def test_g_invariant_record(self, run):
        result = run(
            "g-invariant", "--machine", "--group", "cyclic:2",
            "--degree-cap", "2", "--order-cap", "1", "--lambda", "@notswap.gd",
        )
        (record,) = records(result)
        assert record["invariant"] is False
        assert record["checks"][0]["element"] == "g"
        assert record["ambient"]["elements"] == ["e", "g"]

    def test_sigma(self, run):
        z2 = Ring(1, 1, cyclic_group(2))
        result = run(
            "sigma", "--machine", "--group", "cyclic:2", "--element", "g", "--poly", "@swap.gd"
        )
        images = [z2(r["image"]) for r in records(result)]
        assert images == z2.many("d1 x[g,1] - x[e,1]", "d1 x[e,1] - x[g,1]")



CAPS = ("--degree-cap", "2", "--order-cap", "1")

INVOCATIONS = [
    ("rank", "--poly", "@f.gd"),
    ("reduce", "--lambda", "@basis.gd", "--poly", "@f.gd"),
    ("autoreduced", "--lambda", "@not_autoreduced.gd"),
    ("compare-sets", "--lambda", "@basis.gd", "--gamma", "@f.gd"),
    ("coherent", "--m", "2", "--lambda", "@incoherent.gd"),
    ("charset-check", *CAPS, "--lambda", "@quadratic.gd"),
    ("member", "--lambda", "@basis.gd", "--poly", "@members.gd"),
    ("saturate", "--m", "0", "--n", "2", "--gens", "@sat_gens.gd", "--by", "x[1]"),
    ("ideal-eq", "--lambda", "@basis.gd", "--gamma", "@basis2.gd"),
    ("g-invariant", "--group", "cyclic:2", *CAPS, "--lambda", "@notswap.gd"),
    ("diagonal", "--group", "cyclic:2", *CAPS, "--lambda", "@basis.gd"),
    ("sigma", "--group", "cyclic:2", "--poly", "@swap.gd"),
]


class TestDeterminism:
    """同一输入两次运行, stdout 逐字节相同"""

    def test_every_command_covered(self):
        assert {args[0] for args in INVOCATIONS} == set(cli.commands)

    @pytest.mark.parametrize("machine", [False, True], ids=["text", "machine"])
    @pytest.mark.parametrize("args", INVOCATIONS, ids=[a[0] for a in INVOCATIONS])
    def test_repeatable(self, run, args, machine):
        command, *rest = args
        argv = (command, "--machine", *rest) if machine else args
        first, second = run(*argv), run(*argv)
        assert first.exit_code in (0, 1, 2)
        assert first.exit_code == second.exit_code
        assert first.output == second.output
        if machine:
            assert all(r["command"] == command for r in records(first))
