"""
CLI 入口 - diffalg 命令行工具

退出码: 0 成立/完成, 1 不成立 (打印反例), 2 上界内未发现违例,
64 用法或配置错误, 65 输入无法解析或不合法.
"""

import functools
import logging
import sys
from typing import Optional

import click
from rich.console import Console
from rich.logging import RichHandler

from . import __version__
from .config import SessionConfig, load_config
from .diffpoly import DiffPoly, initial, rank, separant
from .errors import AutoreducedViolation, ConfigError, WorkbenchError
from .gaction import (
    InvarianceReport,
    diagonal_check,
    diagonal_ideal,
    g_invariance_check,
    sigma_apply,
)
from .ideals import Truncation, TruncatedIdeal, saturate
from .parser import parse_poly, parse_poly_file
from .reduction import (
    AutoreducedSet,
    compare_autoreduced_sets,
    diff_remainder,
    membership_by_remainder,
    minimal_autoreduced_subset,
    validate_autoreduced,
)
from .report import (
    Verdict,
    certificate_record,
    console,
    emit,
    print_certificate,
    print_errors,
    print_header,
    print_polys,
    print_table,
    print_truncation,
    print_verdict,
)
from .rosenfeld import charset_report, compare_charsets, is_coherent, membership_by_saturation

logger = logging.getLogger(__name__)

EXIT_USAGE = 64
EXIT_DATAERR = 65

INPUT = click.Path(exists=True, dir_okay=False)


class WorkbenchGroup(click.Group):
    """子命令返回退出码; 错误按类别映射到 64 / 65"""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as e:
            e.show()
            code = EXIT_USAGE
        except ConfigError as e:
            click.echo(f"配置错误: {e}", err=True)
            code = EXIT_USAGE
        except WorkbenchError as e:
            click.echo(f"错误: {e}", err=True)
            code = EXIT_DATAERR
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = 1
        else:
            code = rv if isinstance(rv, int) else 0
        if not standalone_mode:
            return code
        sys.exit(code)


def setup_logging(verbose: bool):
    """--verbose 时 DEBUG 日志经 RichHandler 写到 stderr, 否则只保留 WARNING"""
    handler = RichHandler(console=Console(stderr=True), show_path=False, show_time=False)
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[handler],
        force=True,
    )


def session_options(fn):
    """每个子命令共用的会话参数"""
    options = [
        click.option("--m", "m", type=int, default=None, help="微分算子个数 (默认 1)"),
        click.option("--n", "n", type=int, default=None, help="每个块的变量个数 (默认 1)"),
        click.option(
            "--group", "group", default=None, help="trivial, cyclic:k, sym:k, klein, 或群文件路径"
        ),
        click.option("--degree-cap", type=int, default=None, help="探测的次数上界 (默认 3)"),
        click.option("--order-cap", type=int, default=None, help="探测的导数阶上界 (默认 3)"),
        click.option("--machine", is_flag=True, default=False, help="每个结果输出一行 JSON"),
        click.option("--config", "config_path", type=INPUT, default=None, help="YAML 配置文件"),
        click.option("--workers", type=int, default=None, help="并行检查的线程数 (默认 1)"),
        click.option("--verbose", "-v", is_flag=True, help="在 stderr 输出调试日志"),
    ]

    @functools.wraps(fn)
    def wrapper(m, n, group, degree_cap, order_cap, machine, config_path, workers, verbose, **kw):
        setup_logging(verbose)
        session = load_config(
            config_path,
            m=m,
            n=n,
            group=group,
            degree_cap=degree_cap,
            order_cap=order_cap,
            output="machine" if machine else None,
            workers=workers,
        )
        logger.debug("会话配置: %s", session)
        return fn(session, **kw)

    for option in reversed(options):
        wrapper = option(wrapper)
    return wrapper


def read_polys(path: str, session: SessionConfig) -> list[DiffPoly]:
    return parse_poly_file(path, session.ambient)


def read_basis(path: str, session: SessionConfig) -> AutoreducedSet:
    return validate_autoreduced(read_polys(path, session), session.ambient)


def finish(command: str, verdict: Verdict, session: SessionConfig, detail: str = "") -> int:
    if not session.machine:
        print_verdict(verdict, detail)
    logger.debug("%s: %s", command, verdict.value)
    return verdict.exit_code


@click.group(cls=WorkbenchGroup)
@click.version_option(version=__version__, prog_name="diffalg")
def cli():
    """diffalg - 微分代数工作台

    微分约化, 自约化集与 Rosenfeld 判据, 饱和理想, 以及有限群作用下的不变性检验
    """


main = cli


@cli.command("rank")
@session_options
@click.option("--poly", "poly_path", type=INPUT, required=True, help="多项式文件")
def rank_command(session: SessionConfig, poly_path: str):
    """每个多项式的首项变元, 次数, 初式与分离元"""
    ambient = session.ambient
    records = []
    for f in read_polys(poly_path, session):
        record = {"poly": str(f), "leader": None, "degree": 0, "order": None}
        record.update(initial=None, separant=None)
        if not f.is_constant:
            r = rank(f)
            record.update(
                leader=ambient.indet_name(r.leader),
                degree=r.degree,
                order=r.leader.order,
                initial=str(initial(f)),
                separant=str(separant(f)),
            )
        records.append(record)

    if session.machine:
        for record in records:
            emit("rank", Verdict.DONE, session, **record)
    else:
        print_header("rank", session)
        rows = [
            (
                r["poly"],
                r["leader"] or "(常数)",
                r["degree"],
                r["initial"] or "-",
                r["separant"] or "-",
            )
            for r in records
        ]
        print_table("秩", ["多项式", "首项变元", "次数", "初式", "分离元"], rows)
    return finish("rank", Verdict.DONE, session)


@cli.command("reduce")
@session_options
@click.option("--lambda", "lambda_path", type=INPUT, required=True, help="自约化集 Λ")
@click.option("--poly", "poly_path", type=INPUT, required=True, help="待约化的多项式")
def reduce_command(session: SessionConfig, lambda_path: str, poly_path: str):
    """带证书的微分除法: M·f = f0 + Σ 系数·δ^κ(Λ[i])"""
    basis = read_basis(lambda_path, session)
    certs = [diff_remainder(f, basis) for f in read_polys(poly_path, session)]

    if session.machine:
        for cert in certs:
            emit("reduce", Verdict.DONE, session, basis=[str(f) for f in basis],
                 h=str(basis.h_product), **certificate_record(cert))
    else:
        print_header("reduce", session)
        print_polys("Λ", basis)
        console.print(f"H_Λ = {basis.h_product}")
        for cert in certs:
            print_certificate(cert)
    return finish("reduce", Verdict.DONE, session)


@cli.command("autoreduced")
@session_options
@click.option("--lambda", "lambda_path", type=INPUT, required=True, help="候选集合")
@click.option("--minimal", is_flag=True, help="抽取最小自约化子集")
def autoreduced_command(session: SessionConfig, lambda_path: str, minimal: bool):
    """检查集合是否自约化, 或抽取最小自约化子集"""
    polys = read_polys(lambda_path, session)
    ambient = session.ambient

    if minimal:
        subset = minimal_autoreduced_subset(polys)
        if session.machine:
            emit("autoreduced", Verdict.DONE, session, minimal=True,
                 elements=[str(f) for f in subset])
        else:
            print_header("autoreduced --minimal", session)
            print_polys("最小自约化子集", subset)
        return finish("autoreduced", Verdict.DONE, session)

    try:
        basis = validate_autoreduced(polys, ambient)
    except AutoreducedViolation as e:
        pair = [str(f) for f in e.pair] if e.pair else None
        if session.machine:
            emit("autoreduced", Verdict.REFUTED, session, minimal=False, reason=e.reason, pair=pair)
        else:
            print_header("autoreduced", session)
            print_errors([str(e)])
        return finish("autoreduced", Verdict.REFUTED, session, e.reason)

    ranks = [(ambient.indet_name(r.leader), r.degree) for r in basis.ranks]
    if session.machine:
        emit("autoreduced", Verdict.HOLDS, session, minimal=False,
             elements=[str(f) for f in basis], ranks=[list(r) for r in ranks])
    else:
        print_header("autoreduced", session)
        print_table("按秩排列", ["#", "多项式", "首项变元", "次数"],
                    ((i, f, u, d) for i, (f, (u, d)) in enumerate(zip(basis, ranks))))
    return finish("autoreduced", Verdict.HOLDS, session)


@cli.command("compare-sets")
@session_options
@click.option("--lambda", "lambda_path", type=INPUT, required=True, help="自约化集 A")
@click.option("--gamma", "gamma_path", type=INPUT, required=True, help="自约化集 B")
def compare_sets_command(session: SessionConfig, lambda_path: str, gamma_path: str):
    """自约化集之间的秩比较"""
    a = read_basis(lambda_path, session)
    b = read_basis(gamma_path, session)
    ordering = compare_autoreduced_sets(a, b)
    symbol = {-1: "<", 0: "=", 1: ">"}[int(ordering)]

    if session.machine:
        emit("compare-sets", Verdict.DONE, session, ordering=ordering.name.lower(),
             left=[str(f) for f in a], right=[str(f) for f in b])
    else:
        print_header("compare-sets", session)
        print_polys("A", a)
        print_polys("B", b)
        console.print(f"A {symbol} B")
    return finish("compare-sets", Verdict.DONE, session, f"A {symbol} B")


@cli.command("coherent")
@session_options
@click.option("--lambda", "lambda_path", type=INPUT, required=True, help="自约化集 Λ")
def coherent_command(session: SessionConfig, lambda_path: str):
    """逐个 Δ 对检查相容性"""
    basis = read_basis(lambda_path, session)
    result = is_coherent(basis, session.workers)
    truncations = [c.truncation for c in result.checks]
    joint = truncations[0].join(*truncations[1:]) if truncations else None
    verdict = Verdict.HOLDS if result.coherent else Verdict.REFUTED
    witness = result.witness

    if session.machine:
        emit("coherent", verdict, session, joint,
             pairs=[c.to_dict(basis) for c in result.checks],
             witness=witness.to_dict(basis) if witness else None)
    else:
        print_header("coherent", session)
        print_polys("Λ", basis)
        rows = [
            (f"({c.pair.i}, {c.pair.j})", session.ambient.indet_name(c.pair.u), c.delta,
             "是" if c.member else "否", c.exponent if c.exponent is not None else "-")
            for c in result.checks
        ]
        print_table("Δ 对", ["对", "u", "Δ 多项式", "属于 (Λ)_u:H^∞", "指数"], rows)
        print_truncation(joint)
    detail = ""
    if witness is not None:
        detail = f"反例: Δ 对 ({witness.pair.i}, {witness.pair.j}), Δ = {witness.delta}"
    return finish("coherent", verdict, session, detail)


@cli.command("charset-check")
@session_options
@click.option("--lambda", "lambda_path", type=INPUT, required=True, help="特征集候选")
def charset_check_command(session: SessionConfig, lambda_path: str):
    """Rosenfeld 判据: 自约化, 相容, 无约化元素, 有界素性探测"""
    polys = read_polys(lambda_path, session)
    report = charset_report(polys, session.degree_cap, session.order_cap, session.workers)
    verdict = Verdict.REFUTED if report.refuted else Verdict.INCONCLUSIVE

    if session.machine:
        data = report.to_dict()
        data.pop("truncation")
        emit("charset-check", verdict, session, report.truncation_used, **data)
    else:
        print_header("charset-check", session)
        print_polys("候选集", report.elements)

        def mark(ok: Optional[bool]) -> str:
            return "-" if ok is None else ("✓" if ok else "✗")

        probe = report.reduced_element
        prime = report.prime_probe
        rows = [
            ("自约化", mark(report.autoreduced)),
            ("相容", mark(report.coherent)),
            ("无约化元素", mark(None if probe is None else not probe.found)),
            ("素性探测", mark(None if prime is None else not prime.refuted)),
        ]
        print_table("检查", ["项目", "结果"], rows)
        print_truncation(report.truncation_used)
        print_errors(report.errors)
    return finish("charset-check", verdict, session)


@cli.command("member")
@session_options
@click.option("--lambda", "lambda_path", type=INPUT, required=True, help="特征集 Λ")
@click.option("--poly", "poly_path", type=INPUT, required=True, help="待判定的多项式")
def member_command(session: SessionConfig, lambda_path: str, poly_path: str):
    """f ∈ [Λ]:H_Λ^∞: 余式判定与饱和判定并列给出"""
    basis = read_basis(lambda_path, session)
    polys = read_polys(poly_path, session)
    rows = []
    all_members = True
    for f in polys:
        by_remainder = membership_by_remainder(f, basis)
        by_saturation = membership_by_saturation(f, basis)
        all_members = all_members and by_remainder
        rows.append((f, by_remainder, by_saturation))

    verdict = Verdict.HOLDS if all_members else Verdict.REFUTED
    if session.machine:
        for f, rem, sat in rows:
            emit("member", Verdict.HOLDS if rem else Verdict.REFUTED, session, sat.truncation,
                 poly=str(f), by_remainder=rem, by_saturation=sat.member,
                 exponent=sat.exponent, agree=rem == sat.member,
                 certificate_verified=sat.verify() if sat.member else None)
    else:
        print_header("member", session)
        print_polys("Λ", basis)
        table_rows = [
            (f, "是" if rem else "否", "是" if sat.member else "否",
             sat.exponent if sat.exponent is not None else "-",
             "一致" if rem == sat.member else "不一致")
            for f, rem, sat in rows
        ]
        print_table("成员判定", ["多项式", "余式为 0", "属于饱和理想", "指数", "比较"], table_rows)
    return finish("member", verdict, session)


@cli.command("saturate")
@session_options
@click.option("--gens", "gens_path", type=INPUT, required=True, help="理想的生成元")
@click.option("--by", "saturator", required=True, help="饱和元 h (表达式)")
@click.option("--poly", "poly_path", type=INPUT, default=None, help="可选: 判定这些多项式的成员关系")
def saturate_command(
    session: SessionConfig, gens_path: str, saturator: str, poly_path: Optional[str]
):
    """I : h^∞ 的约化 Gröbner 基及指数证书"""
    ambient = session.ambient
    gens = read_polys(gens_path, session)
    h = parse_poly(saturator, ambient, source="--by")
    polys = read_polys(poly_path, session) if poly_path else []
    truncation = Truncation.spanning([*gens, h, *polys], ambient)
    sat = saturate(TruncatedIdeal(truncation, gens), h)
    basis = sat.generators
    members = [(f, sat.member_with_exponent(f)) for f in polys]

    if session.machine:
        emit("saturate", Verdict.DONE, session, truncation,
             generators=[str(g) for g in gens], saturator=str(h),
             basis=[str(b) for b in basis],
             exponents=[c.exponent for c in sat.certificates],
             members=[{"poly": str(f), "member": m.member, "exponent": m.exponent}
                      for f, m in members])
    else:
        print_header("saturate", session)
        print_polys("生成元", gens)
        console.print(f"h = {h}")
        print_table("I : h^∞ 的约化 Gröbner 基", ["#", "元素", "指数 r (h^r·z ∈ I)"],
                    ((i, b, c.exponent) for i, (b, c) in enumerate(zip(basis, sat.certificates))))
        if members:
            print_table("成员判定", ["多项式", "属于", "指数"],
                        ((f, "是" if m else "否", m.exponent if m else "-") for f, m in members))
        print_truncation(truncation)
    return finish("saturate", Verdict.DONE, session)


@cli.command("ideal-eq")
@session_options
@click.option("--lambda", "lambda_path", type=INPUT, required=True, help="特征集 Λ")
@click.option("--gamma", "gamma_path", type=INPUT, required=True, help="特征集 Γ")
def ideal_eq_command(session: SessionConfig, lambda_path: str, gamma_path: str):
    """Λ 与 Γ 给出的素微分理想是否相等"""
    lam = read_basis(lambda_path, session)
    gamma = read_basis(gamma_path, session)
    report = compare_charsets(lam, gamma)
    verdict = Verdict.HOLDS if report.equal else Verdict.REFUTED

    if session.machine:
        data = report.to_dict()
        data.pop("truncation")
        emit("ideal-eq", verdict, session, report.truncation, **data)
    else:
        print_header("ideal-eq", session)
        print_polys("Λ", lam)
        print_polys("Γ", gamma)
        rows = [
            ("(Γ):H_Γ^∞ ⊇ Λ", report.gamma_sat_contains_lambda),
            ("H_Λ ∉ (Γ):H_Γ^∞", report.gamma_sat_excludes_h_lambda),
            ("(Λ):H_Λ^∞ ⊇ Γ", report.lambda_sat_contains_gamma),
            ("H_Γ ∉ (Λ):H_Λ^∞", report.lambda_sat_excludes_h_gamma),
        ]
        print_table("条件", ["条件", "成立"], ((c, "是" if ok else "否") for c, ok in rows))
        print_truncation(report.truncation)
    return finish("ideal-eq", verdict, session)


def _print_invariance(title: str, report: InvarianceReport):
    rows = [
        (c.element, *("是" if x else "否" for x in (
            c.pg_contains_lambda, c.pg_excludes_h, c.p_contains_lambda_g, c.p_excludes_h_g)))
        for c in report.checks
    ]
    print_table(title, ["g", "P_g ⊇ Λ", "H ∉ P_g", "P ⊇ Λ_g", "σ_g H ∉ P"], rows)
    print_errors(report.notes)


@cli.command("g-invariant")
@session_options
@click.option("--lambda", "lambda_path", type=INPUT, required=True, help="特征集 Λ")
def g_invariant_command(session: SessionConfig, lambda_path: str):
    """Λ 给出的素微分理想在群作用下是否不变"""
    basis = read_basis(lambda_path, session)
    charset = charset_report(basis, session.degree_cap, session.order_cap, session.workers)
    report = g_invariance_check(basis, session.group, charset, session.workers)
    verdict = Verdict.HOLDS if report.invariant else Verdict.REFUTED

    if session.machine:
        witness = report.witness
        emit("g-invariant", verdict, session, witness.truncation if witness else None,
             **report.to_dict())
    else:
        print_header("g-invariant", session)
        print_polys("Λ", basis)
        _print_invariance("逐元素检查", report)
    detail = f"反例: g = {report.witness.element}" if report.witness else ""
    return finish("g-invariant", verdict, session, detail)


@cli.command("diagonal")
@session_options
@click.option("--lambda", "lambda_path", type=INPUT, required=True, help="只含单位元块的 Λ")
def diagonal_command(session: SessionConfig, lambda_path: str):
    """对角理想的生成元, 以及最小自约化子集上的不变性检验"""
    polys = read_polys(lambda_path, session)
    gens = diagonal_ideal(polys, session.group)
    report = diagonal_check(polys, session.group, workers=session.workers)
    verdict = Verdict.HOLDS if report.invariant else Verdict.REFUTED

    if session.machine:
        emit("diagonal", verdict, session, None, generators=[str(g) for g in gens],
             **report.to_dict())
    else:
        print_header("diagonal", session)
        print_polys("生成元", gens)
        print_polys("最小自约化子集", report.elements)
        _print_invariance("不变性", report)
    return finish("diagonal", verdict, session)


@cli.command("sigma")
@session_options
@click.option("--poly", "poly_path", type=INPUT, required=True, help="多项式文件")
@click.option("--element", default=None, help="群元素; 省略时给出整条轨道")
def sigma_command(session: SessionConfig, poly_path: str, element: Optional[str]):
    """σ_g(f), 或者 f 在全部群元素下的像"""
    group = session.group
    polys = read_polys(poly_path, session)
    names = [element] if element is not None else list(group.elements)
    rows = [(g, f, sigma_apply(g, f, group)) for f in polys for g in names]

    if session.machine:
        for g, f, image in rows:
            emit("sigma", Verdict.DONE, session, element=g, poly=str(f), image=str(image))
    else:
        print_header("sigma", session)
        print_table("σ 作用", ["g", "f", "σ_g(f)"], rows)
    return finish("sigma", Verdict.DONE, session)


if __name__ == "__main__":
    main()
