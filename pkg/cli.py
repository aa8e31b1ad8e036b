"""
高斯矩展开工具 - 命令行入口

子命令: expand / moment / isserlis / coeffs / verify
结果写标准输出，日志写标准错误
退出码: 0 成功；1 验证不一致、引擎失败或协方差非半正定；2 用法、解析错误或项数超限
"""

import json
from enum import Enum
from pathlib import Path
from typing import Callable, List, Optional

import typer
from loguru import logger
from pydantic import BaseModel, ValidationError, conint, model_validator

from engines import VerificationCoordinator
from models import (
    DimensionMismatchError,
    EngineKind,
    GaussMomentError,
    GaussianSpec,
    InvalidInputError,
    MultiIndex,
    NotPositiveSemidefiniteError,
    OutputFormat,
    SpecFile,
    VerificationStatus,
    format_number,
    load_settings,
)
from utils.coefficients import glue_row, hermite_polynomial_coeffs, hermite_row
from utils.oracles import pairing_moment
from utils.polynomial import Polynomial, gaussian_expectation, parse_polynomial
from utils.stein_expansion import isserlis_expansion, song_lee_moment, stein_expand, uncorrelated_expand
from utils.symbolic_core import parse_expansion, render

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class Command(str, Enum):
    EXPAND = "expand"
    MOMENT = "moment"
    ISSERLIS = "isserlis"
    COEFFS = "coeffs"
    VERIFY = "verify"


class CoeffTable(str, Enum):
    H = "H"
    G = "G"
    HE = "He"


class JobConfig(BaseModel):
    """一次命令行调用的完整配置"""
    command: Command
    n: Optional[str] = None
    n_dim: Optional[conint(ge=1)] = None
    spec_path: Optional[Path] = None
    g_path: Optional[Path] = None
    input_path: Optional[Path] = None
    engines: List[EngineKind] = []
    seed: Optional[conint(ge=0, lt=2 ** 64)] = None
    samples: Optional[conint(ge=2)] = None
    workers: Optional[conint(ge=1)] = None
    output_format: OutputFormat = OutputFormat.JSON
    term_cap: Optional[conint(ge=1)] = None
    zero_mean: bool = False
    uncorrelated: bool = False
    max_order: Optional[conint(ge=0)] = None
    induction: bool = False
    table: Optional[CoeffTable] = None
    max_l: Optional[conint(ge=0)] = None

    @model_validator(mode="after")
    def _required_fields(self) -> "JobConfig":
        cmd = self.command
        if cmd is Command.EXPAND and self.n is None and self.input_path is None:
            raise ValueError("expand 需要多重指标 n 或 --input")
        if cmd in (Command.MOMENT, Command.VERIFY) and self.n is None:
            raise ValueError(f"{cmd.value} 需要多重指标 n")
        if cmd is Command.ISSERLIS and self.n_dim is None:
            raise ValueError("isserlis 需要维度 N")
        if cmd is Command.COEFFS and (self.table is None or self.max_l is None):
            raise ValueError("coeffs 需要表名与 --max")
        if cmd is Command.VERIFY:
            if self.g_path is None or self.spec_path is None:
                raise ValueError("verify 需要 --g 与 --spec")
            if not self.induction and len(set(self.engines)) < 2:
                raise ValueError("verify 至少需要两个不同的引擎")
        return self


# ==================== 输入读取 ====================

def _read(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidInputError(f"无法读取文件 {path}: {e}") from e


def load_spec(path: Path) -> GaussianSpec:
    """读取高斯参数 JSON"""
    try:
        record = SpecFile.model_validate_json(_read(path))
    except ValidationError as e:
        raise InvalidInputError(f"高斯参数文件格式错误: {e}") from e
    return record.to_gaussian_spec()


def load_polynomial(path: Path) -> Polynomial:
    return parse_polynomial(_read(path))


def _check_dims(n: MultiIndex, spec: GaussianSpec, g: Optional[Polynomial] = None) -> None:
    if len(n) != spec.n_dim or (g is not None and g.n_dim != spec.n_dim):
        raise DimensionMismatchError(
            f"维度不一致: n 为 {len(n)} 维，高斯参数为 {spec.n_dim} 维"
            + (f"，多项式为 {g.n_dim} 维" if g is not None else "")
        )

# ==================== 子命令实现 ====================

def _run_expand(config: JobConfig, out: Callable[[str], None]) -> int:
    if config.input_path is not None:
        expansion = parse_expansion(_read(config.input_path))
    else:
        n = MultiIndex.parse(config.n)
        if config.uncorrelated:
            expansion = uncorrelated_expand(n)
            if config.max_order is not None:
                expansion = expansion.filter(lambda t: t.deriv.total <= config.max_order)
        else:
            cap = config.term_cap if config.term_cap is not None else load_settings()["term_cap"]
            expansion = stein_expand(n, max_order=config.max_order, term_cap=cap)
        if config.zero_mean:
            expansion = expansion.zero_mean_part()
    out(render(expansion, config.output_format))
    return EXIT_OK


def _run_moment(config: JobConfig, out: Callable[[str], None]) -> int:
    n = MultiIndex.parse(config.n)
    if config.spec_path is None:
        if config.g_path is not None:
            raise InvalidInputError("--g 需要同时给出 --spec")
        out(render(song_lee_moment(n), config.output_format))
        return EXIT_OK
    spec = load_spec(config.spec_path)
    g = load_polynomial(config.g_path) if config.g_path is not None else Polynomial.constant(len(n))
    _check_dims(n, spec, g)
    out(format_number(gaussian_expectation(g.multiply_by_monomial(n), spec)))
    return EXIT_OK


def _run_isserlis(config: JobConfig, out: Callable[[str], None]) -> int:
    if config.spec_path is None:
        out(render(isserlis_expansion(config.n_dim), config.output_format))
        return EXIT_OK
    spec = load_spec(config.spec_path)
    if spec.n_dim != config.n_dim:
        raise DimensionMismatchError(f"N={config.n_dim} 与高斯参数维度 {spec.n_dim} 不一致")
    if config.n_dim % 2:
        # 奇数个标签没有完美匹配，配对和为 0
        out("0")
        return EXIT_OK
    out(format_number(pairing_moment(range(1, config.n_dim + 1), spec)))
    return EXIT_OK


def _run_coeffs(config: JobConfig, out: Callable[[str], None]) -> int:
    lines = []
    if config.table is CoeffTable.G:
        for l1 in range(config.max_l + 1):
            for l2 in range(config.max_l + 1):
                lines.append(f"G {l1},{l2}: " + " ".join(map(str, glue_row(l1, l2))))
    else:
        row = hermite_row if config.table is CoeffTable.H else hermite_polynomial_coeffs
        for ell in range(config.max_l + 1):
            lines.append(f"{config.table.value} {ell}: " + " ".join(map(str, row(ell))))
    out("\n".join(lines))
    return EXIT_OK


def _run_verify(config: JobConfig, out: Callable[[str], None]) -> int:
    n = MultiIndex.parse(config.n)
    spec = load_spec(config.spec_path)
    g = load_polynomial(config.g_path)
    _check_dims(n, spec, g)

    settings = load_settings()
    if config.term_cap is not None:
        settings["term_cap"] = config.term_cap

    coordinator = VerificationCoordinator(
        settings=settings, samples=config.samples, seed=config.seed, workers=config.workers
    )
    if config.induction:
        report = coordinator.run_induction(g, n, spec)
    else:
        report = coordinator.run_verification(g, n, spec, config.engines)
    out(json.dumps(report, ensure_ascii=False, separators=(",", ":")))
    if report["status"] == VerificationStatus.AGREE.value:
        return EXIT_OK
    for line in report.get("diagnostics", []):
        logger.error(f"❌ {line}")
    return EXIT_FAILED


_HANDLERS = {
    Command.EXPAND: _run_expand,
    Command.MOMENT: _run_moment,
    Command.ISSERLIS: _run_isserlis,
    Command.COEFFS: _run_coeffs,
    Command.VERIFY: _run_verify,
}


def run_job(config: JobConfig, out: Callable[[str], None] = typer.echo) -> int:
    """
    执行一次命令

    Args:
        config: 命令配置
        out: 结果输出函数

    Returns:
        int: 退出码
    """
    try:
        return _HANDLERS[config.command](config, out)
    except NotPositiveSemidefiniteError as e:
        logger.error(f"❌ {e}")
        return EXIT_FAILED
    except GaussMomentError as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE


def _execute(**fields) -> None:
    try:
        config = JobConfig(**fields)
    except ValidationError as e:
        logger.error(f"❌ 参数错误: {e}")
        raise typer.Exit(EXIT_USAGE)
    code = run_job(config)
    if code:
        raise typer.Exit(code)

# ==================== typer 应用 ====================

app = typer.Typer(add_completion=False, help="多元高斯乘积期望的符号展开与交叉验证")


def _configure_logging(verbose: bool) -> None:
    logger.remove()
    logger.add(lambda message: typer.echo(message, err=True, nl=False),
               level="DEBUG" if verbose else "WARNING",
               format="{level: <8} | {message}")


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="输出调试日志")) -> None:
    _configure_logging(verbose)


@app.command()
def expand(
    n: Optional[str] = typer.Argument(None, help="多重指标，例如 1,2"),
    zero_mean: bool = typer.Option(False, "--zero-mean", help="只保留不含 mu 的项"),
    uncorrelated: bool = typer.Option(False, "--uncorrelated", help="不相关分量的展开"),
    max_order: Optional[int] = typer.Option(None, "--max-order", help="导数总阶上限"),
    input_path: Optional[Path] = typer.Option(None, "--input", help="重新渲染已保存的展开式 JSON"),
    term_cap: Optional[int] = typer.Option(None, "--term-cap", help="原始项数上限"),
    output_format: OutputFormat = typer.Option(OutputFormat.JSON, "--format", help="json 或 text"),
) -> None:
    """生成 E[g(X) prod X_i^{n_i}] 的符号展开"""
    _execute(command=Command.EXPAND, n=n, zero_mean=zero_mean, uncorrelated=uncorrelated,
             max_order=max_order, input_path=input_path, term_cap=term_cap, output_format=output_format)


@app.command()
def moment(
    n: str = typer.Argument(..., help="多重指标，例如 2,2"),
    spec_path: Optional[Path] = typer.Option(None, "--spec", help="高斯参数 JSON"),
    g_path: Optional[Path] = typer.Option(None, "--g", help="多项式 g 的 JSON"),
    output_format: OutputFormat = typer.Option(OutputFormat.JSON, "--format", help="无 --spec 时的输出格式"),
) -> None:
    """乘积矩 E[g(X) X^n]；无 --spec 时输出符号闭式"""
    _execute(command=Command.MOMENT, n=n, spec_path=spec_path, g_path=g_path, output_format=output_format)


@app.command()
def isserlis(
    n_dim: int = typer.Argument(..., help="维度 N"),
    spec_path: Optional[Path] = typer.Option(None, "--spec", help="零均值高斯参数 JSON"),
    output_format: OutputFormat = typer.Option(OutputFormat.JSON, "--format", help="无 --spec 时的输出格式"),
) -> None:
    """E[X_1 ... X_N] 的配对求和"""
    _execute(command=Command.ISSERLIS, n_dim=n_dim, spec_path=spec_path, output_format=output_format)


@app.command()
def coeffs(
    table: CoeffTable = typer.Argument(..., help="H、G 或 He"),
    max_l: int = typer.Option(..., "--max", help="最大的 l"),
) -> None:
    """打印系数表"""
    _execute(command=Command.COEFFS, table=table, max_l=max_l)


@app.command()
def verify(
    g_path: Path = typer.Option(..., "--g", help="多项式 g 的 JSON"),
    n: str = typer.Option(..., "--n", help="多重指标，例如 1,2"),
    spec_path: Path = typer.Option(..., "--spec", help="高斯参数 JSON"),
    engines: str = typer.Option("expand,song-lee", "--engines", help="逗号分隔的引擎列表"),
    engine: Optional[List[str]] = typer.Option(None, "--engine", help="可重复，追加到 --engines 的列表之后"),
    seed: Optional[int] = typer.Option(None, "--seed", help="蒙特卡洛种子"),
    samples: Optional[int] = typer.Option(None, "--samples", help="蒙特卡洛样本数"),
    workers: Optional[int] = typer.Option(None, "--workers", help="蒙特卡洛线程数"),
    term_cap: Optional[int] = typer.Option(None, "--term-cap", help="原始项数上限"),
    induction: bool = typer.Option(False, "--induction", help="检查归纳步恒等式"),
) -> None:
    """用多个独立引擎计算同一期望并比较"""
    names = ",".join([engines, *engine]) if engine else engines
    try:
        kinds = [] if induction else VerificationCoordinator.parse_engines(names)
    except InvalidInputError as e:
        logger.error(f"❌ {e}")
        raise typer.Exit(EXIT_USAGE)
    _execute(command=Command.VERIFY, n=n, g_path=g_path, spec_path=spec_path, engines=kinds,
             seed=seed, samples=samples, workers=workers, term_cap=term_cap, induction=induction)


if __name__ == "__main__":
    app()
