"""
벤치마크 명령 (vshape bench NAME | --all)
"""
import csv
import logging
import sys
from typing import List, Optional

import click
import orjson
import typer
from rich.console import Console
from rich.table import Table

from ..dependencies import build_invocation, configure_logging, get_step_limit
from ..exceptions import VShapeError
from ..models import BenchmarkName, Mode, OutputFormat
from ..schemas import CSV_HEADER, BaseResponse, BenchReport
from ..services.bench import DEFAULT_SIZES, resolve_name, run_benchmark, sweep, tree_depth_for

logger = logging.getLogger(__name__)


def _parse_sizes(text: str) -> List[int]:
    try:
        sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise typer.BadParameter(f"쉼표로 구분한 정수 목록이 필요합니다: {text}", param_hint="--sweep") from None
    if not sizes or min(sizes) < 1:
        raise typer.BadParameter("크기는 1 이상이어야 합니다", param_hint="--sweep")
    return sizes


def _size_for(bench: BenchmarkName, size: Optional[int], depth: Optional[int], single: bool) -> int:
    # tree의 크기는 깊이: 단일 실행이면 --size, --all이면 --depth
    if bench == BenchmarkName.TREE:
        chosen = size if single else depth
        return chosen if chosen is not None else DEFAULT_SIZES[bench]
    return size if size is not None else DEFAULT_SIZES[bench]


def render_json(response: BaseResponse) -> str:
    return orjson.dumps(response.model_dump(mode="json"), option=orjson.OPT_INDENT_2).decode()


def render_csv(reports: List[BenchReport]) -> None:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for report in reports:
        writer.writerow(report.csv_row())


def render_table(reports: List[BenchReport]) -> None:
    table = Table(title="vshape bench")
    for column in (
        "benchmark", "mode", "size", "repeat", "wall_ms", "objects", "slots",
        "reifications", "shapes", "rules", "retained_cells", "chunk", "checksum",
    ):
        table.add_column(column, justify="left" if column in ("benchmark", "mode") else "right")
    for r in reports:
        table.add_row(
            r.benchmark, r.mode.value, str(r.size), str(r.repeat), f"{r.wall_time_ms:.1f}",
            str(r.objects_allocated), str(r.slots_allocated), str(r.reifications),
            str(r.shapes_created), str(r.rules_created), str(r.retained.total_cells),
            "-" if r.dominant_width is None else str(r.dominant_width), str(r.result_checksum),
        )
    Console().print(table)


def bench_command(
    name: Optional[str] = typer.Argument(None, help="append | filter | map | reverse | tree | arith"),
    run_all: bool = typer.Option(False, "--all", help="모든 벤치마크 실행"),
    size: Optional[int] = typer.Option(None, "--size", min=1, help="리스트 길이 (tree는 깊이)"),
    depth: Optional[int] = typer.Option(None, "--depth", min=1, help="--all에서 tree 깊이 (기본 18)"),
    mode: Optional[Mode] = typer.Option(None, "--mode", help="none | manual | auto"),
    threshold: Optional[str] = typer.Option(None, "--threshold", help="규칙 생성 임계값 (inf = 무한대)"),
    max_size: Optional[int] = typer.Option(None, "--max-size", min=0),
    max_depth: Optional[int] = typer.Option(None, "--max-depth", min=0),
    seal_after: Optional[int] = typer.Option(None, "--seal-after", min=0),
    repeats: int = typer.Option(1, "--repeats", min=1, help="반복 횟수 (반복마다 새 Runtime)"),
    output_format: OutputFormat = typer.Option(OutputFormat.TEXT, "--format", help="text | csv | json"),
    parallel: bool = typer.Option(False, "--parallel", help="반복을 프로세스 풀에서 동시에 실행"),
    sweep_sizes: Optional[str] = typer.Option(None, "--sweep", help="크기 목록 (예: 100,1000,10000), 세 모드 모두 실행"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """내장 벤치마크를 실행하고 반복마다 한 행씩 결과를 출력합니다."""
    configure_logging(verbose)
    if run_all == (name is not None):
        raise click.UsageError("벤치마크 이름 또는 --all 중 하나만 지정하세요")

    try:
        names = list(BenchmarkName) if run_all else [resolve_name(name)]
        invocation = build_invocation(
            "bench", name, mode, threshold, max_size, max_depth,
            output_format=output_format, repeats=repeats, seal_after=seal_after,
        )
        config = invocation.to_config()
        step_limit = get_step_limit()
        sizes = _parse_sizes(sweep_sizes) if sweep_sizes else None

        reports: List[BenchReport] = []
        for bench in names:
            if sizes:
                # tree의 크기는 깊이: 목록 값을 노드 수로 보고 깊이로 변환
                bench_sizes = [tree_depth_for(s) for s in sizes] if bench == BenchmarkName.TREE else sizes
                reports += sweep(bench, bench_sizes, config, repeats, step_limit)
            else:
                reports += run_benchmark(
                    bench,
                    _size_for(bench, size, depth, single=not run_all),
                    config=config,
                    repeats=repeats,
                    parallel=parallel,
                    step_limit=step_limit,
                )
    except VShapeError as e:
        if output_format == OutputFormat.JSON:
            typer.echo(render_json(BaseResponse.fail_res(message=e.message, code=e.exit_code)))
        raise

    # 출력
    if output_format == OutputFormat.CSV:
        render_csv(reports)
    elif output_format == OutputFormat.JSON:
        data = [report.model_dump(mode="json") for report in reports]
        typer.echo(render_json(BaseResponse.success_res(data=data, message=f"{len(reports)}개 결과")))
    else:
        render_table(reports)
