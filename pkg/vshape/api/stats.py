"""
Runtime 상태 덤프 명령 (vshape stats FILE)
"""
from typing import Optional

import typer

from ..dependencies import build_invocation, configure_logging
from ..models import Mode
from ..services.stats import dump_stats
from .run import execute_file


def stats_command(
    file: str = typer.Argument(..., help="실행할 .vs 프로그램"),
    mode: Optional[Mode] = typer.Option(None, "--mode", help="none | manual | auto"),
    threshold: Optional[str] = typer.Option(None, "--threshold", help="규칙 생성 임계값 (inf = 무한대)"),
    max_size: Optional[int] = typer.Option(None, "--max-size", min=0),
    max_depth: Optional[int] = typer.Option(None, "--max-depth", min=0),
    seal_after: Optional[int] = typer.Option(None, "--seal-after", min=0),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """프로그램을 실행한 뒤 shape 레지스트리, 규칙 테이블, history를 출력합니다."""
    configure_logging(verbose)
    invocation = build_invocation(
        "stats", file, mode, threshold, max_size, max_depth, seal_after=seal_after
    )
    _, rt, _ = execute_file(file, invocation.to_config())
    typer.echo(dump_stats(rt), nl=False)
