"""
프로그램 실행 명령 (vshape run FILE)
"""
import logging
from typing import Any, Optional, Tuple

import typer

from ..dependencies import build_invocation, configure_logging, get_runtime, get_step_limit
from ..models import Mode
from ..schemas import Config
from ..services.lang import parse_file
from ..services.machine import Machine, prepare
from ..services.stats import dump_stats
from ..services.tables import Runtime
from ..services.values import show

logger = logging.getLogger(__name__)


def execute_file(path: str, config: Config) -> Tuple[Any, Runtime, Machine]:
    # 1. 파일 읽기 + 파싱 (실패하면 exit 2)
    program = parse_file(path)

    # 2. 새 Runtime에 클래스 등록, manual 모드면 규칙 시드
    rt = get_runtime(config)
    machine = Machine(rt, prepare(rt, program), get_step_limit())

    # 3. 실행
    value = machine.run()
    logger.info(
        f"실행 완료: {path} mode={config.mode.value} steps={machine.steps} "
        f"shapes={rt.shapes_created} rules={rt.rules_created}"
    )
    return value, rt, machine


def run_command(
    file: str = typer.Argument(..., help="실행할 .vs 프로그램"),
    mode: Optional[Mode] = typer.Option(None, "--mode", help="none | manual | auto"),
    threshold: Optional[str] = typer.Option(None, "--threshold", help="규칙 생성 임계값 (inf = 무한대)"),
    max_size: Optional[int] = typer.Option(None, "--max-size", min=0, help="최대 객체 크기 (슬롯)"),
    max_depth: Optional[int] = typer.Option(None, "--max-depth", min=0, help="최대 shape 깊이"),
    seal_after: Optional[int] = typer.Option(None, "--seal-after", min=0, help="이 횟수만큼 생성한 뒤 테이블 고정"),
    stats: bool = typer.Option(False, "--stats", help="결과 뒤에 shape/규칙/history 덤프"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="DEBUG 로그"),
):
    """프로그램을 실행하고 결과 값을 출력합니다."""
    configure_logging(verbose)
    invocation = build_invocation(
        "run", file, mode, threshold, max_size, max_depth, seal_after=seal_after
    )
    value, rt, _ = execute_file(file, invocation.to_config())
    typer.echo(show(value))
    if stats:
        typer.echo(dump_stats(rt), nl=False)

