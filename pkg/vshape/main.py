import logging
import sys
from typing import List, Optional

import click
import pydantic
import typer

from .api import bench, run, stats
from .exceptions import VShapeError

logger = logging.getLogger(__name__)

# 종료 코드
EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 3

app = typer.Typer(
    name="vshape",
    help="적응형 값 객체 압축 런타임: 프로그램 실행, 벤치마크, shape 통계",
    add_completion=False,
    no_args_is_help=True,
)

# 명령 등록
app.command("run")(run.run_command)
app.command("bench")(bench.bench_command)
app.command("stats")(stats.stats_command)


def main(argv: Optional[List[str]] = None) -> int:
    """
    CLI 진입점

    Returns:
        0 성공, 1 실행 오류, 2 파싱/검증 오류, 3 사용법 오류
    """
    args = sys.argv[1:] if argv is None else list(argv)
    try:
        result = app(args=args, prog_name="vshape", standalone_mode=False)
    except click.UsageError as e:
        click.echo(e.format_message(), err=True)
        return EXIT_USAGE
    except pydantic.ValidationError as e:
        click.echo(f"잘못된 옵션 값: {e}", err=True)
        return EXIT_USAGE
    except VShapeError as e:
        logger.debug(f"{type(e).__name__}", exc_info=True)
        click.echo(f"error: {e.message}", err=True)
        return e.exit_code
    except click.exceptions.Abort:
        return EXIT_RUNTIME
    # --help 등은 click이 종료 코드를 돌려줌
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
