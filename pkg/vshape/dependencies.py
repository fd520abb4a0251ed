import logging
from functools import lru_cache
from typing import Optional

import typer
from rich.console import Console
from rich.logging import RichHandler

from .config import Settings
from .models import Mode, OutputFormat
from .schemas import CliInvocation, Config
from .services.tables import Runtime

PACKAGE_LOGGER = "vshape"


@lru_cache
def get_settings() -> Settings:
    return Settings()


def get_runtime(config: Optional[Config] = None) -> Runtime:
    """명령 하나가 쓸 새 Runtime (Runtime끼리는 아무것도 공유하지 않음)"""
    return Runtime(config or get_settings().default_config())


def get_step_limit(default: Optional[int] = None) -> Optional[int]:
    # VSHAPE_STEP_LIMIT가 있으면 그 값이 우선
    settings = get_settings()
    return settings.step_limit if settings.step_limit is not None else default


def configure_logging(verbose: bool = False) -> None:
    """stderr로 가는 RichHandler 설치 (stdout은 결과 출력 전용)"""
    level = logging.DEBUG if verbose else get_settings().log_level.upper()
    logger = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(console=Console(stderr=True), show_path=False, markup=False)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level)


def parse_threshold(value: Optional[str]) -> Optional[int]:
    """--threshold 값 ("inf"는 무한대, 생략하면 설정 기본값)"""
    if value is None:
        return get_settings().threshold
    if value.strip().lower() == "inf":
        return None
    try:
        return int(value)
    except ValueError:
        raise typer.BadParameter(f"정수 또는 inf가 필요합니다: {value}", param_hint="--threshold") from None


def build_invocation(
    subcommand: str,
    target: Optional[str],
    mode: Optional[Mode] = None,
    threshold: Optional[str] = None,
    max_size: Optional[int] = None,
    max_depth: Optional[int] = None,
    output_format: OutputFormat = OutputFormat.TEXT,
    repeats: int = 1,
    seal_after: Optional[int] = None,
) -> CliInvocation:
    """CLI 옵션 + 환경 설정 기본값 -> 검증된 CliInvocation"""
    settings = get_settings()
    return CliInvocation(
        subcommand=subcommand,
        target=target,
        mode=mode or settings.mode,
        threshold=parse_threshold(threshold),
        max_size=settings.max_size if max_size is None else max_size,
        max_depth=settings.max_depth if max_depth is None else max_depth,
        output_format=output_format,
        repeats=repeats,
        seal_after=seal_after,
    )
