import pytest

from vshape.dependencies import get_settings
from vshape.models import Mode
from vshape.schemas import Config
from vshape.services.lang import parse
from vshape.services.machine import Machine, prepare
from vshape.services.tables import Runtime

# 테스트용 머신 스텝 제한
TEST_STEP_LIMIT = 10**8

ALL_MODES = (Mode.NONE, Mode.MANUAL, Mode.AUTO)


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch):
    # 환경 변수 기본값은 테스트마다 새로 읽기
    for name in ("VSHAPE_STEP_LIMIT", "VSHAPE_MODE", "VSHAPE_THRESHOLD", "VSHAPE_MAX_SIZE", "VSHAPE_MAX_DEPTH"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rt():
    return Runtime()


@pytest.fixture
def run_program():
    """소스 텍스트를 새 Runtime에서 실행 -> (결과 값, Runtime, Machine)"""

    def _run(text: str, mode: Mode = Mode.AUTO, **overrides):
        rt = Runtime(Config(mode=mode, **overrides))
        machine = Machine(rt, prepare(rt, parse(text)), TEST_STEP_LIMIT)
        return machine.run(), rt, machine

    return _run
