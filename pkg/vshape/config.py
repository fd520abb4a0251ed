from typing import Optional

from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .models import Mode
from .schemas import Config

# .env 로드
load_dotenv()


class Settings(BaseSettings):
    """
    환경 변수 설정 (접두사 VSHAPE_)
    - VSHAPE_STEP_LIMIT: 머신 스텝 제한 (비우면 무제한)
    - VSHAPE_LOG_LEVEL: 로그 레벨 (기본 WARNING)
    - VSHAPE_MODE / VSHAPE_THRESHOLD / VSHAPE_MAX_SIZE / VSHAPE_MAX_DEPTH: CLI 옵션이 없을 때의 기본값
    """
    step_limit: Optional[int] = Field(None, ge=1)
    log_level: str = "WARNING"
    mode: Mode = Mode.AUTO
    threshold: Optional[int] = Field(17, ge=0)
    max_size: int = Field(7, ge=0)
    max_depth: int = Field(7, ge=0)

    model_config = SettingsConfigDict(env_prefix="VSHAPE_", extra="ignore")

    @field_validator("step_limit", "threshold", mode="before")
    @classmethod
    def _blank_or_inf(cls, value):
        # "inf" / 빈 값은 제한 없음
        if isinstance(value, str) and value.strip().lower() in ("", "inf", "none"):
            return None
        return value

    def default_config(self) -> Config:
        return Config(
            max_size=self.max_size,
            max_depth=self.max_depth,
            threshold=self.threshold,
            mode=self.mode,
        )
