from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Any, Generic, List, Literal, Optional, TypeVar

from .models import Mode, OutputFormat

# --- [공통 응답 규격] ---
T = TypeVar("T")


class BaseResponse(BaseModel, Generic[T]):
    success: bool
    code: int
    message: str
    data: Optional[T] = None

    @classmethod
    def success_res(cls, data: Any = None, message: str = "요청 처리 성공", code: int = 0):
        return cls(success=True, code=code, message=message, data=data)

    @classmethod
    def fail_res(cls, message: str = "요청 처리 실패", code: int = 1):
        return cls(success=False, code=code, message=message, data=None)


# --- [최적화 설정] ---

class Config(BaseModel):
    """
    shape 인식 / 인라이닝 파라미터
    - max_size: 인라이닝 결과 객체의 최대 슬롯 수 (0이면 최적화 비활성)
    - max_depth: 한 객체 안에 중첩될 수 있는 shape 수
    - threshold: 규칙 생성 임계값 (None = 무한대, 사실상 비활성)
    """
    max_size: int = Field(7, ge=0, description="최대 객체 크기 (슬롯)")
    max_depth: int = Field(7, ge=0, description="최대 shape 깊이")
    threshold: Optional[int] = Field(17, ge=0, description="규칙 생성 임계값")
    mode: Mode = Field(Mode.AUTO, description="none | manual | auto")
    seal_after: Optional[int] = Field(
        None, ge=0, description="이 횟수만큼 생성한 뒤 history/규칙 테이블을 상수로 고정"
    )

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {"max_size": 7, "max_depth": 7, "threshold": 17, "mode": "auto"}
        },
    )


# --- [메모리 측정 결과] ---

class MemoryStats(BaseModel):
    """셀 모델: 박스 객체마다 shape 참조 1개 + 슬롯마다 1셀"""
    boxed_objects: int = Field(0, ge=0)
    storage_slots: int = Field(0, ge=0)
    shape_refs: int = Field(0, ge=0)
    total_cells: int = Field(0, ge=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_cells(self):
        if self.shape_refs != self.boxed_objects:
            raise ValueError("shape_refs는 boxed_objects와 같아야 합니다")
        if self.total_cells != self.storage_slots + self.shape_refs:
            raise ValueError("total_cells = storage_slots + shape_refs 이어야 합니다")
        return self

    @classmethod
    def from_counts(cls, boxed_objects: int, storage_slots: int) -> "MemoryStats":
        return cls(
            boxed_objects=boxed_objects,
            storage_slots=storage_slots,
            shape_refs=boxed_objects,
            total_cells=boxed_objects + storage_slots,
        )


# --- [벤치마크 결과] ---

CSV_HEADER = [
    "benchmark", "mode", "size", "threshold", "max_size", "max_depth", "repeat",
    "wall_ms", "objects", "slots", "reifications", "shapes", "rules",
    "retained_objects", "retained_slots", "retained_cells", "checksum",
]


class BenchReport(BaseModel):
    """벤치마크 1회 반복 결과 (wall_time_ms 외에는 반복 간 동일해야 함)"""
    benchmark: str
    mode: Mode
    size: int = Field(..., ge=0)
    config: Config
    repeat: int = Field(0, ge=0)
    wall_time_ms: float = Field(..., ge=0)
    objects_allocated: int = Field(..., ge=0)
    slots_allocated: int = Field(..., ge=0)
    reifications: int = Field(..., ge=0)
    shapes_created: int = Field(..., ge=0)
    rules_created: int = Field(..., ge=0)
    retained: MemoryStats
    result_checksum: int
    # CSV 스키마 밖의 보조 지표
    steps: int = Field(0, ge=0)
    peak_depth: int = Field(0, ge=0)
    dominant_width: Optional[int] = None

    def csv_row(self) -> List[str]:
        threshold = "inf" if self.config.threshold is None else str(self.config.threshold)
        return [
            self.benchmark,
            self.mode.value,
            str(self.size),
            threshold,
            str(self.config.max_size),
            str(self.config.max_depth),
            str(self.repeat),
            f"{self.wall_time_ms:.3f}",
            str(self.objects_allocated),
            str(self.slots_allocated),
            str(self.reifications),
            str(self.shapes_created),
            str(self.rules_created),
            str(self.retained.boxed_objects),
            str(self.retained.storage_slots),
            str(self.retained.total_cells),
            str(self.result_checksum),
        ]

    def stable_fields(self) -> dict:
        """시간과 반복 번호를 제외한 값 (결정성 비교용)"""
        return self.model_dump(exclude={"wall_time_ms", "repeat"})


# --- [CLI 호출 정보] ---

class CliInvocation(BaseModel):
    subcommand: Literal["run", "bench", "stats"]
    target: Optional[str] = Field(None, description="프로그램 파일 또는 벤치마크 이름 (--all이면 None)")
    mode: Mode = Mode.AUTO
    threshold: Optional[int] = Field(17, ge=0)
    max_size: int = Field(7, ge=0)
    max_depth: int = Field(7, ge=0)
    output_format: OutputFormat = OutputFormat.TEXT
    repeats: int = Field(1, ge=1)
    seal_after: Optional[int] = Field(None, ge=0)

    def to_config(self) -> Config:
        return Config(
            max_size=self.max_size,
            max_depth=self.max_depth,
            threshold=self.threshold,
            mode=self.mode,
            seal_after=self.seal_after,
        )
