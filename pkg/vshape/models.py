import enum


# 1. 최적화 모드
class Mode(str, enum.Enum):
    NONE = "none"        # 최적화 끔 (항상 기본 shape)
    MANUAL = "manual"    # 미리 심어 둔 규칙만 사용
    AUTO = "auto"        # history 기반 shape 인식


# 2. CLI 출력 형식
class OutputFormat(str, enum.Enum):
    TEXT = "text"
    CSV = "csv"
    JSON = "json"


# 3. 내장 벤치마크
class BenchmarkName(str, enum.Enum):
    APPEND = "append"
    FILTER = "filter"
    MAP = "map"
    REVERSE = "reverse"
    TREE = "tree"
    ARITH = "arith"  # 생성자 없는 산술 루프 (non-regression)
