"""
vshape 공통 예외 정의
- CLI는 exit_code 값을 그대로 프로세스 종료 코드로 사용합니다.
"""
from typing import Optional


class VShapeError(Exception):
    """모든 vshape 오류의 기본 클래스"""
    exit_code: int = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# --- [파싱 / 검증 오류: exit 2] ---

class ParseError(VShapeError):
    exit_code = 2

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        if line:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class ValidationError(VShapeError):
    """정의되지 않은 변수 참조"""
    exit_code = 2

    def __init__(self, message: str, name: Optional[str] = None, line: int = 0, col: int = 0):
        self.name = name
        self.line = line
        self.col = col
        if line:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


# --- [런타임 오류: exit 1] ---

class ShapeError(VShapeError, IndexError):
    pass


class UnknownClassError(VShapeError, KeyError):
    def __str__(self) -> str:
        return self.message


class ValueDefect(VShapeError):
    """저장소 길이 법칙 위반, 원시값 필드 접근, 인자 개수 불일치"""
    pass


class MachineError(VShapeError):
    pass


class MatchFailure(MachineError):
    pass


class NotAFunction(MachineError):
    pass


class PrimopTypeError(MachineError):
    pass


class ArityError(MachineError):
    pass


class UndefinedGlobal(MachineError):
    pass


class StepLimitExceeded(MachineError):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"스텝 제한 초과: {limit}")


# --- [사용법 오류: exit 3] ---

class UnknownBenchmarkError(VShapeError):
    exit_code = 3
