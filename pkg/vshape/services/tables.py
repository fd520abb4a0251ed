"""
history 히스토그램과 변환 규칙 테이블, 그리고 shape 인식
- history: (shape, 슬롯 위치, 하위 shape) 조합이 생성 시점에 관찰된 횟수
- 규칙: (shape, 슬롯 위치, 하위 shape) -> 병합된 shape (추가만 가능)
- Runtime 하나와 그 테이블들은 단일 스레드 단위입니다. 서로 다른 Runtime은 아무것도 공유하지 않습니다.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Set, Tuple

from ..exceptions import UnknownClassError
from ..models import Mode
from ..schemas import Config
from .shapes import ClassDescriptor, Shape, ShapeRegistry, child_region

logger = logging.getLogger(__name__)

Key = Tuple[Shape, int, Shape]


def _key_order(key: Key) -> Tuple[int, int, int]:
    shape, pos, sub = key
    return shape.index, pos, sub.index


def format_key(key: Key) -> str:
    shape, pos, sub = key
    return f"({shape.label()}, {pos}, {sub.label()})"


class HistoryTable:
    """생성 시점에 관찰된 하위 shape 히스토그램"""

    def __init__(self):
        self._counts: Dict[Key, int] = {}
        self._frozen: Set[Key] = set()

    def record(self, key: Key) -> int:
        if key in self._frozen:
            return self._counts[key]
        count = self._counts.get(key, 0) + 1
        self._counts[key] = count
        return count

    def count(self, key: Key) -> int:
        return self._counts.get(key, 0)

    def freeze(self, key: Key) -> None:
        self._frozen.add(key)

    def is_frozen(self, key: Key) -> bool:
        return key in self._frozen

    def rows(self) -> List[Tuple[Key, int, bool]]:
        """키 순서로 정렬된 (키, 횟수, frozen 여부)"""
        return [
            (key, self._counts[key], key in self._frozen)
            for key in sorted(self._counts, key=_key_order)
        ]

    def __len__(self) -> int:
        return len(self._counts)

    def __contains__(self, key: Key) -> bool:
        return key in self._counts


class RuleTable:
    """변환 규칙 (추가만 가능, 덮어쓰기/삭제 없음)"""

    def __init__(self):
        self._rules: Dict[Key, Shape] = {}
        self._seeded: Set[Key] = set()

    def add(self, key: Key, target: Shape, seeded: bool = False) -> bool:
        if key in self._rules:
            return False
        self._rules[key] = target
        if seeded:
            self._seeded.add(key)
        return True

    def get(self, key: Key) -> Optional[Shape]:
        return self._rules.get(key)

    def get_seeded(self, key: Key) -> Optional[Shape]:
        if key not in self._seeded:
            return None
        return self._rules[key]

    def is_seeded(self, key: Key) -> bool:
        return key in self._seeded

    def rows(self) -> List[Tuple[Key, Shape]]:
        return [(key, self._rules[key]) for key in sorted(self._rules, key=_key_order)]

    def items(self) -> Iterator[Tuple[Key, Shape]]:
        return iter(self._rules.items())

    def __len__(self) -> int:
        return len(self._rules)

    def __contains__(self, key: Key) -> bool:
        return key in self._rules


@dataclass(slots=True)
class Counters:
    objects_allocated: int = 0
    slots_allocated: int = 0
    reifications: int = 0
    constructions: int = 0
    restarts: int = 0
    field_reads: int = 0


class Runtime:
    """
    shape 레지스트리, history, 규칙 테이블, 설정, 카운터를 소유하는 격리 단위
    """

    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config()
        self.registry = ShapeRegistry()
        self.history = HistoryTable()
        self.rules = RuleTable()
        self.counters = Counters()
        # shape별 생성 횟수 / 인라이닝 donor로 쓰인 횟수
        self.constructed: Counter = Counter()
        self.donated: Counter = Counter()
        self.rejected: Set[Key] = set()
        self.sealed = False
        # 비교 연산 결과용 (False/0, True/0) 객체, 처음 필요할 때 생성
        self.booleans: Optional[tuple] = None

    @property
    def mode(self) -> Mode:
        return self.config.mode

    @property
    def recognizing(self) -> bool:
        return self.config.mode == Mode.AUTO and not self.sealed

    @property
    def shapes_created(self) -> int:
        return self.registry.shapes_created

    @property
    def rules_created(self) -> int:
        return len(self.rules)

    def seal(self) -> None:
        """history 기록과 규칙 생성을 멈추고 테이블을 상수로 취급"""
        if not self.sealed:
            self.sealed = True
            logger.info(
                f"테이블 고정: 생성 {self.counters.constructions}회, 규칙 {len(self.rules)}개"
            )

    def __repr__(self) -> str:
        return (
            f"<Runtime mode={self.config.mode.value} shapes={self.shapes_created} "
            f"rules={len(self.rules)} history={len(self.history)}>"
        )


# --- [shape 인식 연산] ---

def _admissible(rt: Runtime, width: int, depth: int) -> bool:
    # max_size 0은 최적화 비활성
    config = rt.config
    return 0 < config.max_size and width <= config.max_size and depth <= config.max_depth


def record_history(rt: Runtime, s: Shape, pos: int, sub: Shape) -> int:
    """(s, pos, sub) 관찰 횟수를 1 올리고 새 값을 반환 (frozen 키는 그대로 반환)"""
    return rt.history.record((s, pos, sub))


def maybe_create_rule(rt: Runtime, s: Shape, pos: int, sub: Shape) -> bool:
    """
    임계값에 도달한 history 항목을 변환 규칙으로 바꿉니다.

    Returns:
        규칙이 새로 생성되었으면 True
    """
    # auto 모드에서 고정 전에만 규칙 생성
    if not rt.recognizing:
        return False
    key = (s, pos, sub)
    if key in rt.rules or key in rt.rejected:
        return False

    threshold = rt.config.threshold
    if threshold is None or rt.history.count(key) < threshold:
        return False

    width, depth = rt.registry.merged_bounds(s, pos, sub)
    if not _admissible(rt, width, depth):
        rt.rejected.add(key)
        logger.debug(f"규칙 후보 거부: {format_key(key)} width={width} depth={depth}")
        return False

    target = rt.registry.merge_shape(s, pos, sub)
    rt.rules.add(key, target)
    rt.history.freeze(key)
    logger.info(f"변환 규칙 생성: {format_key(key)} -> {target.label()} {target.structure()}")
    return True


def lookup_rule(rt: Runtime, s: Shape, pos: int, sub: Shape) -> Optional[Shape]:
    if rt.config.mode == Mode.NONE:
        return None
    if rt.config.mode == Mode.MANUAL:
        return rt.rules.get_seeded((s, pos, sub))
    return rt.rules.get((s, pos, sub))


def seed_linear_rules(rt: Runtime, cls: ClassDescriptor, field: int, levels: int) -> int:
    """
    클래스 자신의 기본 shape를 field 위치에 반복해서 인라이닝하는 규칙 사슬을 미리 심습니다.
    - 단계 k 규칙: (기본 shape, field 오프셋, chain_k) -> chain_k+1
    - max_size / max_depth를 넘는 단계에서 멈춥니다.

    Returns:
        허용된 규칙 수
    """
    registry = rt.registry
    if registry.lookup_class(cls.name, cls.arity) is None:
        raise UnknownClassError(f"등록되지 않은 클래스: {cls}")

    base = registry.default_shape(cls)
    offset, _ = child_region(base, field)

    previous = base
    admissible = 0
    for _ in range(levels):
        width, depth = registry.merged_bounds(base, offset, previous)
        if not _admissible(rt, width, depth):
            break
        target = registry.merge_shape(base, offset, previous)
        rt.rules.add((base, offset, previous), target, seeded=True)
        previous = target
        admissible += 1

    if admissible:
        logger.info(f"규칙 시드: {cls} field={field} -> {admissible}개 (최대 width {previous.width})")
    return admissible


def seed_all_fields(rt: Runtime, classes: List[ClassDescriptor]) -> int:
    """manual 모드 기본 정책: arity >= 1인 모든 클래스의 모든 필드에 규칙 사슬을 심습니다."""
    total = 0
    levels = rt.config.max_size
    for cls in classes:
        for field in range(cls.arity):
            total += seed_linear_rules(rt, cls, field, levels)
    return total
