"""
불변 값 객체
- 생성 시 변환 규칙에 따라 참조 객체를 인라이닝하고 (inline_fields),
  필드 접근 시 인라이닝된 영역을 새 객체로 되살립니다 (get_field).
- 원시값은 파이썬 int 그대로 사용합니다.
"""
import logging
from typing import Any, List, Optional, Sequence, Tuple, Union

from ..exceptions import ShapeError, ValueDefect
from ..models import Mode
from ..schemas import MemoryStats
from .shapes import ClassDescriptor, Shape
from .tables import Runtime, maybe_create_rule

logger = logging.getLogger(__name__)

CHECKSUM_MODULUS = (1 << 61) - 1


class Boxed:
    """shape 참조 + 평탄한 저장소. 생성 후 절대 변경하지 않습니다."""
    __slots__ = ("shape", "storage")

    def __init__(self, shape: Shape, storage: Tuple[Any, ...]):
        self.shape = shape
        self.storage = storage

    @property
    def cls(self) -> ClassDescriptor:
        return self.shape.cls

    def __repr__(self) -> str:
        return show(self)


Value = Union[int, Boxed]


def inline_fields(rt: Runtime, s: Shape, f: Sequence[Any]) -> Tuple[Shape, Tuple[Any, ...]]:
    """
    생성할 객체의 최종 shape와 저장소 결정

    Args:
        rt: 테이블과 카운터를 가진 Runtime
        s: 시작 shape (보통 클래스 기본 shape)
        f: width(s)개의 필드 값

    Returns:
        (최종 shape, 최종 저장소)
    """
    if len(f) != s.width:
        raise ValueDefect(f"필드 수 {len(f)}가 shape width {s.width}와 다릅니다")
    if rt.config.mode == Mode.NONE:
        return s, tuple(f)

    recognizing = rt.recognizing
    history = rt.history
    # manual 모드는 시드 규칙만 사용
    find_rule = rt.rules.get if rt.config.mode == Mode.AUTO else rt.rules.get_seeded
    threshold = rt.config.threshold

    fields = list(f)
    i = 0
    while i < len(fields):
        value = fields[i]
        if type(value) is Boxed:
            sub = value.shape
            key = (s, i, sub)
            if recognizing:
                count = history.record(key)
                if threshold is not None and count >= threshold:
                    maybe_create_rule(rt, s, i, sub)
            target = find_rule(key)
            if target is not None:
                # donor는 그대로 두고 저장소만 복사
                fields[i:i + 1] = value.storage
                rt.donated[sub] += 1
                rt.counters.restarts += 1
                s = target
                i = 0
                continue
        i += 1

    if len(fields) != s.width:
        raise ValueDefect(f"인라이닝 후 저장소 길이 {len(fields)} != width {s.width}")
    return s, tuple(fields)


def construct(rt: Runtime, cls: ClassDescriptor, fields: Sequence[Any]) -> Boxed:
    if len(fields) != cls.arity:
        raise ValueDefect(f"{cls} 생성 인자 개수 불일치: {len(fields)}")

    counters = rt.counters
    seal_after = rt.config.seal_after
    if seal_after is not None and counters.constructions >= seal_after:
        rt.seal()

    registry = rt.registry
    if registry.lookup_class(cls.name, cls.arity) is None:
        registry.intern_class(cls.name, cls.arity)

    shape, storage = inline_fields(rt, registry.default_shape(cls), fields)

    counters.constructions += 1
    counters.objects_allocated += 1
    counters.slots_allocated += shape.width
    rt.constructed[shape] += 1
    return Boxed(shape, storage)


def get_field(rt: Runtime, v: Any, field: int) -> Any:
    """언어 수준 필드 읽기. 인라이닝된 영역이면 새 객체로 reify합니다."""
    if type(v) is not Boxed:
        raise ValueDefect(f"원시값에는 필드가 없습니다: {show(v)}")
    shape = v.shape
    if not 0 <= field < shape.cls.arity:
        raise ShapeError(f"필드 인덱스 범위 초과: {field} ({shape.cls})")

    counters = rt.counters
    counters.field_reads += 1
    offset = shape.offsets[field]
    child = shape.children[field]
    if child.cls is None:
        return v.storage[offset]

    counters.reifications += 1
    counters.objects_allocated += 1
    return Boxed(child, v.storage[offset:offset + child.width])


def field_view(v: Boxed, field: int) -> Any:
    """카운터를 건드리지 않는 get_field (출력/비교용)"""
    shape = v.shape
    offset = shape.offsets[field]
    child = shape.children[field]
    if child.cls is None:
        return v.storage[offset]
    return Boxed(child, v.storage[offset:offset + child.width])


def structural_eq(a: Any, b: Any) -> bool:
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x_boxed = type(x) is Boxed
        if x_boxed != (type(y) is Boxed):
            return False
        if not x_boxed:
            if isinstance(x, int) and isinstance(y, int):
                if x != y:
                    return False
            elif x is not y:
                return False
            continue
        if x is y:
            continue
        if x.shape.cls != y.shape.cls:
            return False
        if x.shape is y.shape:
            # 같은 shape면 슬롯 단위 비교와 필드 단위 비교가 같음
            stack.extend(zip(x.storage, y.storage))
        else:
            stack.extend((field_view(x, j), field_view(y, j)) for j in range(x.shape.cls.arity))
    return True


def measure(root: Any) -> MemoryStats:
    """root에서 도달 가능한 박스 객체 그래프의 셀 수 (공유 객체는 한 번만)"""
    seen = set()
    objects = 0
    slots = 0
    stack = [root]
    while stack:
        v = stack.pop()
        if type(v) is not Boxed or id(v) in seen:
            continue
        seen.add(id(v))
        objects += 1
        slots += len(v.storage)
        stack.extend(x for x in v.storage if type(x) is Boxed)
    return MemoryStats.from_counts(objects, slots)


def checksum(root: Any) -> int:
    """
    언어 수준 전위 순회 순서의 정수 fold (mod 2^61-1)
    - 저장소 슬롯 순서가 곧 전위 순서이므로 reify 없이 저장소를 순회합니다.
    """
    acc = 0
    stack = [root]
    while stack:
        v = stack.pop()
        if type(v) is Boxed:
            stack.extend(reversed(v.storage))
        elif isinstance(v, int):
            acc = (acc * 31 + v) % CHECKSUM_MODULUS
    return acc


def show(v: Any, limit: Optional[int] = None) -> str:
    """
    출력 형식: 원시값은 10진수, 객체는 Name[f0, f1, ...] (언어 수준 뷰)
    - limit: 이 글자 수를 넘으면 "..."으로 자르기 (오류 메시지용)
    """
    out: List[str] = []
    stack: List[Any] = [v]
    length = 0
    while stack:
        if limit is not None and length > limit:
            return "".join(out)[:limit] + "..."
        item = stack.pop()
        if type(item) is str:
            out.append(item)
            length += len(item)
        elif type(item) is Boxed:
            cls = item.shape.cls
            out.append(f"{cls.name}[")
            length += len(cls.name) + 1
            stack.append("]")
            for j in reversed(range(cls.arity)):
                stack.append(field_view(item, j))
                if j:
                    stack.append(", ")
        else:
            text = str(item)
            out.append(text)
            length += len(text)
    return "".join(out)
