"""
값 클래스(ClassDescriptor)와 interning된 shape 트리
- shape는 값 객체의 압축 레이아웃을 설명하는 트리이며, 리프(▼)는 직접 접근 슬롯입니다.
- 구조가 같은 shape는 레지스트리 안에서 항상 같은 인스턴스입니다 (테이블 키는 identity 비교).
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

from ..exceptions import ShapeError, UnknownClassError

logger = logging.getLogger(__name__)

LEAF_MARK = "▼"


@dataclass(frozen=True, slots=True)
class ClassDescriptor:
    """이름과 arity로 식별되는 값 클래스 (예: Node/2)"""
    name: str
    arity: int

    def __str__(self) -> str:
        return f"{self.name}/{self.arity}"


@dataclass(frozen=True, slots=True, eq=False)
class Shape:
    """
    interning된 shape 노드
    - cls가 None이면 리프(직접 접근 shape), 아니면 compound
    - width/depth/offsets/leaf_levels는 생성 시 계산되는 캐시
    """
    cls: Optional[ClassDescriptor]
    children: Tuple["Shape", ...]
    width: int
    depth: int
    offsets: Tuple[int, ...]      # 필드별 저장소 오프셋
    leaf_levels: Tuple[int, ...]  # 슬롯별 리프를 감싸는 compound 노드 수
    nodes: int                    # compound 노드 수
    index: int                    # 레지스트리 생성 순번 (리프는 0)

    @property
    def is_leaf(self) -> bool:
        return self.cls is None

    def structure(self) -> str:
        if self.cls is None:
            return LEAF_MARK
        inner = ", ".join(child.structure() for child in self.children)
        return f"{self.cls.name}[{inner}]"

    def label(self) -> str:
        return LEAF_MARK if self.cls is None else f"s{self.index}"

    def __repr__(self) -> str:
        return f"<Shape {self.label()} {self.structure()}>"


class ShapeRegistry:
    """
    Runtime 하나에 속한 클래스/shape 레지스트리
    - 전역이 아니므로 서로 다른 Runtime은 학습한 레이아웃을 공유하지 않습니다.
    """

    def __init__(self):
        self.leaf = Shape(
            cls=None, children=(), width=1, depth=0, offsets=(),
            leaf_levels=(0,), nodes=0, index=0,
        )
        self._classes: Dict[Tuple[str, int], ClassDescriptor] = {}
        self._defaults: Dict[ClassDescriptor, Shape] = {}
        self._interned: Dict[Tuple[ClassDescriptor, Tuple[Shape, ...]], Shape] = {}
        self._shapes: List[Shape] = []

    # --- [클래스] ---

    def intern_class(self, name: str, arity: int) -> ClassDescriptor:
        if not name:
            raise ShapeError("클래스 이름이 비어 있습니다")
        if arity < 0:
            raise ShapeError(f"arity는 음수일 수 없습니다: {name}/{arity}")

        key = (name, arity)
        cls = self._classes.get(key)
        if cls is None:
            cls = ClassDescriptor(name, arity)
            self._classes[key] = cls
            self._defaults[cls] = self.intern(cls, (self.leaf,) * arity)
        return cls

    def lookup_class(self, name: str, arity: int) -> Optional[ClassDescriptor]:
        return self._classes.get((name, arity))

    @property
    def classes(self) -> List[ClassDescriptor]:
        return list(self._classes.values())

    def default_shape(self, cls: ClassDescriptor) -> Shape:
        shape = self._defaults.get(cls)
        if shape is None:
            raise UnknownClassError(f"등록되지 않은 클래스: {cls}")
        return shape

    # --- [shape interning] ---

    def intern(self, cls: ClassDescriptor, children: Tuple[Shape, ...]) -> Shape:
        if len(children) != cls.arity:
            raise ShapeError(f"{cls}의 하위 shape 개수가 맞지 않습니다: {len(children)}")

        key = (cls, children)
        shape = self._interned.get(key)
        if shape is not None:
            return shape

        offsets = []
        levels: List[int] = []
        width = 0
        for child in children:
            offsets.append(width)
            width += child.width
            levels.extend(level + 1 for level in child.leaf_levels)

        shape = Shape(
            cls=cls,
            children=children,
            width=width,
            depth=1 + max((child.depth for child in children), default=0),
            offsets=tuple(offsets),
            leaf_levels=tuple(levels),
            nodes=1 + sum(child.nodes for child in children),
            index=len(self._shapes) + 1,
        )
        self._interned[key] = shape
        self._shapes.append(shape)
        logger.debug(f"shape 등록: {shape.label()} {shape.structure()}")
        return shape

    def merged_bounds(self, s: Shape, pos: int, sub: Shape) -> Tuple[int, int]:
        """merge_shape 결과의 (width, depth)를 shape를 만들지 않고 계산"""
        _check_merge_args(s, pos, sub)
        width = s.width - 1 + sub.width
        depth = max(s.depth, s.leaf_levels[pos] + sub.depth)
        return width, depth

    def merge_shape(self, s: Shape, pos: int, sub: Shape) -> Shape:
        """평탄화된 슬롯 pos의 리프를 sub로 치환한 shape"""
        _check_merge_args(s, pos, sub)
        return self._substitute(s, pos, sub)

    def _substitute(self, s: Shape, pos: int, sub: Shape) -> Shape:
        for j, (child, offset) in enumerate(zip(s.children, s.offsets)):
            if offset <= pos < offset + child.width:
                if child.cls is None:
                    replaced = sub
                else:
                    replaced = self._substitute(child, pos - offset, sub)
                return self.intern(s.cls, s.children[:j] + (replaced,) + s.children[j + 1:])
        # 슬롯과 리프는 일대일이므로 여기 도달하지 않음
        raise ShapeError(f"슬롯 {pos}에 해당하는 리프가 없습니다: {s.structure()}")

    # --- [조회] ---

    @property
    def shapes(self) -> List[Shape]:
        """생성 순서대로의 compound shape 목록"""
        return list(self._shapes)

    @property
    def shapes_created(self) -> int:
        return len(self._shapes)

    def __iter__(self) -> Iterator[Shape]:
        return iter(self._shapes)

    def __len__(self) -> int:
        return len(self._shapes)


def _check_merge_args(s: Shape, pos: int, sub: Shape) -> None:
    if s.cls is None:
        raise ShapeError("리프 shape에는 병합할 수 없습니다")
    if sub.cls is None:
        raise ShapeError("하위 shape는 compound여야 합니다")
    if not 0 <= pos < s.width:
        raise ShapeError(f"슬롯 위치 범위 초과: {pos} (width {s.width})")


def shape_width(s: Shape) -> int:
    return s.width


def shape_depth(s: Shape) -> int:
    return s.depth


def child_region(s: Shape, field: int) -> Tuple[int, Shape]:
    """언어 수준 필드 field가 차지하는 (저장소 오프셋, 하위 shape)"""
    if s.cls is None:
        raise ShapeError("리프 shape에는 필드가 없습니다")
    if not 0 <= field < s.cls.arity:
        raise ShapeError(f"필드 인덱스 범위 초과: {field} ({s.cls})")
    return s.offsets[field], s.children[field]
