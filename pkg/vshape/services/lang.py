"""
s-expression 미니 언어 (패턴 매칭이 있는 람다 계산)
- pyparsing으로 토큰을 읽어 괄호 트리를 만들고, 그 트리를 AST로 변환합니다.
- 대문자로 시작하는 식별자는 생성자이며, 인자 개수가 클래스의 arity를 결정합니다 (Cons 2개 -> Cons/2).
- 오류는 모두 줄:열 위치를 가진 ParseError / ValidationError 입니다.

문법:
    program := defn* expr
    defn    := "(" "define" "(" NAME param* ")" expr ")" | "(" "define" NAME expr ")"
    expr    := INT | NAME | "(" "lambda" "(" param* ")" expr ")"
             | "(" "if" expr expr expr ")" | "(" "match" expr clause+ ")"
             | "(" PRIMOP expr expr ")" | "(" CTOR expr* ")" | "(" expr expr* ")"
    clause  := "(" pattern expr ")"
    pattern := "_" | NAME | INT | "(" CTOR pattern* ")"
"""
import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import FrozenSet, List, Optional, Set, Tuple, Union

import pyparsing as pp

from ..exceptions import ParseError, ValidationError
from .shapes import ClassDescriptor, ShapeRegistry

logger = logging.getLogger(__name__)

PRIMOPS = ("+", "-", "*", "=", "<")
RESERVED = ("define", "lambda", "if", "match", "_")


# --- [괄호 트리 (reader 결과)] ---

@dataclass(frozen=True)
class SAtom:
    value: Union[int, str]
    line: int
    col: int


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int
    col: int


def _location(s: str, loc: int) -> Tuple[int, int]:
    return pp.lineno(loc, s), pp.col(loc, s)


# 괄호 중첩 한도 (AST 순회 재귀 깊이의 상한)
MAX_NESTING = 2000
# 한도까지 중첩된 AST를 재귀로 순회할 때 필요한 인터프리터 재귀 한도
RECURSION_LIMIT = 20_000


@dataclass(frozen=True)
class _Paren:
    opening: bool
    line: int
    col: int


def _build_tokenizer() -> pp.ParserElement:
    # 정수 뒤에 기호 문자가 이어지면 정수가 아님 ("-"만 있는 경우나 "12abc")
    integer = pp.Regex(r"-?\d+(?![^\s();])")
    integer.set_parse_action(lambda s, loc, toks: SAtom(int(toks[0]), *_location(s, loc)))
    symbol = pp.Regex(r"[^\s();]+")
    symbol.set_parse_action(lambda s, loc, toks: SAtom(toks[0], *_location(s, loc)))
    opening = pp.Literal("(")
    opening.set_parse_action(lambda s, loc, toks: _Paren(True, *_location(s, loc)))
    closing = pp.Literal(")")
    closing.set_parse_action(lambda s, loc, toks: _Paren(False, *_location(s, loc)))

    tokens = pp.ZeroOrMore(integer | symbol | opening | closing)
    tokens.ignore(pp.Regex(r";[^\n]*"))
    return tokens


_TOKENIZER = _build_tokenizer()


def read_forms(text: str) -> Tuple[Union[SAtom, SList], ...]:
    """텍스트를 최상위 괄호 트리 목록으로 읽기 (괄호 짝은 명시적 스택으로 맞춤)"""
    try:
        tokens = _TOKENIZER.parse_string(text, parse_all=True)
    except pp.ParseBaseException as e:
        raise ParseError(f"구문 오류 (토큰): {e.msg}", e.lineno, e.col) from None

    top: list = []
    open_groups: List[Tuple[_Paren, list]] = []
    for token in tokens:
        items = open_groups[-1][1] if open_groups else top
        if type(token) is not _Paren:
            items.append(token)
        elif token.opening:
            if len(open_groups) >= MAX_NESTING:
                raise ParseError(f"괄호 중첩이 너무 깊습니다 (최대 {MAX_NESTING})", token.line, token.col)
            open_groups.append((token, []))
        else:
            if not open_groups:
                raise ParseError("짝이 없는 ')'", token.line, token.col)
            opening, children = open_groups.pop()
            node = SList(tuple(children), opening.line, opening.col)
            (open_groups[-1][1] if open_groups else top).append(node)

    if open_groups:
        opening = open_groups[-1][0]
        raise ParseError("닫히지 않은 '('", opening.line, opening.col)
    return tuple(top)


@contextmanager
def deep_nesting():
    """
    MAX_NESTING 깊이의 AST를 재귀로 순회하는 구간
    - 재귀 한도를 잠시 올리고, 그래도 넘치면 ParseError (exit 2)로 바꿉니다.
    """
    previous = sys.getrecursionlimit()
    sys.setrecursionlimit(max(previous, RECURSION_LIMIT))
    try:
        yield
    except RecursionError:
        raise ParseError("식 중첩이 너무 깊습니다") from None
    finally:
        sys.setrecursionlimit(previous)


# --- [AST] ---

@dataclass(frozen=True)
class IntLit:
    value: int
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Lambda:
    params: Tuple[str, ...]
    body: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class App:
    callee: "Expr"
    args: Tuple["Expr", ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Ctor:
    name: str
    args: Tuple["Expr", ...]
    cls: Optional[ClassDescriptor] = field(default=None, compare=False)
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PrimOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PWild:
    pass


@dataclass(frozen=True)
class PVar:
    name: str


@dataclass(frozen=True)
class PInt:
    value: int


@dataclass(frozen=True)
class PCtor:
    name: str
    args: Tuple["Pattern", ...]
    cls: Optional[ClassDescriptor] = field(default=None, compare=False)


Pattern = Union[PWild, PVar, PInt, PCtor]


@dataclass(frozen=True)
class Clause:
    pattern: Pattern
    body: "Expr"


@dataclass(frozen=True)
class Match:
    scrutinee: "Expr"
    clauses: Tuple[Clause, ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Expr = Union[IntLit, Var, Lambda, App, Ctor, Match, If, PrimOp]


@dataclass(frozen=True)
class Definition:
    name: str
    expr: Expr


@dataclass(frozen=True)
class Program:
    definitions: Tuple[Definition, ...]
    body: Expr


# --- [괄호 트리 -> AST] ---

def _is_ctor_name(name: str) -> bool:
    return name[:1].isupper()


def _fail(node: Union[SAtom, SList], message: str) -> ParseError:
    return ParseError(message, node.line, node.col)


def _name_of(node: Union[SAtom, SList], what: str) -> str:
    """변수/파라미터 이름으로 쓸 수 있는 기호인지 확인"""
    if not isinstance(node, SAtom) or isinstance(node.value, int):
        raise _fail(node, f"{what} 이름이 와야 합니다")
    name = node.value
    if name in RESERVED or name in PRIMOPS:
        raise _fail(node, f"예약어는 {what} 이름으로 쓸 수 없습니다: {name}")
    if _is_ctor_name(name):
        raise _fail(node, f"생성자 '{name}'는 괄호로 감싸야 합니다 (예: ({name}))")
    if name[0].isdigit() or (name[0] == "-" and name[1:2].isdigit()):
        raise _fail(node, f"잘못된 토큰: {name}")
    return name


def _params(node: Union[SAtom, SList]) -> Tuple[str, ...]:
    if not isinstance(node, SList):
        raise _fail(node, "파라미터 목록은 괄호로 감싸야 합니다")
    names = []
    for item in node.items:
        name = _name_of(item, "파라미터")
        if name in names:
            raise _fail(item, f"중복된 파라미터: {name}")
        names.append(name)
    return tuple(names)


def _to_expr(node: Union[SAtom, SList]) -> Expr:
    if isinstance(node, SAtom):
        if isinstance(node.value, int):
            return IntLit(node.value, node.line, node.col)
        return Var(_name_of(node, "변수"), node.line, node.col)

    items = node.items
    if not items:
        raise _fail(node, "빈 괄호 ()는 식이 아닙니다")

    head = items[0]
    line, col = node.line, node.col
    if isinstance(head, SAtom) and isinstance(head.value, str):
        word = head.value
        if word == "define":
            raise _fail(node, "define은 프로그램 최상위에서만 쓸 수 있습니다")
        if word == "lambda":
            if len(items) != 3:
                raise _fail(node, "lambda 형식: (lambda (param ...) body)")
            return Lambda(_params(items[1]), _to_expr(items[2]), line, col)
        if word == "if":
            if len(items) != 4:
                raise _fail(node, "if 형식: (if cond then else)")
            return If(_to_expr(items[1]), _to_expr(items[2]), _to_expr(items[3]), line, col)
        if word == "match":
            return _to_match(node)
        if word in PRIMOPS:
            if len(items) != 3:
                raise _fail(node, f"연산자 '{word}'는 인자 2개가 필요합니다")
            return PrimOp(word, _to_expr(items[1]), _to_expr(items[2]), line, col)
        if word == "_":
            raise _fail(head, "'_'는 패턴에서만 쓸 수 있습니다")
        if _is_ctor_name(word):
            return Ctor(word, tuple([_to_expr(arg) for arg in items[1:]]), None, line, col)

    return App(_to_expr(head), tuple([_to_expr(arg) for arg in items[1:]]), line, col)


def _to_match(node: SList) -> Match:
    items = node.items
    if len(items) < 2:
        raise _fail(node, "match 형식: (match expr (pattern body) ...)")
    if len(items) == 2:
        raise _fail(node, "match에 절이 하나도 없습니다")

    clauses = []
    for item in items[2:]:
        if not isinstance(item, SList) or len(item.items) != 2:
            raise _fail(item, "match 절 형식: (pattern body)")
        pattern = _to_pattern(item.items[0], set())
        clauses.append(Clause(pattern, _to_expr(item.items[1])))
    return Match(_to_expr(items[1]), tuple(clauses), node.line, node.col)


def _to_pattern(node: Union[SAtom, SList], seen: Set[str]) -> Pattern:
    if isinstance(node, SAtom):
        if isinstance(node.value, int):
            return PInt(node.value)
        if node.value == "_":
            return PWild()
        name = _name_of(node, "패턴 변수")
        if name in seen:
            raise _fail(node, f"패턴 안에서 중복된 변수: {name}")
        seen.add(name)
        return PVar(name)

    if not node.items:
        raise _fail(node, "빈 패턴 ()")
    head = node.items[0]
    if not (isinstance(head, SAtom) and isinstance(head.value, str) and _is_ctor_name(head.value)):
        raise _fail(node, "괄호 패턴은 생성자로 시작해야 합니다")
    return PCtor(head.value, tuple([_to_pattern(sub, seen) for sub in node.items[1:]]))


def _is_define(node: Union[SAtom, SList]) -> bool:
    return (
        isinstance(node, SList)
        and bool(node.items)
        and isinstance(node.items[0], SAtom)
        and node.items[0].value == "define"
    )


def _to_definition(node: SList) -> Definition:
    items = node.items
    if len(items) != 3:
        raise _fail(node, "define 형식: (define (name param ...) body) 또는 (define name expr)")
    target = items[1]
    # 1. 함수 정의 축약형
    if isinstance(target, SList):
        if not target.items:
            raise _fail(target, "define에 이름이 없습니다")
        name = _name_of(target.items[0], "정의")
        params = _params(SList(target.items[1:], target.line, target.col))
        return Definition(name, Lambda(params, _to_expr(items[2]), node.line, node.col))
    # 2. 값 정의
    return Definition(_name_of(target, "정의"), _to_expr(items[2]))


def parse(text: str) -> Program:
    """
    프로그램 텍스트를 AST로 변환

    Args:
        text: UTF-8 소스 (';'부터 줄 끝까지는 주석)

    Returns:
        Program (생성자 클래스는 아직 해석되지 않은 상태, validate 필요)
    """
    forms = read_forms(text)
    if not forms:
        raise ParseError("프로그램이 비어 있습니다", 1, 1)
    with deep_nesting():
        return _to_program(forms)


def _to_program(forms: Tuple[Union[SAtom, SList], ...]) -> Program:
    *defines, last = forms
    if _is_define(last):
        raise _fail(last, "프로그램 본문 식이 없습니다 (마지막 식이 define)")

    definitions = []
    names: Set[str] = set()
    for node in defines:
        if not _is_define(node):
            raise _fail(node, "본문 식은 하나만 올 수 있으며 define 뒤 마지막에 와야 합니다")
        definition = _to_definition(node)
        if definition.name in names:
            raise _fail(node, f"중복된 정의: {definition.name}")
        names.add(definition.name)
        definitions.append(definition)

    return Program(tuple(definitions), _to_expr(last))


def parse_file(path: Union[str, Path]) -> Program:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(f"파일이 없습니다: {path}") from None
    except (OSError, UnicodeDecodeError) as e:
        raise ParseError(f"파일을 읽을 수 없습니다: {path} ({e})") from None
    return parse(text)


# --- [검증 / 생성자 해석] ---

def validate(program: Program, registry: Optional[ShapeRegistry] = None) -> Program:
    """
    정의되지 않은 변수를 거부하고 생성자를 interning된 ClassDescriptor로 해석

    Args:
        program: parse 결과
        registry: 생성자 클래스를 등록할 레지스트리 (없으면 임시 레지스트리)

    Returns:
        모든 Ctor/PCtor의 cls가 채워진 새 Program
    """
    registry = registry if registry is not None else ShapeRegistry()
    # 최상위 정의는 순서와 무관하게 서로 보임 (재귀 허용)
    top = frozenset(d.name for d in program.definitions)

    with deep_nesting():
        definitions = tuple(
            Definition(d.name, _resolve(d.expr, top, registry)) for d in program.definitions
        )
        body = _resolve(program.body, top, registry)
    logger.debug(f"검증 완료: 정의 {len(definitions)}개, 클래스 {len(registry.classes)}개")
    return Program(definitions, body)


def _resolve(expr: Expr, scope: FrozenSet[str], registry: ShapeRegistry) -> Expr:
    kind = type(expr)
    if kind is IntLit:
        return expr
    if kind is Var:
        if expr.name not in scope:
            raise ValidationError(
                f"정의되지 않은 변수: {expr.name}", expr.name, expr.line, expr.col
            )
        return expr
    if kind is Lambda:
        return replace(expr, body=_resolve(expr.body, scope | frozenset(expr.params), registry))
    if kind is App:
        return replace(
            expr,
            callee=_resolve(expr.callee, scope, registry),
            args=tuple([_resolve(arg, scope, registry) for arg in expr.args]),
        )
    if kind is Ctor:
        return replace(
            expr,
            args=tuple([_resolve(arg, scope, registry) for arg in expr.args]),
            cls=registry.intern_class(expr.name, len(expr.args)),
        )
    if kind is If:
        return replace(
            expr,
            cond=_resolve(expr.cond, scope, registry),
            then=_resolve(expr.then, scope, registry),
            orelse=_resolve(expr.orelse, scope, registry),
        )
    if kind is PrimOp:
        return replace(
            expr,
            lhs=_resolve(expr.lhs, scope, registry),
            rhs=_resolve(expr.rhs, scope, registry),
        )
    if kind is Match:
        clauses = []
        for clause in expr.clauses:
            pattern = _resolve_pattern(clause.pattern, registry)
            inner = scope | frozenset(pattern_variables(pattern))
            clauses.append(Clause(pattern, _resolve(clause.body, inner, registry)))
        return replace(
            expr, scrutinee=_resolve(expr.scrutinee, scope, registry), clauses=tuple(clauses)
        )
    raise TypeError(f"알 수 없는 식: {expr!r}")


def _resolve_pattern(pattern: Pattern, registry: ShapeRegistry) -> Pattern:
    if isinstance(pattern, PCtor):
        return PCtor(
            pattern.name,
            tuple([_resolve_pattern(sub, registry) for sub in pattern.args]),
            registry.intern_class(pattern.name, len(pattern.args)),
        )
    return pattern


def pattern_variables(pattern: Pattern) -> Tuple[str, ...]:
    if isinstance(pattern, PVar):
        return (pattern.name,)
    if isinstance(pattern, PCtor):
        return tuple([name for sub in pattern.args for name in pattern_variables(sub)])
    return ()


# --- [정규 출력] ---

def to_source(node: Union[Program, Definition, Expr, Pattern]) -> str:
    """정규 s-expression 출력 (parse(to_source(p)) == p)"""
    with deep_nesting():
        return _source(node)


def _source(node: Union[Program, Definition, Expr, Pattern]) -> str:
    if isinstance(node, Program):
        lines = [_source(d) for d in node.definitions]
        lines.append(_source(node.body))
        return "\n".join(lines) + "\n"
    if isinstance(node, Definition):
        return f"(define {node.name} {_source(node.expr)})"

    kind = type(node)
    if kind is IntLit:
        return str(node.value)
    if kind is Var:
        return node.name
    if kind is Lambda:
        return f"(lambda ({' '.join(node.params)}) {_source(node.body)})"
    if kind is App:
        return _joined("(", [_source(node.callee), *[_source(arg) for arg in node.args]])
    if kind is Ctor or kind is PCtor:
        return _joined("(", [node.name, *[_source(arg) for arg in node.args]])
    if kind is If:
        return f"(if {_source(node.cond)} {_source(node.then)} {_source(node.orelse)})"
    if kind is PrimOp:
        return f"({node.op} {_source(node.lhs)} {_source(node.rhs)})"
    if kind is Match:
        clauses = " ".join(
            [f"({_source(c.pattern)} {_source(c.body)})" for c in node.clauses]
        )
        return f"(match {_source(node.scrutinee)} {clauses})"
    if kind is PWild:
        return "_"
    if kind is PVar:
        return node.name
    if kind is PInt:
        return str(node.value)
    raise TypeError(f"출력할 수 없는 노드: {node!r}")


def _joined(opening: str, parts) -> str:
    return opening + " ".join(parts) + ")"
