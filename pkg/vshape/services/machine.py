"""
CEK 머신 평가기
- 제어(식 또는 반환값), 환경(불변 바인딩 체인), 연속(프레임 스택)으로 한 단계씩 진행합니다.
- 생성자 식은 values.construct, 생성자 패턴은 values.get_field를 거치므로
  shape 최적화가 프로그램 실행 전체에서 그대로 동작합니다.
- 꼬리 위치 호출은 프레임을 쌓지 않습니다.
"""
import logging
from typing import Any, Dict, List, Optional, Set

from ..exceptions import (
    ArityError,
    MatchFailure,
    NotAFunction,
    PrimopTypeError,
    StepLimitExceeded,
    UndefinedGlobal,
)
from ..models import Mode
from .lang import (
    App,
    Ctor,
    Expr,
    If,
    IntLit,
    Lambda,
    Match,
    Pattern,
    PCtor,
    PInt,
    PrimOp,
    Program,
    PVar,
    PWild,
    Var,
    deep_nesting,
    validate,
)
from .shapes import ClassDescriptor
from .tables import Runtime, seed_all_fields
from .values import Boxed, construct, get_field, show

logger = logging.getLogger(__name__)

# 오류 메시지에 넣을 값 출력 길이
SHOW_LIMIT = 200

# 프레임 종류
F_ARGS = "apply-args"        # 호출/생성자 인자를 왼쪽부터 계산 중
F_MATCH = "match-dispatch"   # scrutinee 계산 후 절 선택
F_IF = "if-branch"           # 조건 계산 후 분기
F_PRIM_LEFT = "primop-left"  # 왼쪽 피연산자 계산 중
F_PRIM_RIGHT = "primop-right"


class Env:
    """불변 환경 프레임 (클로저가 캡처)"""
    __slots__ = ("bindings", "parent")

    def __init__(self, bindings: Dict[str, Any], parent: Optional["Env"]):
        self.bindings = bindings
        self.parent = parent


class Closure:
    __slots__ = ("params", "body", "env")

    def __init__(self, params, body: Expr, env: Optional[Env]):
        self.params = params
        self.body = body
        self.env = env

    def __str__(self) -> str:
        return f"<closure/{len(self.params)}>"


class Frame:
    """연속 스택의 한 층. values는 F_ARGS에서 지금까지 계산한 부분 식 값, left는 primop 왼쪽 값"""
    __slots__ = ("kind", "expr", "env", "values", "left")

    def __init__(self, kind: str, expr: Expr, env: Optional[Env], values=None, left=None):
        self.kind = kind
        self.expr = expr
        self.env = env
        self.values = values
        self.left = left


def _is_simple(expr: Expr, simple: Set[int]) -> bool:
    """프레임 없이 바로 계산할 수 있는 식인지 (하위 식 판정 결과를 simple에 기록)"""
    kind = type(expr)
    if kind is IntLit or kind is Var or kind is Lambda:
        result = True
    elif kind is PrimOp:
        result = _is_simple(expr.lhs, simple) & _is_simple(expr.rhs, simple)
    elif kind is Ctor:
        result = all([_is_simple(arg, simple) for arg in expr.args])
    else:
        result = False

    # 하위 식도 빠짐없이 방문
    if kind is Lambda:
        _is_simple(expr.body, simple)
    elif kind is App:
        _is_simple(expr.callee, simple)
        for arg in expr.args:
            _is_simple(arg, simple)
    elif kind is If:
        _is_simple(expr.cond, simple)
        _is_simple(expr.then, simple)
        _is_simple(expr.orelse, simple)
    elif kind is Match:
        _is_simple(expr.scrutinee, simple)
        for clause in expr.clauses:
            _is_simple(clause.body, simple)

    if result:
        simple.add(id(expr))
    return result


def match_pattern(rt: Runtime, pat: Pattern, v: Any, env: Optional[Env]) -> Optional[Env]:
    """
    패턴 매칭. 성공하면 바인딩이 추가된 환경, 실패하면 None
    - 생성자 패턴은 shape의 루트 클래스로 비교한 뒤 각 필드를 get_field로 꺼내 재귀 비교합니다.
    """
    bindings: Dict[str, Any] = {}
    pending = [(pat, v)]
    while pending:
        p, value = pending.pop()
        kind = type(p)
        if kind is PWild:
            continue
        if kind is PVar:
            bindings[p.name] = value
        elif kind is PInt:
            if type(value) is not int or value != p.value:
                return None
        elif kind is PCtor:
            if type(value) is not Boxed:
                return None
            cls = value.shape.cls
            expected = p.cls or ClassDescriptor(p.name, len(p.args))
            if cls != expected:
                return None
            fields = [get_field(rt, value, j) for j in range(cls.arity)]
            pending.extend(reversed(list(zip(p.args, fields))))
        else:
            raise TypeError(f"알 수 없는 패턴: {p!r}")

    if not bindings and env is not None:
        return env
    return Env(bindings, env)


class Machine:
    """
    검증된 Program 하나를 Runtime 위에서 실행하는 CEK 머신

    Attributes:
        steps: 진행한 전이 횟수 (모드와 무관하게 결정적)
        peak_depth: 연속 스택의 최대 깊이
    """

    def __init__(self, rt: Runtime, program: Program, step_limit: Optional[int] = None):
        self.rt = rt
        self.program = program
        self.step_limit = step_limit
        self.steps = 0
        self.peak_depth = 0
        self.globals: Dict[str, Any] = {}
        self._simple: Set[int] = set()

        with deep_nesting():
            for definition in program.definitions:
                _is_simple(definition.expr, self._simple)
            _is_simple(program.body, self._simple)

    # --- [실행] ---

    def run(self) -> Any:
        # 정의는 순서대로 평가, 함수 본문에서는 모든 최상위 이름이 보임
        # simple 식은 재귀로 계산하므로 중첩 깊이만큼 재귀 한도 필요
        with deep_nesting():
            for definition in self.program.definitions:
                self.globals[definition.name] = self._execute(definition.expr)
            return self._execute(self.program.body)

    def _execute(self, expr: Expr) -> Any:
        stack: List[Frame] = []
        simple = self._simple
        limit = self.step_limit
        control: Optional[Expr] = expr
        env: Optional[Env] = None
        value: Any = None

        while True:
            self.steps += 1
            if limit is not None and self.steps > limit:
                raise StepLimitExceeded(limit)

            # 1. 식 평가
            if control is not None:
                expr = control
                kind = type(expr)
                if id(expr) in simple:
                    value = self._value_of(expr, env)
                    control = None
                elif kind is App:
                    frame = Frame(F_ARGS, expr, env, [])
                    pending = self._collect(frame, (expr.callee,) + expr.args)
                    if pending is None:
                        control, env, value = self._finish(frame)
                    else:
                        self._push(stack, frame)
                        control = pending
                elif kind is Ctor:
                    frame = Frame(F_ARGS, expr, env, [])
                    pending = self._collect(frame, expr.args)
                    if pending is None:
                        control, env, value = self._finish(frame)
                    else:
                        self._push(stack, frame)
                        control = pending
                elif kind is If:
                    if id(expr.cond) in simple:
                        control = self._branch(expr, self._value_of(expr.cond, env))
                    else:
                        self._push(stack, Frame(F_IF, expr, env))
                        control = expr.cond
                elif kind is Match:
                    if id(expr.scrutinee) in simple:
                        control, env = self._dispatch(expr, self._value_of(expr.scrutinee, env), env)
                    else:
                        self._push(stack, Frame(F_MATCH, expr, env))
                        control = expr.scrutinee
                elif kind is PrimOp:
                    if id(expr.lhs) in simple:
                        left = self._value_of(expr.lhs, env)
                        self._push(stack, Frame(F_PRIM_RIGHT, expr, env, left=left))
                        control = expr.rhs
                    else:
                        self._push(stack, Frame(F_PRIM_LEFT, expr, env))
                        control = expr.lhs
                else:
                    raise TypeError(f"알 수 없는 식: {expr!r}")
                continue

            # 2. 값 반환
            if not stack:
                return value

            frame = stack[-1]
            kind = frame.kind
            if kind == F_ARGS:
                frame.values.append(value)
                expr = frame.expr
                parts = (expr.callee,) + expr.args if type(expr) is App else expr.args
                pending = self._collect(frame, parts)
                if pending is None:
                    stack.pop()
                    control, env, value = self._finish(frame)
                else:
                    control = pending
                    env = frame.env
            elif kind == F_IF:
                stack.pop()
                env = frame.env
                control = self._branch(frame.expr, value)
            elif kind == F_MATCH:
                stack.pop()
                control, env = self._dispatch(frame.expr, value, frame.env)
            elif kind == F_PRIM_LEFT:
                stack.pop()
                expr = frame.expr
                env = frame.env
                if id(expr.rhs) in simple:
                    value = self._primop(expr.op, value, self._value_of(expr.rhs, env))
                else:
                    self._push(stack, Frame(F_PRIM_RIGHT, expr, env, left=value))
                    control = expr.rhs
            elif kind == F_PRIM_RIGHT:
                stack.pop()
                env = frame.env
                value = self._primop(frame.expr.op, frame.left, value)
            else:
                raise TypeError(f"알 수 없는 프레임: {kind}")

    def _push(self, stack: List[Frame], frame: Frame) -> None:
        stack.append(frame)
        if len(stack) > self.peak_depth:
            self.peak_depth = len(stack)

    # --- [전이 보조] ---

    def _collect(self, frame: Frame, parts) -> Optional[Expr]:
        """simple한 부분 식은 바로 계산하고, 첫 번째 non-simple 부분 식을 반환 (모두 끝나면 None)"""
        values = frame.values
        simple = self._simple
        while len(values) < len(parts):
            part = parts[len(values)]
            if id(part) not in simple:
                return part
            values.append(self._value_of(part, frame.env))
        return None

    def _finish(self, frame: Frame):
        """인자 계산이 끝난 호출/생성자를 마무리 -> (control, env, value)"""
        expr = frame.expr
        if type(expr) is Ctor:
            return None, frame.env, construct(self.rt, self._class_of(expr), frame.values)
        callee, *args = frame.values
        body, env = self._apply(callee, args)
        return body, env, None

    def _apply(self, callee: Any, args: List[Any]):
        if type(callee) is not Closure:
            raise NotAFunction(f"함수가 아닌 값을 호출했습니다: {show(callee, SHOW_LIMIT)}")
        if len(args) != len(callee.params):
            raise ArityError(
                f"인자 개수 불일치: 파라미터 {len(callee.params)}개, 인자 {len(args)}개"
            )
        if not args:
            return callee.body, callee.env
        return callee.body, Env(dict(zip(callee.params, args)), callee.env)

    def _branch(self, expr: If, cond: Any) -> Expr:
        # False/0 객체만 거짓
        if type(cond) is Boxed and cond.shape.cls.name == "False" and cond.shape.cls.arity == 0:
            return expr.orelse
        return expr.then

    def _dispatch(self, expr: Match, scrutinee: Any, env: Optional[Env]):
        for clause in expr.clauses:
            bound = match_pattern(self.rt, clause.pattern, scrutinee, env)
            if bound is not None:
                return clause.body, bound
        raise MatchFailure(
            f"{expr.line}:{expr.col}: 일치하는 패턴이 없습니다: {show(scrutinee, SHOW_LIMIT)}"
        )

    def _value_of(self, expr: Expr, env: Optional[Env]) -> Any:
        """simple 식을 프레임 없이 계산"""
        kind = type(expr)
        if kind is IntLit:
            return expr.value
        if kind is Var:
            return self._lookup(expr, env)
        if kind is Lambda:
            return Closure(expr.params, expr.body, env)
        if kind is PrimOp:
            return self._primop(expr.op, self._value_of(expr.lhs, env), self._value_of(expr.rhs, env))
        if kind is Ctor:
            fields = [self._value_of(arg, env) for arg in expr.args]
            return construct(self.rt, self._class_of(expr), fields)
        raise TypeError(f"simple 식이 아닙니다: {expr!r}")

    def _lookup(self, var: Var, env: Optional[Env]) -> Any:
        name = var.name
        while env is not None:
            bindings = env.bindings
            if name in bindings:
                return bindings[name]
            env = env.parent
        try:
            return self.globals[name]
        except KeyError:
            raise UndefinedGlobal(
                f"{var.line}:{var.col}: 아직 정의되지 않은 이름: {name}"
            ) from None

    def _class_of(self, expr: Ctor) -> ClassDescriptor:
        return expr.cls or ClassDescriptor(expr.name, len(expr.args))

    def _primop(self, op: str, a: Any, b: Any) -> Any:
        if type(a) is not int or type(b) is not int:
            raise PrimopTypeError(
                f"연산자 '{op}'에는 정수가 필요합니다: {show(a, SHOW_LIMIT)}, {show(b, SHOW_LIMIT)}"
            )
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "=":
            return self._boolean(a == b)
        return self._boolean(a < b)

    def _boolean(self, flag: bool) -> Boxed:
        rt = self.rt
        # True/0, False/0은 Runtime당 한 번만 만들고 할당 카운터에 넣지 않음
        if rt.booleans is None:
            registry = rt.registry
            rt.booleans = (
                Boxed(registry.default_shape(registry.intern_class("False", 0)), ()),
                Boxed(registry.default_shape(registry.intern_class("True", 0)), ()),
            )
        return rt.booleans[flag]


def prepare(rt: Runtime, program: Program) -> Program:
    """
    실행 준비: 생성자를 rt의 레지스트리에 등록하고, manual 모드면 규칙을 미리 심습니다.
    """
    program = validate(program, rt.registry)
    if rt.mode == Mode.MANUAL:
        seeded = seed_all_fields(rt, rt.registry.classes)
        logger.info(f"manual 모드 규칙 시드 {seeded}개")
    return program


def evaluate(rt: Runtime, program: Program, step_limit: Optional[int] = None) -> Any:
    """검증된 프로그램을 실행하고 결과 값을 반환"""
    return Machine(rt, program, step_limit).run()
